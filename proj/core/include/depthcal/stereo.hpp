#pragma once

#include <optional>
#include <span>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/types.hpp"

namespace depthcal {

/// One detected image point; id is required for ground-truth labels and
/// optional for model predictions.
struct Detection {
  std::optional<int> id;
  Vec2 px = Vec2::Zero();
};

/// All detections of one side / source for one video frame.
struct FrameDetections {
  int frame_id = 0;
  Side side = Side::left;
  PointSource source = PointSource::ground_truth;
  std::vector<Detection> points;
};

/// An identified image point (suture id + pixel position).
struct IdPoint {
  int id = 0;
  Vec2 px = Vec2::Zero();
};

struct TruePositiveMatch {
  int prediction_index = -1;
  Vec2 prediction_px = Vec2::Zero();
  int gt_id = 0;
  double distance_px = 0.0;
};

struct TruePositiveResult {
  std::vector<TruePositiveMatch> matches;        ///< sorted by gt_id
  std::vector<int> unmatched_predictions;        ///< false positives, by index
  std::vector<int> unmatched_gt_ids;             ///< misses, by id
};

/// A suture point observed on both sides of the stereo pair.
struct PointMatch {
  int id = 0;
  Vec2 left_px = Vec2::Zero();
  Vec2 right_px = Vec2::Zero();
  PointSource source = PointSource::ground_truth;
};

struct TriangulatedPoint {
  int id = 0;
  Vec3 camera_left_mm = Vec3::Zero();
  double reproj_residual_px = 0.0;  ///< max over the two views, full model
};

/// One-to-one assignment of predictions to labeled ground-truth points:
/// candidate pairs within threshold_px are accepted greedily in ascending
/// distance order (ties by gt_id, then prediction index), each prediction
/// and each ground-truth point used at most once. Unmatched predictions are
/// the false positives. Callers guarantee in-bounds pixels; this routine
/// checks finiteness, a positive threshold, and unique ground-truth ids.
TruePositiveResult match_true_positives(std::span<const Vec2> predictions,
                                        std::span<const IdPoint> ground_truth,
                                        double threshold_px = 6.0);

/// The accepted predictions of a matching, carrying their ground-truth
/// identity; sorted by id.
std::vector<IdPoint> matched_points(const TruePositiveResult& result);

/// Ground-truth detections as identified points; throws ParseError when a
/// point lacks an id or an id repeats.
std::vector<IdPoint> labeled_points(const FrameDetections& detections);

/// Raw prediction pixels of a detections record, labeled or not.
std::vector<Vec2> prediction_pixels(const FrameDetections& detections);

/// Inner join on id: only points present on both sides survive; output
/// sorted by id. Throws ParseError on duplicate ids within one side.
std::vector<PointMatch> stereo_correspond(std::span<const IdPoint> left,
                                          std::span<const IdPoint> right,
                                          PointSource source);

/// Two-view linear (DLT) triangulation of one match, expressed in the
/// left-camera frame. Observations are undistorted first; the left
/// projection is [I|0] and the right one comes from rig.left_to_right.
/// reproj_residual_px re-projects the solution through the full camera
/// model into both views.
///
/// Throws RaysNearParallel (rank-deficient system or solution at infinity)
/// and NegativeDepth (z <= 0 in either camera — a wrong correspondence).
TriangulatedPoint triangulate(const StereoRig& rig, const PointMatch& match);

}  // namespace depthcal
