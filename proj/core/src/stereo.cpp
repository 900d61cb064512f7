#include "depthcal/stereo.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "depthcal/errors.hpp"

namespace depthcal {

namespace {

constexpr double kRankRatio = 1e-10;
constexpr double kInfinityRatio = 1e-12;

}  // namespace

TruePositiveResult match_true_positives(std::span<const Vec2> predictions,
                                        std::span<const IdPoint> ground_truth,
                                        double threshold_px) {
  if (!(threshold_px > 0.0)) {
    throw ParseError("true-positive threshold must be positive, got " +
                     std::to_string(threshold_px));
  }
  for (const Vec2& p : predictions) {
    if (!p.allFinite()) throw ParseError("non-finite prediction pixel");
  }
  std::map<int, std::size_t> gt_by_id;
  for (std::size_t j = 0; j < ground_truth.size(); ++j) {
    if (!ground_truth[j].px.allFinite()) {
      throw ParseError("non-finite ground-truth pixel");
    }
    if (!gt_by_id.emplace(ground_truth[j].id, j).second) {
      throw ParseError("duplicate ground-truth id " + std::to_string(ground_truth[j].id));
    }
  }

  struct Candidate {
    double distance;
    int gt_id;
    int prediction;
    std::size_t gt_index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (std::size_t j = 0; j < ground_truth.size(); ++j) {
      const double d = (predictions[i] - ground_truth[j].px).norm();
      if (d <= threshold_px) {
        candidates.push_back({d, ground_truth[j].id, static_cast<int>(i), j});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              if (a.gt_id != b.gt_id) return a.gt_id < b.gt_id;
              return a.prediction < b.prediction;
            });

  TruePositiveResult result;
  std::vector<bool> prediction_used(predictions.size(), false);
  std::vector<bool> gt_used(ground_truth.size(), false);
  for (const Candidate& c : candidates) {
    if (prediction_used[c.prediction] || gt_used[c.gt_index]) continue;
    prediction_used[c.prediction] = true;
    gt_used[c.gt_index] = true;
    result.matches.push_back(
        {c.prediction, predictions[c.prediction], c.gt_id, c.distance});
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const TruePositiveMatch& a, const TruePositiveMatch& b) {
              return a.gt_id < b.gt_id;
            });
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!prediction_used[i]) result.unmatched_predictions.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < ground_truth.size(); ++j) {
    if (!gt_used[j]) result.unmatched_gt_ids.push_back(ground_truth[j].id);
  }
  std::sort(result.unmatched_gt_ids.begin(), result.unmatched_gt_ids.end());
  return result;
}

std::vector<IdPoint> matched_points(const TruePositiveResult& result) {
  std::vector<IdPoint> points;
  points.reserve(result.matches.size());
  for (const TruePositiveMatch& m : result.matches) {
    points.push_back({m.gt_id, m.prediction_px});
  }
  return points;
}

std::vector<IdPoint> labeled_points(const FrameDetections& detections) {
  std::vector<IdPoint> points;
  points.reserve(detections.points.size());
  std::map<int, bool> seen;
  for (const Detection& d : detections.points) {
    if (!d.id.has_value()) {
      throw ParseError("detection without id in a labeled point set (frame " +
                       std::to_string(detections.frame_id) + ")");
    }
    if (!seen.emplace(*d.id, true).second) {
      throw ParseError("duplicate detection id " + std::to_string(*d.id) +
                       " (frame " + std::to_string(detections.frame_id) + ")");
    }
    points.push_back({*d.id, d.px});
  }
  std::sort(points.begin(), points.end(),
            [](const IdPoint& a, const IdPoint& b) { return a.id < b.id; });
  return points;
}

std::vector<Vec2> prediction_pixels(const FrameDetections& detections) {
  std::vector<Vec2> pixels;
  pixels.reserve(detections.points.size());
  for (const Detection& d : detections.points) pixels.push_back(d.px);
  return pixels;
}

std::vector<PointMatch> stereo_correspond(std::span<const IdPoint> left,
                                          std::span<const IdPoint> right,
                                          PointSource source) {
  std::map<int, Vec2> right_by_id;
  for (const IdPoint& p : right) {
    if (!right_by_id.emplace(p.id, p.px).second) {
      throw ParseError("duplicate id " + std::to_string(p.id) + " on the right side");
    }
  }
  std::map<int, Vec2> left_by_id;
  for (const IdPoint& p : left) {
    if (!left_by_id.emplace(p.id, p.px).second) {
      throw ParseError("duplicate id " + std::to_string(p.id) + " on the left side");
    }
  }
  std::vector<PointMatch> matches;
  for (const auto& [id, left_px] : left_by_id) {
    const auto it = right_by_id.find(id);
    if (it != right_by_id.end()) {
      matches.push_back({id, left_px, it->second, source});
    }
  }
  return matches;  // std::map iteration is id-ascending already
}

TriangulatedPoint triangulate(const StereoRig& rig, const PointMatch& match) {
  const Vec2 nl = undistort(rig.left, match.left_px);
  const Vec2 nr = undistort(rig.right, match.right_px);

  Mat34 pl = Mat34::Zero();
  pl.leftCols<3>().setIdentity();
  Mat34 pr;
  pr.leftCols<3>() = rig.left_to_right.rotation();
  pr.col(3) = rig.left_to_right.translation();

  Mat4 design;
  design.row(0) = nl.x() * pl.row(2) - pl.row(0);
  design.row(1) = nl.y() * pl.row(2) - pl.row(1);
  design.row(2) = nr.x() * pr.row(2) - pr.row(0);
  design.row(3) = nr.y() * pr.row(2) - pr.row(1);

  Eigen::JacobiSVD<Mat4> svd(design, Eigen::ComputeFullV);
  const Eigen::Vector4d sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(2) < kRankRatio * sigma(0)) {
    throw RaysNearParallel("triangulate: rank-deficient two-view system (id " +
                           std::to_string(match.id) + ")");
  }
  const Eigen::Vector4d h = svd.matrixV().col(3);
  if (std::abs(h(3)) <= kInfinityRatio * h.head<3>().norm()) {
    throw RaysNearParallel("triangulate: solution at infinity (id " +
                           std::to_string(match.id) + ")");
  }
  const Vec3 in_left = h.head<3>() / h(3);
  if (!(in_left.z() > 0.0)) {
    throw NegativeDepth("triangulate: point behind the left camera (id " +
                        std::to_string(match.id) + ")");
  }
  const Vec3 in_right = rig.left_to_right * in_left;
  if (!(in_right.z() > 0.0)) {
    throw NegativeDepth("triangulate: point behind the right camera (id " +
                        std::to_string(match.id) + ")");
  }

  const double residual =
      std::max((project_camera_point(rig.left, in_left) - match.left_px).norm(),
               (project_camera_point(rig.right, in_right) - match.right_px).norm());
  return TriangulatedPoint{match.id, in_left, residual};
}

}  // namespace depthcal
