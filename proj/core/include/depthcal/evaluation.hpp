#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depthcal/types.hpp"

namespace depthcal {

/// Summary statistics over a retained sample list. std is the population
/// (1/n) standard deviation.
struct ErrorStats {
  double mean = 0.0;
  double stddev = 0.0;
  int n = 0;
  std::string unit;             ///< "px" or "mm"
  std::vector<double> samples;  ///< audit list, in sorted-key order
};

/// Stats of a non-empty sample list; throws EmptyIntersection on an empty
/// one. Summation follows the given order, so callers pass sorted keys for
/// bit-stable results.
ErrorStats make_error_stats(std::vector<double> samples, std::string unit);

/// A 2D observation keyed by (frame, id).
struct Observation2d {
  int frame_id = 0;
  int id = 0;
  Vec2 px = Vec2::Zero();
};

/// A 3D observation keyed by (frame, id), expected in the left-camera frame.
struct Observation3d {
  int frame_id = 0;
  int id = 0;
  Vec3 mm = Vec3::Zero();
  Frame frame = Frame::camera_left;
};

/// Per-key Euclidean pixel distance over the shared (frame, id) keys of a
/// and b; keys present on only one side are excluded. Throws
/// EmptyIntersection when no key is shared and ParseError on duplicate keys.
ErrorStats error_2d(std::span<const Observation2d> a, std::span<const Observation2d> b);

/// Per-key Euclidean millimetre distance over shared keys; both sets must
/// live in the left-camera frame (tags of other frames raise FrameMismatch;
/// untagged points pass).
ErrorStats error_3d(std::span<const Observation3d> a, std::span<const Observation3d> b);

/// Reference distance between two neighboring suture points, measured with
/// a caliper.
struct CaliperDistance {
  int id_a = 0;
  int id_b = 0;
  double distance_mm = 0.0;
};

/// A 3D point keyed by suture id.
struct IdPoint3 {
  int id = 0;
  Vec3 mm = Vec3::Zero();
};

struct NeighborDistanceStats {
  ErrorStats stats;
  int skipped_pairs = 0;  ///< caliper pairs lacking an endpoint
};

/// |measured chord - caliper reference| per referenced pair; pairs lacking
/// either endpoint are skipped and counted. Throws MissingNeighbor when no
/// pair has both endpoints.
NeighborDistanceStats neighbor_distances(std::span<const IdPoint3> points,
                                         std::span<const CaliperDistance> caliper);

/// One table cell: the pairwise statistics plus bookkeeping about what was
/// excluded. A missing cell records why it could not be evaluated.
struct ReportCell {
  std::string name;
  std::optional<ErrorStats> stats;
  int excluded_a = 0;      ///< keys only in the first source
  int excluded_b = 0;      ///< keys only in the second source
  int skipped_pairs = 0;   ///< caliper pairs lacking an endpoint
  bool missing = false;
  std::string note;
};

/// Everything the report builder consumes. Empty vectors mean "source not
/// available"; the affected cells come back missing.
struct ReportInputs {
  std::vector<Observation2d> gt_left, gt_right;          // p_gt
  std::vector<Observation2d> model_left, model_right;    // p_m
  std::vector<Observation2d> reproj_left, reproj_right;  // p_reproj
  std::vector<Observation3d> depth_gt;                   // d_p_gt
  std::vector<Observation3d> depth_model;                // d_p_m
  std::vector<Observation3d> depth_handeye;              // d_he
  std::vector<CaliperDistance> caliper;
};

struct EvaluationReport {
  std::string dataset;
  std::vector<ReportCell> table_2d;  ///< p_gt-p_reproj, p_m-p_reproj, p_m-p_gt x left, right
  std::vector<ReportCell> table_3d;  ///< d_p_gt-d_he, d_p_m-d_p_gt, d_p_m-d_he
  std::vector<ReportCell> caliper;   ///< d_he, d_p_gt, d_p_m vs the caliper reference
};

/// Populates every cell of the 2D, 3D, and caliper tables. Cells whose
/// inputs are absent or share no keys are marked missing with a note;
/// FrameMismatch is rethrown with the offending cell named. Throws
/// EmptyIntersection when not a single cell could be evaluated.
EvaluationReport build_report(const std::string& dataset, const ReportInputs& inputs);

/// Aligned plain-text rendering with fixed two-decimal mean+-std cells.
std::string format_text_table(const EvaluationReport& report);

}  // namespace depthcal
