#pragma once

#include <span>

#include "depthcal/rigid_transform.hpp"
#include "depthcal/types.hpp"

namespace depthcal {

/// Result of a stylus pivot calibration. Angles describe the angular
/// coverage of the pose sweep: stylus axis directions are projected onto the
/// two principal transverse axes of their spread about the mean direction,
/// and each angle is the full extent (max minus min signed angle) along one
/// axis.
struct PivotResult {
  Vec3 tip_offset = Vec3::Zero();    ///< stylus tip in the marker frame, mm
  Vec3 pivot_point = Vec3::Zero();   ///< fixed pivot location in the world frame, mm
  double rms_3d = 0.0;               ///< sqrt(mean |r_i|^2) over poses, mm
  double mean_error = 0.0;           ///< mean |r_i|, mm
  double max_error = 0.0;            ///< max |r_i|, mm
  double major_angle_deg = 0.0;
  double minor_angle_deg = 0.0;
  int n_poses = 0;
};

/// Solves the stacked linear system [R_i | -I] (tip; pivot) = -t_i over all
/// marker-to-world poses in one least-squares pass.
///
/// Throws TooFewPoses for n < 10 and DegenerateMotion when the smallest
/// singular value of the 3n x 6 system falls below 1e-8 of the largest
/// (insufficient rotational diversity).
PivotResult pivot_calibrate(std::span<const RigidTransform> marker_to_world);

/// Tip position R tip_offset + t for one tracked stylus pose.
Vec3 stylus_tip_in_world(const RigidTransform& stylus_pose, const PivotResult& pivot);

}  // namespace depthcal
