#pragma once

#include <span>
#include <string>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/pnp.hpp"
#include "depthcal/rigid_transform.hpp"
#include "depthcal/types.hpp"

namespace depthcal {

/// One calibration view: the tracked marker pose (world -> marker) captured
/// together with the board correspondences seen by the endoscopic camera.
struct HandEyeFrame {
  RigidTransform marker_pose;
  std::vector<Correspondence2D3D> correspondences;
};

struct HandEyeResult {
  RigidTransform marker_to_camera;  ///< D: marker -> camera-left
  int selected_frame = -1;
  /// Cross-frame reprojection rms under the selected transform, one entry
  /// per input frame (NaN for frames that could not be scored).
  std::vector<double> per_frame_reproj_rms_px;
  double mean_reproj_px = 0.0;
  double std_reproj_px = 0.0;
  /// Per-frame diagnostics; empty string when the frame's pose solve
  /// succeeded. Failed frames still participate in candidate scoring.
  std::vector<std::string> frame_errors;
};

/// Best-of-n hand-eye calibration. Each frame's PnP pose E_i yields a
/// candidate D_i = E_i * marker_pose_i^-1; every candidate is scored by
/// reprojecting all frames through E_j = D_i * marker_pose_j and averaging
/// the per-frame rms, and the least-mean-error candidate wins (ties resolve
/// to the lowest frame index). Residuals live in undistorted pixel
/// coordinates, the same convention as solve_pnp.
///
/// Per-frame solves may run concurrently (threads > 1); scoring and
/// selection are deterministic regardless. Throws AllFramesFailed when no
/// frame yields a pose.
HandEyeResult hand_eye_calibrate(std::span<const HandEyeFrame> frames,
                                 const CameraIntrinsics& intrinsics,
                                 int threads = 1);

/// Projects a stylus-measured world point through the calibrated chain
/// E = marker_to_camera * marker_pose, full camera model (distorted pixels).
Vec2 reproject_measured(const Vec3& p_world, const RigidTransform& marker_to_camera,
                        const RigidTransform& marker_pose,
                        const CameraIntrinsics& intrinsics);

/// Maps a stylus-measured world point into the left-camera frame through the
/// same chain; this is the hand-eye depth measurement compared against
/// stereo triangulation.
Point3d measured_point_in_camera(const Vec3& p_world,
                                 const RigidTransform& marker_to_camera,
                                 const RigidTransform& marker_pose);

}  // namespace depthcal
