#pragma once

#include "depthcal/rigid_transform.hpp"
#include "depthcal/types.hpp"

namespace depthcal {

/// Pinhole intrinsics with radial (k1, k2, k3) and tangential (p1, p2)
/// distortion, zero skew. Distortion acts on normalized image-plane
/// coordinates; (fx, fy, cx, cy) map those to pixels.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ParseError when focal lengths, principal point, or coefficients
  /// are out of range.
  void validate() const;

  bool in_bounds(const Vec2& px) const {
    return px.x() >= 0.0 && px.x() <= width && px.y() >= 0.0 && px.y() <= height;
  }
};

/// Extrinsic camera pose in its named role: maps world coordinates into the
/// camera frame.
struct CameraPose {
  RigidTransform world_to_camera;
};

/// Calibrated stereo pair. left_to_right maps left-camera coordinates into
/// the right-camera frame; its translation norm is the baseline.
struct StereoRig {
  CameraIntrinsics left;
  CameraIntrinsics right;
  RigidTransform left_to_right;

  void validate() const;
  double baseline_mm() const { return left_to_right.translation().norm(); }
};

/// Applies the distortion polynomial to normalized image-plane coordinates.
Vec2 distort_normalized(const CameraIntrinsics& intr, const Vec2& normalized);

/// Full projection of a camera-frame point: perspective divide, distortion,
/// pixel mapping. Throws PointBehindCamera when z <= 0.
Vec2 project_camera_point(const CameraIntrinsics& intr, const Vec3& p_camera_mm);

/// Full projection of a world point through the given extrinsics.
Vec2 project(const CameraIntrinsics& intr, const CameraPose& pose, const Vec3& p_world_mm);

/// Inverts the distortion model by fixed-point iteration, returning
/// normalized (dimensionless) image-plane coordinates. Converged when the
/// re-distorted residual drops below 1e-11 px; throws NoConvergence when 50
/// iterations leave the residual above 1e-8 px.
Vec2 undistort(const CameraIntrinsics& intr, const Vec2& px);

/// K [R|t] with zero skew. Distortion is handled separately via undistort.
Mat34 projection_matrix(const CameraIntrinsics& intr, const CameraPose& pose);

}  // namespace depthcal
