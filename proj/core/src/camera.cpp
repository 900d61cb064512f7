#include "depthcal/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "depthcal/errors.hpp"

namespace depthcal {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ParseError("intrinsics: fx and fy must be > 0");
  }
  if (width <= 0 || height <= 0) {
    throw ParseError("intrinsics: image_size must be positive");
  }
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw ParseError("intrinsics: principal point outside the image");
  }
  for (double c : {k1, k2, k3, p1, p2, fx, fy, cx, cy}) {
    if (!std::isfinite(c)) {
      throw ParseError("intrinsics: non-finite parameter");
    }
  }
}

void StereoRig::validate() const {
  left.validate();
  right.validate();
  if (!(baseline_mm() > 0.0)) {
    throw ParseError("rig: baseline must be > 0");
  }
}

Vec2 distort_normalized(const CameraIntrinsics& intr, const Vec2& n) {
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3));
  const double xd = x * radial + 2.0 * intr.p1 * x * y + intr.p2 * (r2 + 2.0 * x * x);
  const double yd = y * radial + intr.p1 * (r2 + 2.0 * y * y) + 2.0 * intr.p2 * x * y;
  return {xd, yd};
}

Vec2 project_camera_point(const CameraIntrinsics& intr, const Vec3& p_camera_mm) {
  const double z = p_camera_mm.z();
  if (!(z > 0.0)) {
    throw PointBehindCamera("camera-frame z = " + std::to_string(z) + " mm");
  }
  const Vec2 distorted =
      distort_normalized(intr, {p_camera_mm.x() / z, p_camera_mm.y() / z});
  return {intr.fx * distorted.x() + intr.cx, intr.fy * distorted.y() + intr.cy};
}

Vec2 project(const CameraIntrinsics& intr, const CameraPose& pose, const Vec3& p_world_mm) {
  return project_camera_point(intr, pose.world_to_camera * p_world_mm);
}

Vec2 undistort(const CameraIntrinsics& intr, const Vec2& px) {
  if (!px.allFinite()) {
    throw ParseError("undistort: non-finite pixel coordinate");
  }
  // Residual measured in pixels so the contract is enforced directly.
  constexpr double kConvergedPx = 1e-11;
  constexpr double kAcceptPx = 1e-8;
  constexpr int kMaxIterations = 50;

  const Vec2 target((px.x() - intr.cx) / intr.fx, (px.y() - intr.cy) / intr.fy);
  Vec2 n = target;
  double residual_px = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kMaxIterations; ++i) {
    const Vec2 redistorted = distort_normalized(intr, n);
    const Vec2 err = redistorted - target;
    residual_px = std::max(std::abs(err.x()) * intr.fx, std::abs(err.y()) * intr.fy);
    if (residual_px <= kConvergedPx) {
      return n;
    }
    // Fixed-point step: peel the radial/tangential terms off the target.
    const double x = n.x();
    const double y = n.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3));
    const double dx = 2.0 * intr.p1 * x * y + intr.p2 * (r2 + 2.0 * x * x);
    const double dy = intr.p1 * (r2 + 2.0 * y * y) + 2.0 * intr.p2 * x * y;
    n = Vec2((target.x() - dx) / radial, (target.y() - dy) / radial);
  }
  const Vec2 err = distort_normalized(intr, n) - target;
  residual_px = std::max(std::abs(err.x()) * intr.fx, std::abs(err.y()) * intr.fy);
  if (residual_px > kAcceptPx) {
    throw NoConvergence("undistort: residual " + std::to_string(residual_px) +
                        " px after 50 iterations");
  }
  return n;
}

Mat34 projection_matrix(const CameraIntrinsics& intr, const CameraPose& pose) {
  Mat3 k = Mat3::Identity();
  k(0, 0) = intr.fx;
  k(1, 1) = intr.fy;
  k(0, 2) = intr.cx;
  k(1, 2) = intr.cy;
  Mat34 rt;
  rt.leftCols<3>() = pose.world_to_camera.rotation();
  rt.rightCols<1>() = pose.world_to_camera.translation();
  return k * rt;
}

}  // namespace depthcal
