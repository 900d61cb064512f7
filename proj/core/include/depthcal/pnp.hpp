#pragma once

#include <span>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/types.hpp"

namespace depthcal {

/// One observed image point paired with its known world position.
struct Correspondence2D3D {
  int id = 0;
  Vec2 image_px = Vec2::Zero();
  Vec3 world_mm = Vec3::Zero();
};

struct PnPResult {
  CameraPose pose;  ///< world -> camera
  double reproj_rms_px = 0.0;
  std::vector<double> per_point_residuals_px;
};

/// Camera extrinsics from n >= 6 correspondences.
///
/// Image points are undistorted up front; residuals live in undistorted
/// pixel coordinates throughout. Initialization is a direct linear transform
/// for general point sets and a homography decomposition when the world
/// points are near-coplanar (plane-fit rms < 1e-3 of the cloud diameter),
/// followed by Gauss-Newton refinement with rotation-vector increments
/// (at most 30 iterations, step tolerance 1e-12).
///
/// Throws InsufficientPoints (n < 6) and DegenerateConfiguration (collinear
/// world points, or both homography poses scoring equally within 1e-12).
PnPResult solve_pnp(std::span<const Correspondence2D3D> correspondences,
                    const CameraIntrinsics& intrinsics);

}  // namespace depthcal
