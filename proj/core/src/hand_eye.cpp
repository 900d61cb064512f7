#include "depthcal/hand_eye.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "depthcal/errors.hpp"
#include "depthcal/parallel.hpp"

namespace depthcal {

namespace {

/// Observations of one frame with pixels undistorted once up front.
struct ScoringFrame {
  std::vector<Vec3> world;
  std::vector<Vec2> normalized;
  bool scorable = false;
};

/// Reprojection rms of one frame under the chain e_hat, in undistorted pixel
/// coordinates; +infinity when any point lands behind the camera.
double frame_rms(const ScoringFrame& frame, const CameraIntrinsics& intr,
                 const RigidTransform& e_hat) {
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < frame.world.size(); ++k) {
    const Vec3 p = e_hat * frame.world[k];
    if (!(p.z() > 0.0)) {
      return std::numeric_limits<double>::infinity();
    }
    const double ru = intr.fx * (p.x() / p.z() - frame.normalized[k].x());
    const double rv = intr.fy * (p.y() / p.z() - frame.normalized[k].y());
    sum_sq += ru * ru + rv * rv;
  }
  return std::sqrt(sum_sq / static_cast<double>(frame.world.size()));
}

}  // namespace

HandEyeResult hand_eye_calibrate(std::span<const HandEyeFrame> frames,
                                 const CameraIntrinsics& intrinsics,
                                 int threads) {
  const std::size_t n = frames.size();
  if (n == 0) {
    throw AllFramesFailed("hand_eye_calibrate: no frames given");
  }

  HandEyeResult result;
  result.frame_errors.assign(n, std::string());

  std::vector<ScoringFrame> scoring(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& corrs = frames[i].correspondences;
    if (corrs.empty()) {
      result.frame_errors[i] = "no correspondences";
      continue;
    }
    try {
      ScoringFrame sf;
      sf.world.reserve(corrs.size());
      sf.normalized.reserve(corrs.size());
      for (const Correspondence2D3D& c : corrs) {
        sf.world.push_back(c.world_mm);
        sf.normalized.push_back(undistort(intrinsics, c.image_px));
      }
      sf.scorable = true;
      scoring[i] = std::move(sf);
    } catch (const Error& e) {
      result.frame_errors[i] = e.what();
    }
  }

  std::vector<std::optional<RigidTransform>> candidates(n);
  parallel_for(n, threads, [&](std::size_t i) {
    if (!scoring[i].scorable) return;
    try {
      const PnPResult pnp = solve_pnp(frames[i].correspondences, intrinsics);
      candidates[i] = pnp.pose.world_to_camera * frames[i].marker_pose.inverse();
    } catch (const Error& e) {
      result.frame_errors[i] = e.what();
    }
  });

  std::size_t best = n;
  double best_score = std::numeric_limits<double>::infinity();
  bool any_candidate = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!candidates[i].has_value()) continue;
    any_candidate = true;
    double sum = 0.0;
    std::size_t scored = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!scoring[j].scorable) continue;
      sum += frame_rms(scoring[j], intrinsics, *candidates[i] * frames[j].marker_pose);
      ++scored;
    }
    const double score = scored > 0 ? sum / static_cast<double>(scored)
                                    : std::numeric_limits<double>::infinity();
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  if (!any_candidate) {
    std::string detail = "hand_eye_calibrate: every frame failed";
    for (std::size_t i = 0; i < n; ++i) {
      detail += "\n  frame " + std::to_string(i) + ": " + result.frame_errors[i];
    }
    throw AllFramesFailed(detail);
  }
  if (best == n) {
    throw DegenerateConfiguration(
        "hand_eye_calibrate: no candidate projects every frame in front of the camera");
  }

  result.marker_to_camera = *candidates[best];
  result.selected_frame = static_cast<int>(best);
  result.per_frame_reproj_rms_px.assign(n, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!scoring[j].scorable) continue;
    const double rms =
        frame_rms(scoring[j], intrinsics, result.marker_to_camera * frames[j].marker_pose);
    result.per_frame_reproj_rms_px[j] = rms;
    sum += rms;
    ++scored;
  }
  result.mean_reproj_px = sum / static_cast<double>(scored);
  double var = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double rms = result.per_frame_reproj_rms_px[j];
    if (std::isnan(rms)) continue;
    var += (rms - result.mean_reproj_px) * (rms - result.mean_reproj_px);
  }
  result.std_reproj_px = std::sqrt(var / static_cast<double>(scored));
  return result;
}

Vec2 reproject_measured(const Vec3& p_world, const RigidTransform& marker_to_camera,
                        const RigidTransform& marker_pose,
                        const CameraIntrinsics& intrinsics) {
  CameraPose pose;
  pose.world_to_camera = marker_to_camera * marker_pose;
  return project(intrinsics, pose, p_world);
}

Point3d measured_point_in_camera(const Vec3& p_world,
                                 const RigidTransform& marker_to_camera,
                                 const RigidTransform& marker_pose) {
  const RigidTransform e_hat = marker_to_camera * marker_pose;
  return Point3d{e_hat * p_world, Frame::camera_left};
}

}  // namespace depthcal
