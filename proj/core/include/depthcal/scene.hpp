#pragma once

#include <cstdint>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/evaluation.hpp"
#include "depthcal/hand_eye.hpp"
#include "depthcal/rigid_transform.hpp"
#include "depthcal/stereo.hpp"
#include "depthcal/types.hpp"

namespace depthcal {

/// Saddle-curve annulus phantom: semi-axes a, b and saddle height h.
struct AnnulusShape {
  double a_mm = 17.0;
  double b_mm = 14.0;
  double h_mm = 5.0;
};

/// Observation-noise magnitudes. px_sigma is the per-axis Gaussian sigma of
/// detected pixels; marker_t_sigma is the rms of the 3D translation
/// perturbation of tracked poses (and stylus measurements);
/// marker_r_sigma_deg draws a random-axis rotation of Gaussian magnitude,
/// composed on the right of the true pose.
struct NoiseConfig {
  double px_sigma = 0.0;
  double marker_t_sigma = 0.0;
  double marker_r_sigma_deg = 0.0;
};

struct SceneConfig {
  std::uint64_t seed = 1;
  int n_points = 12;             ///< annulus suture points
  AnnulusShape annulus;
  StereoRig rig = default_rig();
  int n_handeye_frames = 3;      ///< board views for hand-eye calibration
  int n_handeye_points = 50;     ///< board correspondences per frame
  int n_annulus_frames = 2;      ///< stereo views of the annulus
  int n_pivot_poses = 500;
  NoiseConfig noise;

  static StereoRig default_rig();

  /// Throws ParseError naming the offending field.
  void validate() const;
};

/// True poses of one stereo view: the left-camera extrinsics and the tracked
/// marker pose linked to it through the true hand-eye transform.
struct FramePoses {
  int frame_id = 0;
  RigidTransform camera_pose;  ///< world -> camera-left
  RigidTransform marker_pose;  ///< world -> marker
};

/// Everything the generator knows exactly; the oracle side of the scene.
struct SceneTruth {
  std::vector<Vec3> annulus_world;
  std::vector<Vec3> board_world;
  Vec3 tip_offset_marker = Vec3::Zero();
  Vec3 pivot_point_world = Vec3::Zero();
  RigidTransform hand_eye;  ///< true D: marker -> camera-left
  std::vector<FramePoses> handeye_frames;
  std::vector<FramePoses> annulus_frames;
  std::vector<CaliperDistance> caliper;  ///< true chord lengths
};

/// A generated scene: ground truth plus the observation sets both pipelines
/// consume. The *_clean variants carry zero injected noise; with all sigmas
/// zero the noisy members equal them exactly.
struct SyntheticScene {
  SceneConfig config;
  StereoRig rig;
  SceneTruth truth;

  std::vector<RigidTransform> pivot_poses;        ///< marker -> world, noisy
  std::vector<RigidTransform> pivot_poses_clean;
  std::vector<HandEyeFrame> handeye_session;      ///< noisy pixels and marker poses
  std::vector<HandEyeFrame> handeye_session_clean;
  std::vector<RigidTransform> marker_poses;       ///< per annulus frame, noisy
  std::vector<FrameDetections> detections_gt_left;     ///< exact projections
  std::vector<FrameDetections> detections_gt_right;
  std::vector<FrameDetections> detections_model_left;  ///< noisy predictions
  std::vector<FrameDetections> detections_model_right;
  std::vector<IdPoint3> measurements;        ///< stylus-measured points, world mm
  std::vector<IdPoint3> measurements_clean;  ///< equals truth.annulus_world
};

/// n points equidistant in arc length along the saddle curve
/// (a cos t, b sin t, h cos 2t), starting at t = 0. Arc lengths are inverted
/// numerically to 1e-9 relative tolerance.
std::vector<Vec3> generate_annulus(int n, double a_mm, double b_mm, double h_mm);

/// Deterministic scene construction: all randomness flows from one
/// generator seeded with config.seed, consumed in a fixed documented order.
/// Throws Unviewable when the configured geometry places a required point
/// outside a camera frustum (the config is rejected, never cropped).
SyntheticScene generate_scene(const SceneConfig& config);

}  // namespace depthcal
