#include "depthcal/scene.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/errors.hpp"
#include "depthcal/pivot.hpp"
#include "depthcal/random.hpp"
#include "support/oracles.hpp"

namespace depthcal {
namespace {

using testing::simpson;

SceneConfig small_config() {
  SceneConfig config;
  config.seed = 91;
  config.n_points = 8;
  config.n_handeye_frames = 2;
  config.n_handeye_points = 12;
  config.n_annulus_frames = 2;
  config.n_pivot_poses = 40;
  return config;
}

TEST(Annulus, PointsLieOnTheSaddleEllipse) {
  const double a = 17.0, b = 14.0, h = 5.0;
  const std::vector<Vec3> points = generate_annulus(12, a, b, h);
  ASSERT_EQ(points.size(), 12u);
  for (const Vec3& p : points) {
    const double on_ellipse = (p.x() / a) * (p.x() / a) + (p.y() / b) * (p.y() / b);
    EXPECT_NEAR(on_ellipse, 1.0, 1e-9);
    const double theta = std::atan2(p.y() / b, p.x() / a);
    EXPECT_NEAR(p.z(), h * std::cos(2.0 * theta), 1e-6);
    EXPECT_LE(std::abs(p.z()), h + 1e-9);
  }
  EXPECT_NEAR(points[0].x(), a, 1e-9);  // first point starts the sweep at theta=0
  EXPECT_NEAR(points[0].z(), h, 1e-9);
}

TEST(Annulus, ArcLengthSpacingIsUniform) {
  const double a = 17.0, b = 14.0, h = 5.0;
  const int n = 10;
  const std::vector<Vec3> points = generate_annulus(n, a, b, h);
  const auto speed = [&](double t) {
    const double dx = -a * std::sin(t);
    const double dy = b * std::cos(t);
    const double dz = -2.0 * h * std::sin(2.0 * t);
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  };
  std::vector<double> theta(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double t = std::atan2(points[i].y() / b, points[i].x() / a);
    if (t < 0.0) {
      t += 2.0 * M_PI;
    }
    theta[i] = t;
  }
  const double total = simpson(0.0, 2.0 * M_PI, 4000, speed);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double lo = theta[i];
    const double hi = i + 1 < points.size() ? theta[i + 1] : theta[0] + 2.0 * M_PI;
    const double segment = simpson(lo, hi, 4000, speed);
    EXPECT_NEAR(segment, total / n, 1e-5 * total);
  }
}

TEST(Annulus, DegenerateArgumentsThrow) {
  EXPECT_THROW(generate_annulus(1, 17, 14, 5), ParseError);
  EXPECT_THROW(generate_annulus(8, 0.0, 14, 5), ParseError);
  EXPECT_THROW(generate_annulus(8, 17, -1.0, 5), ParseError);
  EXPECT_NO_THROW(generate_annulus(2, 17, 14, 0.0));  // flat ellipse is fine
}

TEST(Scene, SameSeedSameScene) {
  const SyntheticScene one = generate_scene(small_config());
  const SyntheticScene two = generate_scene(small_config());
  ASSERT_EQ(one.truth.annulus_world.size(), two.truth.annulus_world.size());
  for (std::size_t i = 0; i < one.truth.annulus_world.size(); ++i) {
    EXPECT_EQ(one.truth.annulus_world[i], two.truth.annulus_world[i]);
  }
  EXPECT_EQ(one.truth.hand_eye.matrix(), two.truth.hand_eye.matrix());
  ASSERT_EQ(one.pivot_poses.size(), two.pivot_poses.size());
  for (std::size_t i = 0; i < one.pivot_poses.size(); ++i) {
    EXPECT_EQ(one.pivot_poses[i].matrix(), two.pivot_poses[i].matrix());
  }
  ASSERT_EQ(one.detections_model_left.size(), two.detections_model_left.size());
  for (std::size_t f = 0; f < one.detections_model_left.size(); ++f) {
    const auto& pa = one.detections_model_left[f].points;
    const auto& pb = two.detections_model_left[f].points;
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      EXPECT_EQ(pa[i].px, pb[i].px);
    }
  }
}

TEST(Scene, DifferentSeedsDiffer) {
  SceneConfig config = small_config();
  const SyntheticScene one = generate_scene(config);
  config.seed = 4242;
  const SyntheticScene two = generate_scene(config);
  EXPECT_NE(one.truth.hand_eye.matrix(), two.truth.hand_eye.matrix());
}

TEST(Scene, ZeroNoiseMeansCleanEqualsMeasured) {
  const SyntheticScene scene = generate_scene(small_config());
  ASSERT_EQ(scene.measurements.size(), scene.measurements_clean.size());
  for (std::size_t i = 0; i < scene.measurements.size(); ++i) {
    EXPECT_EQ(scene.measurements[i].mm, scene.measurements_clean[i].mm);
    EXPECT_EQ(scene.measurements[i].mm, scene.truth.annulus_world[i]);
  }
  for (std::size_t i = 0; i < scene.pivot_poses.size(); ++i) {
    EXPECT_EQ(scene.pivot_poses[i].matrix(), scene.pivot_poses_clean[i].matrix());
  }
  for (std::size_t f = 0; f < scene.detections_gt_left.size(); ++f) {
    const auto& gt = scene.detections_gt_left[f].points;
    const auto& model = scene.detections_model_left[f].points;
    ASSERT_EQ(gt.size(), model.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
      EXPECT_EQ(gt[i].px, model[i].px);
    }
  }
}

TEST(Scene, GtDetectionsAreExactProjections) {
  const SyntheticScene scene = generate_scene(small_config());
  ASSERT_EQ(scene.detections_gt_left.size(), scene.truth.annulus_frames.size());
  for (std::size_t f = 0; f < scene.truth.annulus_frames.size(); ++f) {
    const FramePoses& frame = scene.truth.annulus_frames[f];
    const CameraPose left{frame.camera_pose};
    const CameraPose right{scene.rig.left_to_right * frame.camera_pose};
    const auto& left_points = scene.detections_gt_left[f].points;
    const auto& right_points = scene.detections_gt_right[f].points;
    ASSERT_EQ(left_points.size(), scene.truth.annulus_world.size());
    for (std::size_t i = 0; i < left_points.size(); ++i) {
      ASSERT_TRUE(left_points[i].id.has_value());
      EXPECT_EQ(*left_points[i].id, static_cast<int>(i));
      const Vec2 expect_left = project(scene.rig.left, left, scene.truth.annulus_world[i]);
      const Vec2 expect_right = project(scene.rig.right, right, scene.truth.annulus_world[i]);
      EXPECT_LT((left_points[i].px - expect_left).norm(), 1e-12);
      EXPECT_LT((right_points[i].px - expect_right).norm(), 1e-12);
      EXPECT_TRUE(scene.rig.left.in_bounds(left_points[i].px));
      EXPECT_TRUE(scene.rig.right.in_bounds(right_points[i].px));
    }
  }
}

TEST(Scene, HandEyeChainHoldsInTruth) {
  const SyntheticScene scene = generate_scene(small_config());
  const RigidTransform& d = scene.truth.hand_eye;
  EXPECT_EQ(d.source(), Frame::marker);
  EXPECT_EQ(d.target(), Frame::camera_left);
  for (const FramePoses& frame : scene.truth.handeye_frames) {
    const RigidTransform chained = d * frame.marker_pose;
    EXPECT_LT((chained.matrix() - frame.camera_pose.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  }
  for (const FramePoses& frame : scene.truth.annulus_frames) {
    const RigidTransform chained = d * frame.marker_pose;
    EXPECT_LT((chained.matrix() - frame.camera_pose.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Scene, HandEyeSessionPixelsMatchTheChain) {
  const SyntheticScene scene = generate_scene(small_config());
  ASSERT_EQ(scene.handeye_session.size(), scene.truth.handeye_frames.size());
  for (std::size_t j = 0; j < scene.handeye_session.size(); ++j) {
    const CameraPose camera{scene.truth.handeye_frames[j].camera_pose};
    for (const Correspondence2D3D& c : scene.handeye_session[j].correspondences) {
      EXPECT_LT((c.image_px - project(scene.rig.left, camera, c.world_mm)).norm(), 1e-12);
    }
  }
}

TEST(Scene, PivotPosesPlantTheTip) {
  const SyntheticScene scene = generate_scene(small_config());
  for (const RigidTransform& pose : scene.pivot_poses_clean) {
    EXPECT_EQ(pose.source(), Frame::marker);
    EXPECT_EQ(pose.target(), Frame::world);
    const Vec3 tip_world = pose * scene.truth.tip_offset_marker;
    EXPECT_LT((tip_world - scene.truth.pivot_point_world).norm(), 1e-10);
  }
}

TEST(Scene, PivotSweepCoverageMatchesDesign) {
  SceneConfig config = small_config();
  config.n_pivot_poses = 500;
  const SyntheticScene scene = generate_scene(config);
  const PivotResult result = pivot_calibrate(scene.pivot_poses_clean);
  EXPECT_NEAR(result.major_angle_deg, 60.0, 0.1);
  EXPECT_NEAR(result.minor_angle_deg, 54.0, 0.1);
}

TEST(Scene, CaliperListsAdjacentTruthDistances) {
  const SyntheticScene scene = generate_scene(small_config());
  const auto& annulus = scene.truth.annulus_world;
  ASSERT_EQ(scene.truth.caliper.size(), annulus.size());  // ring closes on itself
  for (const CaliperDistance& c : scene.truth.caliper) {
    const double expected = (annulus[c.id_a] - annulus[c.id_b]).norm();
    EXPECT_NEAR(c.distance_mm, expected, 1e-12);
  }
}

TEST(Scene, TranslationNoiseHasRequestedScale) {
  SceneConfig config = small_config();
  config.n_pivot_poses = 400;
  config.noise.marker_t_sigma = 0.3;
  const SyntheticScene scene = generate_scene(config);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < scene.pivot_poses.size(); ++i) {
    sum_sq += (scene.pivot_poses[i].translation() -
               scene.pivot_poses_clean[i].translation())
                  .squaredNorm();
  }
  // marker_t_sigma is the rms of the full 3D perturbation.
  const double rms = std::sqrt(sum_sq / scene.pivot_poses.size());
  EXPECT_NEAR(rms, 0.3, 0.05);
}

TEST(Scene, PixelNoiseHasRequestedScale) {
  SceneConfig config = small_config();
  config.n_points = 40;
  config.noise.px_sigma = 1.0;
  const SyntheticScene scene = generate_scene(config);
  double sum_sq = 0.0;
  int n = 0;
  for (std::size_t f = 0; f < scene.detections_gt_left.size(); ++f) {
    const auto& gt = scene.detections_gt_left[f].points;
    const auto& model = scene.detections_model_left[f].points;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const Vec2 delta = model[i].px - gt[i].px;
      sum_sq += delta.squaredNorm();
      n += 2;  // two axes, each with sigma 1
    }
  }
  EXPECT_NEAR(std::sqrt(sum_sq / n), 1.0, 0.25);
}

TEST(Scene, RotationNoisePerturbsOrientations) {
  SceneConfig config = small_config();
  config.n_pivot_poses = 200;
  config.noise.marker_r_sigma_deg = 0.5;
  const SyntheticScene scene = generate_scene(config);
  double max_angle_deg = 0.0;
  for (std::size_t i = 0; i < scene.pivot_poses.size(); ++i) {
    const Mat3 delta = scene.pivot_poses[i].rotation() *
                       scene.pivot_poses_clean[i].rotation().transpose();
    const double angle_deg = Eigen::AngleAxisd(delta).angle() * 180.0 / M_PI;
    max_angle_deg = std::max(max_angle_deg, angle_deg);
  }
  EXPECT_GT(max_angle_deg, 0.3);  // half-normal with sigma 0.5 deg
  EXPECT_LT(max_angle_deg, 3.0);
}

TEST(Scene, ValidateRejectsBadConfigs) {
  SceneConfig config = small_config();
  config.n_points = 1;
  EXPECT_THROW(config.validate(), ParseError);

  config = small_config();
  config.n_handeye_points = 5;
  EXPECT_THROW(config.validate(), ParseError);

  config = small_config();
  config.n_pivot_poses = 9;
  EXPECT_THROW(config.validate(), ParseError);

  config = small_config();
  config.noise.px_sigma = -0.1;
  EXPECT_THROW(config.validate(), ParseError);

  config = small_config();
  config.annulus.a_mm = 0.0;
  EXPECT_THROW(config.validate(), ParseError);

  EXPECT_NO_THROW(small_config().validate());
}

TEST(Rng, MatchesIndependentReimplementation) {
  // The same generator written a second time, structured differently.
  struct Reference {
    std::uint64_t state;
    std::uint64_t inc;
    explicit Reference(std::uint64_t seed) {
      constexpr std::uint64_t stream = 0xda3e39cb94b95bdbull;
      inc = (stream << 1u) | 1u;
      state = 0u;
      step();
      state += seed;
      step();
    }
    std::uint32_t step() {
      const std::uint64_t old = state;
      state = old * 6364136223846793005ull + inc;
      std::uint32_t xs = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
      std::uint32_t rot = old >> 59u;
      return rot == 0 ? xs : ((xs >> rot) | (xs << (32u - rot)));
    }
  };
  for (const std::uint64_t seed : {0ull, 1ull, 42ull, 0xdeadbeefull}) {
    Pcg32 rng(seed);
    Reference reference(seed);
    for (int i = 0; i < 64; ++i) {
      ASSERT_EQ(rng.next_u32(), reference.step()) << "seed " << seed << " draw " << i;
    }
  }
}

TEST(Rng, UniformAndNormalMoments) {
  Pcg32 rng(123);
  const int n = 20000;
  double sum_u = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum_u += u;
  }
  EXPECT_NEAR(sum_u / n, 0.5, 0.01);

  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.05);
}

}  // namespace
}  // namespace depthcal
