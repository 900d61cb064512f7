#include <benchmark/benchmark.h>

#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/hand_eye.hpp"
#include "depthcal/pivot.hpp"
#include "depthcal/pnp.hpp"
#include "depthcal/random.hpp"
#include "depthcal/scene.hpp"

namespace {

using namespace depthcal;

std::vector<RigidTransform> make_pivot_poses(int n) {
  SceneConfig config;
  config.seed = 1;
  config.n_pivot_poses = n;
  return generate_scene(config).pivot_poses;
}

void BM_PivotCalibrate(benchmark::State& state) {
  const std::vector<RigidTransform> poses = make_pivot_poses(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pivot_calibrate(poses));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PivotCalibrate)->Arg(100)->Arg(500)->Arg(2000);

std::vector<Correspondence2D3D> make_board(int n_points, const CameraIntrinsics& intr,
                                           const CameraPose& pose) {
  Pcg32 rng(7);
  std::vector<Correspondence2D3D> correspondences;
  for (int i = 0; i < n_points; ++i) {
    const Vec3 world(rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0), 0.0);
    correspondences.push_back({i, project(intr, pose, world), world});
  }
  return correspondences;
}

void BM_SolvePnp(benchmark::State& state) {
  const StereoRig rig = SceneConfig::default_rig();
  const CameraPose pose{RigidTransform(so3_exp(Vec3(0.2, -0.1, 0.05)), Vec3(4, -6, 120))};
  const std::vector<Correspondence2D3D> correspondences =
      make_board(static_cast<int>(state.range(0)), rig.left, pose);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_pnp(correspondences, rig.left));
  }
}
BENCHMARK(BM_SolvePnp)->Arg(6)->Arg(50)->Arg(200);

void BM_HandEyeCalibrate(benchmark::State& state) {
  SceneConfig config;
  config.seed = 3;
  config.n_handeye_frames = 8;
  config.n_handeye_points = 50;
  config.noise.px_sigma = 0.3;
  const SyntheticScene scene = generate_scene(config);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hand_eye_calibrate(scene.handeye_session, scene.rig.left, threads));
  }
  state.SetItemsProcessed(state.iterations() * config.n_handeye_frames);
}
BENCHMARK(BM_HandEyeCalibrate)->Arg(1)->Arg(2)->Arg(4);

void BM_GenerateScene(benchmark::State& state) {
  SceneConfig config;
  config.seed = 5;
  config.n_pivot_poses = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_scene(config));
  }
}
BENCHMARK(BM_GenerateScene)->Arg(100)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
