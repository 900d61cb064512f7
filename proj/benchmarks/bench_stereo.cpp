#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/random.hpp"
#include "depthcal/scene.hpp"
#include "depthcal/stereo.hpp"

namespace {

using namespace depthcal;

std::vector<PointMatch> make_matches(const StereoRig& rig, int n) {
  Pcg32 rng(11);
  std::vector<PointMatch> matches;
  while (static_cast<int>(matches.size()) < n) {
    const Vec2 left_px(rng.uniform(80.0, rig.left.width - 80.0),
                       rng.uniform(80.0, rig.left.height - 80.0));
    const double depth = rng.uniform(50.0, 200.0);
    const Vec2 normalized = undistort(rig.left, left_px);
    const Vec3 p_left(normalized.x() * depth, normalized.y() * depth, depth);
    const Vec2 right_px = project_camera_point(rig.right, rig.left_to_right * p_left);
    if (!rig.right.in_bounds(right_px)) {
      continue;
    }
    PointMatch match;
    match.id = static_cast<int>(matches.size());
    match.left_px = project_camera_point(rig.left, p_left);
    match.right_px = right_px;
    matches.push_back(match);
  }
  return matches;
}

void BM_ProjectCameraPoint(benchmark::State& state) {
  const StereoRig rig = SceneConfig::default_rig();
  const Vec3 p(12.0, -8.0, 110.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_camera_point(rig.left, p));
  }
}
BENCHMARK(BM_ProjectCameraPoint);

void BM_Undistort(benchmark::State& state) {
  const StereoRig rig = SceneConfig::default_rig();
  const Vec2 px(1500.0, 900.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(undistort(rig.left, px));
  }
}
BENCHMARK(BM_Undistort);

void BM_Triangulate(benchmark::State& state) {
  const StereoRig rig = SceneConfig::default_rig();
  const std::vector<PointMatch> matches = make_matches(rig, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    for (const PointMatch& match : matches) {
      benchmark::DoNotOptimize(triangulate(rig, match));
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Triangulate)->Arg(16)->Arg(256);

void BM_MatchTruePositives(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Pcg32 rng(13);
  std::vector<IdPoint> gt;
  std::vector<Vec2> predictions;
  const int per_row = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (int i = 0; i < n; ++i) {
    const Vec2 center(20.0 * (i % per_row), 20.0 * (i / per_row));
    gt.push_back({i, center});
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    predictions.push_back(center +
                          rng.uniform(0.0, 4.0) * Vec2(std::cos(angle), std::sin(angle)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(match_true_positives(predictions, gt, 6.0));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MatchTruePositives)->Arg(12)->Arg(100)->Arg(400);

void BM_StereoFrame(benchmark::State& state) {
  // One full frame: id intersection then triangulation of every match.
  const StereoRig rig = SceneConfig::default_rig();
  const std::vector<PointMatch> matches = make_matches(rig, 64);
  std::vector<IdPoint> left, right;
  for (const PointMatch& match : matches) {
    left.push_back({match.id, match.left_px});
    right.push_back({match.id, match.right_px});
  }
  for (auto _ : state) {
    const std::vector<PointMatch> paired =
        stereo_correspond(left, right, PointSource::ground_truth);
    for (const PointMatch& match : paired) {
      benchmark::DoNotOptimize(triangulate(rig, match));
    }
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_StereoFrame);

}  // namespace

BENCHMARK_MAIN();
