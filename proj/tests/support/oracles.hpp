#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written with plain scalar arithmetic and no
// shared code paths with core/, so agreement between the two is evidence
// rather than tautology.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/rigid_transform.hpp"
#include "depthcal/stereo.hpp"
#include "depthcal/types.hpp"

namespace depthcal::testing {

/// 4x4 homogeneous matrix as nested arrays, row major.
using Mat4x4 = std::array<std::array<double, 4>, 4>;

Mat4x4 homogeneous(const RigidTransform& t);
Mat4x4 matmul(const Mat4x4& a, const Mat4x4& b);
Mat4x4 rigid_inverse(const Mat4x4& m);
std::array<double, 3> apply(const Mat4x4& m, const std::array<double, 3>& p);

/// Straight-line Brown-Conrady projection with scalar arithmetic.
std::array<double, 2> project_scalar(const CameraIntrinsics& intr,
                                     const Mat4x4& world_to_camera,
                                     const std::array<double, 3>& world_mm);

/// Midpoint of the common perpendicular between the two back-projected rays.
Vec3 triangulate_midpoint(const StereoRig& rig, const PointMatch& match);

/// Exhaustive true-positive assignment: maximise the number of pairs within
/// the radius, break ties by smaller total distance.  Branch and bound over
/// predictions; intended for small instances (<= 20 points with sparse
/// candidate sets).
struct Assignment {
  std::vector<std::pair<int, int>> pairs;  ///< (prediction index, gt index)
  double total_distance = 0.0;
};
Assignment best_assignment(std::span<const Vec2> predictions, std::span<const IdPoint> gt,
                           double radius_px);

/// Fixed-grid composite Simpson quadrature (intervals must be even).
double simpson(double a, double b, int intervals, const std::function<double(double)>& f);

/// xorshift64* generator -- a different family from the production RNG so the
/// two cannot share bugs.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dull;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t state_;
};

/// Uniformly distributed random rotation (normalised 4-normal quaternion)
/// with a translation drawn per axis from [-extent, extent].
RigidTransform random_rigid(TestRng& rng, double translation_extent_mm);

/// Camera at `position` looking at the world origin; +x right, +y down.
RigidTransform look_at_origin(const Vec3& position);

}  // namespace depthcal::testing
