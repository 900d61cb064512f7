#include "support/oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace depthcal::testing {

Mat4x4 homogeneous(const RigidTransform& t) {
  Mat4x4 m{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      m[r][c] = t.rotation()(r, c);
    }
    m[r][3] = t.translation()(r);
  }
  m[3] = {0.0, 0.0, 0.0, 1.0};
  return m;
}

Mat4x4 matmul(const Mat4x4& a, const Mat4x4& b) {
  Mat4x4 out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double sum = 0.0;
      for (int k = 0; k < 4; ++k) {
        sum += a[r][k] * b[k][c];
      }
      out[r][c] = sum;
    }
  }
  return out;
}

Mat4x4 rigid_inverse(const Mat4x4& m) {
  Mat4x4 out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out[r][c] = m[c][r];  // transpose of the rotation block
    }
  }
  for (int r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      sum += out[r][k] * m[k][3];
    }
    out[r][3] = -sum;
  }
  out[3] = {0.0, 0.0, 0.0, 1.0};
  return out;
}

std::array<double, 3> apply(const Mat4x4& m, const std::array<double, 3>& p) {
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) {
    out[r] = m[r][0] * p[0] + m[r][1] * p[1] + m[r][2] * p[2] + m[r][3];
  }
  return out;
}

std::array<double, 2> project_scalar(const CameraIntrinsics& intr,
                                     const Mat4x4& world_to_camera,
                                     const std::array<double, 3>& world_mm) {
  const std::array<double, 3> cam = apply(world_to_camera, world_mm);
  if (cam[2] <= 0.0) {
    throw std::runtime_error("project_scalar: point behind camera");
  }
  const double x = cam[0] / cam[2];
  const double y = cam[1] / cam[2];
  const double r2 = x * x + y * y;
  const double radial = 1.0 + intr.k1 * r2 + intr.k2 * r2 * r2 + intr.k3 * r2 * r2 * r2;
  const double xd = x * radial + 2.0 * intr.p1 * x * y + intr.p2 * (r2 + 2.0 * x * x);
  const double yd = y * radial + intr.p1 * (r2 + 2.0 * y * y) + 2.0 * intr.p2 * x * y;
  return {intr.fx * xd + intr.cx, intr.fy * yd + intr.cy};
}

Vec3 triangulate_midpoint(const StereoRig& rig, const PointMatch& match) {
  // Ray directions in the left camera frame, via the production undistort
  // (the oracle targets the intersection step, not the distortion model).
  const Vec2 nl = undistort(rig.left, match.left_px);
  const Vec2 nr = undistort(rig.right, match.right_px);

  const Mat3 r_lr = rig.left_to_right.rotation();
  const Vec3 t_lr = rig.left_to_right.translation();
  // Left rays start at the origin; the right camera centre in left
  // coordinates is -R^T t, and right-ray directions rotate by R^T.
  const Vec3 c2 = -r_lr.transpose() * t_lr;
  const Vec3 d1 = Vec3(nl.x(), nl.y(), 1.0);
  const Vec3 d2 = r_lr.transpose() * Vec3(nr.x(), nr.y(), 1.0);

  // Closest points: minimise |c1 + s d1 - (c2 + u d2)|^2.
  const double a = d1.dot(d1);
  const double b = d1.dot(d2);
  const double c = d2.dot(d2);
  const Vec3 w0 = -c2;  // c1 - c2
  const double d = d1.dot(w0);
  const double e = d2.dot(w0);
  const double denom = a * c - b * b;
  if (std::abs(denom) < 1e-14 * a * c) {
    throw std::runtime_error("triangulate_midpoint: rays near parallel");
  }
  const double s = (b * e - c * d) / denom;
  const double u = (a * e - b * d) / denom;
  return 0.5 * (s * d1 + (c2 + u * d2));
}

namespace {

struct SearchState {
  std::span<const Vec2> predictions;
  std::vector<std::vector<int>> candidates;  // gt indices within radius
  std::vector<double> distance;              // flattened pred * n_gt
  std::size_t n_gt = 0;
  std::vector<bool> used;
  std::vector<std::pair<int, int>> current;
  Assignment best;
  bool have_best = false;

  double dist(int pred, int gt) const { return distance[pred * n_gt + gt]; }

  void consider() {
    const bool better =
        !have_best || current.size() > best.pairs.size() ||
        (current.size() == best.pairs.size() && total() < best.total_distance);
    if (better) {
      best.pairs = current;
      best.total_distance = total();
      have_best = true;
    }
  }

  double total() const {
    double sum = 0.0;
    for (const auto& [p, g] : current) {
      sum += dist(p, g);
    }
    return sum;
  }

  void dfs(std::size_t i) {
    if (have_best && current.size() + (predictions.size() - i) < best.pairs.size()) {
      return;  // cannot reach the best cardinality any more
    }
    if (i == predictions.size()) {
      consider();
      return;
    }
    for (const int g : candidates[i]) {
      if (!used[g]) {
        used[g] = true;
        current.emplace_back(static_cast<int>(i), g);
        dfs(i + 1);
        current.pop_back();
        used[g] = false;
      }
    }
    dfs(i + 1);  // leave prediction i unmatched
  }
};

}  // namespace

Assignment best_assignment(std::span<const Vec2> predictions, std::span<const IdPoint> gt,
                           double radius_px) {
  SearchState state;
  state.predictions = predictions;
  state.n_gt = gt.size();
  state.used.assign(gt.size(), false);
  state.distance.assign(predictions.size() * gt.size(), 0.0);
  state.candidates.resize(predictions.size());
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double d = (predictions[p] - gt[g].px).norm();
      state.distance[p * gt.size() + g] = d;
      if (d <= radius_px) {
        state.candidates[p].push_back(static_cast<int>(g));
      }
    }
  }
  state.dfs(0);
  return state.best;
}

double simpson(double a, double b, int intervals, const std::function<double(double)>& f) {
  if (intervals < 2 || intervals % 2 != 0) {
    throw std::invalid_argument("simpson: intervals must be even and >= 2");
  }
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    sum += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  return sum * h / 3.0;
}

double TestRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) {
    u1 = uniform();
  }
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::sin(2.0 * M_PI * u2);
}

RigidTransform random_rigid(TestRng& rng, double translation_extent_mm) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  while (q.norm() < 1e-6) {
    q = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  }
  q.normalize();
  const Vec3 t(rng.uniform(-translation_extent_mm, translation_extent_mm),
               rng.uniform(-translation_extent_mm, translation_extent_mm),
               rng.uniform(-translation_extent_mm, translation_extent_mm));
  return RigidTransform::from_quaternion(q, t);
}

RigidTransform look_at_origin(const Vec3& position) {
  const Vec3 forward = (-position).normalized();
  Vec3 right = Vec3::UnitY().cross(forward);
  if (right.norm() < 1e-9) {
    right = Vec3::UnitX().cross(forward);
  }
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return RigidTransform(r, -r * position);
}

}  // namespace depthcal::testing
