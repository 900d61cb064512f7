#include "depthcal/pnp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "depthcal/errors.hpp"
#include "depthcal/rigid_transform.hpp"

namespace depthcal {

namespace {

constexpr int kMaxGaussNewtonIterations = 30;
constexpr double kStepTolerance = 1e-12;
constexpr double kCollinearRatio = 1e-8;
constexpr double kPlanarRmsFraction = 1e-3;
constexpr double kAmbiguityTolerance = 1e-12;

struct Pose {
  Mat3 r;
  Vec3 t;
};

struct NormalizedProblem {
  std::vector<Vec3> world;       // mm
  std::vector<Vec2> normalized;  // undistorted image-plane coordinates
};

double cloud_diameter(const std::vector<Vec3>& points) {
  double d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      d = std::max(d, (points[i] - points[j]).norm());
    }
  }
  return d;
}

/// Isotropic Hartley conditioning: centroid to the origin, mean norm to
/// sqrt(dim).
template <typename VecT>
Eigen::Matrix<double, VecT::RowsAtCompileTime + 1, VecT::RowsAtCompileTime + 1>
conditioning_transform(const std::vector<VecT>& points) {
  constexpr int dim = VecT::RowsAtCompileTime;
  VecT centroid = VecT::Zero();
  for (const VecT& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double mean_norm = 0.0;
  for (const VecT& p : points) mean_norm += (p - centroid).norm();
  mean_norm /= static_cast<double>(points.size());
  const double scale = mean_norm > 1e-12 ? std::sqrt(double(dim)) / mean_norm : 1.0;

  Eigen::Matrix<double, dim + 1, dim + 1> t =
      Eigen::Matrix<double, dim + 1, dim + 1>::Identity();
  t.template topLeftCorner<dim, dim>() *= scale;
  t.template topRightCorner<dim, 1>() = -scale * centroid;
  return t;
}

/// Direct linear transform for a full 3x4 projection, general point sets.
Pose initialize_dlt(const NormalizedProblem& prob) {
  const std::size_t n = prob.world.size();
  const Eigen::Matrix4d tw = conditioning_transform(prob.world);
  const Eigen::Matrix3d tm = conditioning_transform(prob.normalized);

  Eigen::MatrixXd a(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector4d w = tw * prob.world[i].homogeneous();
    const Eigen::Vector3d m = tm * prob.normalized[i].homogeneous();
    const Eigen::Index r = 2 * static_cast<Eigen::Index>(i);
    a.row(r).setZero();
    a.row(r).segment<4>(0) = w.transpose();
    a.row(r).segment<4>(8) = -m.x() * w.transpose();
    a.row(r + 1).setZero();
    a.row(r + 1).segment<4>(4) = w.transpose();
    a.row(r + 1).segment<4>(8) = -m.y() * w.transpose();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::Matrix<double, 12, 1> p = svd.matrixV().col(11);

  Mat34 proj;
  proj.row(0) = p.segment<4>(0);
  proj.row(1) = p.segment<4>(4);
  proj.row(2) = p.segment<4>(8);
  proj = tm.inverse() * proj * tw;

  proj /= proj.block<1, 3>(2, 0).norm();
  // Fix the sign so that the centroid sits in front of the camera.
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& w : prob.world) centroid += w;
  centroid /= static_cast<double>(n);
  if (proj.row(2).dot(centroid.homogeneous()) < 0.0) {
    proj = -proj;
  }
  return Pose{nearest_rotation(proj.leftCols<3>()), proj.col(3)};
}

/// Plane basis for near-coplanar point sets: centroid plus the two leading
/// principal directions, right-handed with the plane normal.
struct PlaneBasis {
  Vec3 centroid;
  Mat3 axes;  // columns: u1, u2, normal
};

PlaneBasis fit_plane(const std::vector<Vec3>& points) {
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  PlaneBasis basis;
  basis.centroid = centroid;
  const Vec3 u1 = eig.eigenvectors().col(2);
  const Vec3 u2 = eig.eigenvectors().col(1);
  basis.axes.col(0) = u1;
  basis.axes.col(1) = u2;
  basis.axes.col(2) = u1.cross(u2);
  return basis;
}

/// Homography from plane coordinates to normalized image coordinates, then
/// the two sign-related pose decompositions.
std::array<std::optional<Pose>, 2> initialize_homography(const NormalizedProblem& prob,
                                                         const PlaneBasis& plane) {
  const std::size_t n = prob.world.size();
  std::vector<Vec2> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = prob.world[i] - plane.centroid;
    q[i] = Vec2(d.dot(plane.axes.col(0)), d.dot(plane.axes.col(1)));
  }
  const Eigen::Matrix3d tq = conditioning_transform(q);
  const Eigen::Matrix3d tm = conditioning_transform(prob.normalized);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d qh = tq * q[i].homogeneous();
    const Eigen::Vector3d m = tm * prob.normalized[i].homogeneous();
    const Eigen::Index r = 2 * static_cast<Eigen::Index>(i);
    a.row(r).setZero();
    a.row(r).segment<3>(0) = qh.transpose();
    a.row(r).segment<3>(6) = -m.x() * qh.transpose();
    a.row(r + 1).setZero();
    a.row(r + 1).segment<3>(3) = qh.transpose();
    a.row(r + 1).segment<3>(6) = -m.y() * qh.transpose();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Mat3 hom;
  hom.row(0) = h.segment<3>(0);
  hom.row(1) = h.segment<3>(3);
  hom.row(2) = h.segment<3>(6);
  hom = tm.inverse() * hom * tq;

  std::array<std::optional<Pose>, 2> candidates;
  for (int sign = 0; sign < 2; ++sign) {
    const Mat3 hs = sign == 0 ? hom : Mat3(-hom);
    const double scale = 2.0 / (hs.col(0).norm() + hs.col(1).norm());
    Mat3 frame;
    frame.col(0) = scale * hs.col(0);
    frame.col(1) = scale * hs.col(1);
    frame.col(2) = frame.col(0).cross(frame.col(1));
    const Mat3 r_plane = nearest_rotation(frame);
    // r_plane maps plane coordinates to the camera; lift to world coordinates.
    const Mat3 r = r_plane * plane.axes.transpose();
    const Vec3 t = scale * hs.col(2) - r * plane.centroid;
    candidates[sign] = Pose{r, t};
  }
  return candidates;
}

struct Refined {
  Pose pose;
  double cost = std::numeric_limits<double>::infinity();  // sum of squared px residuals
  bool valid = false;
};

/// Residuals and cost in undistorted pixel coordinates; infinity when any
/// point lands at z <= 0.
double evaluate(const NormalizedProblem& prob, const CameraIntrinsics& intr,
                const Pose& pose, Eigen::VectorXd* residuals) {
  const std::size_t n = prob.world.size();
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = pose.r * prob.world[i] + pose.t;
    if (!(p.z() > 0.0)) {
      return std::numeric_limits<double>::infinity();
    }
    const double ru = intr.fx * (p.x() / p.z() - prob.normalized[i].x());
    const double rv = intr.fy * (p.y() / p.z() - prob.normalized[i].y());
    if (residuals != nullptr) {
      (*residuals)(2 * static_cast<Eigen::Index>(i)) = ru;
      (*residuals)(2 * static_cast<Eigen::Index>(i) + 1) = rv;
    }
    cost += ru * ru + rv * rv;
  }
  return cost;
}

Refined refine(const NormalizedProblem& prob, const CameraIntrinsics& intr, Pose pose) {
  const std::size_t n = prob.world.size();
  Eigen::VectorXd residuals(2 * n);
  double cost = evaluate(prob, intr, pose, &residuals);
  if (!std::isfinite(cost)) {
    return Refined{};
  }

  Eigen::MatrixXd jacobian(2 * n, 6);
  for (int iter = 0; iter < kMaxGaussNewtonIterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 p = pose.r * prob.world[i] + pose.t;
      Eigen::Matrix<double, 2, 3> dpx;
      dpx << intr.fx / p.z(), 0.0, -intr.fx * p.x() / (p.z() * p.z()),
          0.0, intr.fy / p.z(), -intr.fy * p.y() / (p.z() * p.z());
      // The update is p(w, dt) = exp(w) (R x) + t + dt, so only the rotated
      // point q = R x feels w: d p / d w = -[q]x.
      const Vec3 q = p - pose.t;
      Mat3 skew;
      skew << 0.0, -q.z(), q.y(), q.z(), 0.0, -q.x(), -q.y(), q.x(), 0.0;
      const Eigen::Index r = 2 * static_cast<Eigen::Index>(i);
      jacobian.block<2, 3>(r, 0) = -dpx * skew;
      jacobian.block<2, 3>(r, 3) = dpx;
    }
    const Eigen::Matrix<double, 6, 6> h = jacobian.transpose() * jacobian;
    const Eigen::Matrix<double, 6, 1> g = jacobian.transpose() * residuals;
    Eigen::Matrix<double, 6, 1> step = -h.ldlt().solve(g);

    // Step halving on cost increase keeps a poor initialization from
    // diverging; noise-free problems never take this branch.
    double next_cost = std::numeric_limits<double>::infinity();
    Pose next = pose;
    for (int halving = 0; halving < 10; ++halving) {
      next.r = so3_exp(step.head<3>()) * pose.r;
      next.t = pose.t + step.tail<3>();
      next_cost = evaluate(prob, intr, next, &residuals);
      if (next_cost <= cost || !std::isfinite(cost)) {
        break;
      }
      step *= 0.5;
    }
    if (!std::isfinite(next_cost) || next_cost > cost) {
      evaluate(prob, intr, pose, &residuals);  // restore residuals of `pose`
      break;
    }
    pose = next;
    cost = next_cost;
    if (step.norm() <= kStepTolerance) {
      break;
    }
  }
  return Refined{pose, cost, true};
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

PnPResult solve_pnp(std::span<const Correspondence2D3D> correspondences,
                    const CameraIntrinsics& intrinsics) {
  const std::size_t n = correspondences.size();
  if (n < 6) {
    throw InsufficientPoints("solve_pnp needs >= 6 correspondences, got " +
                             std::to_string(n));
  }

  NormalizedProblem prob;
  prob.world.reserve(n);
  prob.normalized.reserve(n);
  for (const Correspondence2D3D& c : correspondences) {
    prob.world.push_back(c.world_mm);
    prob.normalized.push_back(undistort(intrinsics, c.image_px));
  }

  const PlaneBasis plane = fit_plane(prob.world);
  Mat3 cov = Mat3::Zero();
  for (const Vec3& w : prob.world) {
    const Vec3 d = w - plane.centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const double sigma1 = std::sqrt(std::max(0.0, eig.eigenvalues()(2)));
  const double sigma2 = std::sqrt(std::max(0.0, eig.eigenvalues()(1)));
  const double sigma3 = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
  if (sigma2 < kCollinearRatio * sigma1 || sigma1 <= 0.0) {
    throw DegenerateConfiguration("solve_pnp: world points are collinear");
  }
  const double diameter = cloud_diameter(prob.world);

  std::vector<Refined> refined;
  if (sigma3 < kPlanarRmsFraction * diameter) {
    for (const auto& candidate : initialize_homography(prob, plane)) {
      if (candidate.has_value()) {
        refined.push_back(refine(prob, intrinsics, *candidate));
      }
    }
  } else {
    refined.push_back(refine(prob, intrinsics, initialize_dlt(prob)));
  }

  std::size_t best = refined.size();
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (refined[i].valid && (best == refined.size() || refined[i].cost < refined[best].cost)) {
      best = i;
    }
  }
  if (best == refined.size()) {
    throw DegenerateConfiguration("solve_pnp: no pose places all points in front of the camera");
  }
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (i == best || !refined[i].valid) continue;
    if (std::abs(refined[i].cost - refined[best].cost) <= kAmbiguityTolerance &&
        rotation_angle_between(refined[i].pose.r, refined[best].pose.r) > 1e-6) {
      throw DegenerateConfiguration(
          "solve_pnp: planar ambiguity unresolved, both poses score equally");
    }
  }

  const Pose& pose = refined[best].pose;
  PnPResult result;
  result.pose.world_to_camera =
      RigidTransform(pose.r, pose.t, Frame::world, Frame::camera_left);
  Eigen::VectorXd residuals(2 * n);
  evaluate(prob, intrinsics, pose, &residuals);
  result.per_point_residuals_px.resize(n);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = residuals.segment<2>(2 * static_cast<Eigen::Index>(i)).norm();
    result.per_point_residuals_px[i] = e;
    sum_sq += e * e;
  }
  result.reproj_rms_px = std::sqrt(sum_sq / static_cast<double>(n));
  return result;
}

}  // namespace depthcal
