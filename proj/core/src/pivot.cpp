#include "depthcal/pivot.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "depthcal/errors.hpp"

namespace depthcal {

namespace {

constexpr double kDegenerateRatio = 1e-8;
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

/// Full angular extent of the pose sweep along the two principal transverse
/// axes of the stylus-axis directions.
void coverage_angles(std::span<const RigidTransform> poses, double& major_deg,
                     double& minor_deg) {
  const Eigen::Index n = static_cast<Eigen::Index>(poses.size());
  std::vector<Vec3> axes(poses.size());
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    axes[i] = poses[i].rotation().col(2);  // stylus axis = marker z in world
    sum += axes[i];
  }
  Vec3 mean_dir = sum.norm() > 1e-12 ? Vec3(sum.normalized()) : axes.front();

  // Orthonormal basis of the transverse plane.
  Vec3 helper = std::abs(mean_dir.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 e1 = mean_dir.cross(helper).normalized();
  const Vec3 e2 = mean_dir.cross(e1).normalized();

  Eigen::Matrix2d second_moment = Eigen::Matrix2d::Zero();
  Eigen::MatrixX2d transverse(n, 2);
  Eigen::VectorXd along(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 c(axes[i].dot(e1), axes[i].dot(e2));
    transverse.row(i) = c;
    along(i) = axes[i].dot(mean_dir);
    second_moment += c * c.transpose() / static_cast<double>(n);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(second_moment);
  // Eigenvalues ascend: column 1 is the principal (major) transverse axis.
  std::array<double, 2> extent{};
  for (int k = 0; k < 2; ++k) {
    const Eigen::Vector2d axis = eig.eigenvectors().col(1 - k);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double angle = std::atan2(transverse.row(i).dot(axis), along(i));
      lo = std::min(lo, angle);
      hi = std::max(hi, angle);
    }
    extent[k] = (hi - lo) * kRadToDeg;
  }
  major_deg = std::max(extent[0], extent[1]);
  minor_deg = std::min(extent[0], extent[1]);
}

}  // namespace

PivotResult pivot_calibrate(std::span<const RigidTransform> marker_to_world) {
  const std::size_t n = marker_to_world.size();
  if (n < 10) {
    throw TooFewPoses("pivot calibration needs >= 10 poses, got " + std::to_string(n));
  }

  Eigen::MatrixXd a(3 * n, 6);
  Eigen::VectorXd b(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    a.block<3, 3>(3 * static_cast<Eigen::Index>(i), 0) = marker_to_world[i].rotation();
    a.block<3, 3>(3 * static_cast<Eigen::Index>(i), 3) = -Mat3::Identity();
    b.segment<3>(3 * static_cast<Eigen::Index>(i)) = -marker_to_world[i].translation();
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  if (sigma(sigma.size() - 1) < kDegenerateRatio * sigma(0)) {
    throw DegenerateMotion(
        "pivot calibration: rotations too similar, tip unobservable (singular value "
        "ratio " +
        std::to_string(sigma(sigma.size() - 1) / sigma(0)) + ")");
  }
  const Eigen::Matrix<double, 6, 1> solution = svd.solve(b);

  PivotResult result;
  result.tip_offset = solution.head<3>();
  result.pivot_point = solution.tail<3>();
  result.n_poses = static_cast<int>(n);

  double sum_sq = 0.0;
  double sum = 0.0;
  double max_err = 0.0;
  for (const RigidTransform& pose : marker_to_world) {
    const double err = (pose * result.tip_offset - result.pivot_point).norm();
    sum_sq += err * err;
    sum += err;
    max_err = std::max(max_err, err);
  }
  result.rms_3d = std::sqrt(sum_sq / static_cast<double>(n));
  result.mean_error = sum / static_cast<double>(n);
  result.max_error = max_err;

  coverage_angles(marker_to_world, result.major_angle_deg, result.minor_angle_deg);
  return result;
}

Vec3 stylus_tip_in_world(const RigidTransform& stylus_pose, const PivotResult& pivot) {
  return stylus_pose * pivot.tip_offset;
}

}  // namespace depthcal
