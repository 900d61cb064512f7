#include "depthcal/rigid_transform.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "depthcal/errors.hpp"

namespace depthcal {

namespace {

constexpr double kOrthonormalSkipTol = 1e-12;

bool is_orthonormal(const Mat3& r) {
  const Mat3 gram = r.transpose() * r;
  return (gram - Mat3::Identity()).cwiseAbs().maxCoeff() < kOrthonormalSkipTol &&
         r.determinant() > 0.0;
}

}  // namespace

Mat3 so3_exp(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-14) {
    // First-order expansion; exact to within double rounding at this scale.
    Mat3 r = Mat3::Identity();
    r(0, 1) = -rotation_vector.z();
    r(0, 2) = rotation_vector.y();
    r(1, 0) = rotation_vector.z();
    r(1, 2) = -rotation_vector.x();
    r(2, 0) = -rotation_vector.y();
    r(2, 1) = rotation_vector.x();
    return nearest_rotation(r);
  }
  return Eigen::AngleAxisd(angle, rotation_vector / angle).toRotationMatrix();
}

Vec3 so3_log(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

RigidTransform::RigidTransform()
    : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation_mm,
                               Frame source, Frame target)
    : rotation_(is_orthonormal(rotation) ? rotation : nearest_rotation(rotation)),
      translation_(translation_mm),
      source_(source),
      target_(target) {
  if (!translation_.allFinite() || !rotation_.allFinite()) {
    throw ParseError("rigid transform has non-finite entries");
  }
}

RigidTransform RigidTransform::from_matrix(const Mat4& homogeneous, Frame source,
                                           Frame target) {
  return RigidTransform(homogeneous.topLeftCorner<3, 3>(),
                        homogeneous.topRightCorner<3, 1>(), source, target);
}

RigidTransform RigidTransform::from_quaternion(const Eigen::Quaterniond& q,
                                               const Vec3& translation_mm,
                                               Frame source, Frame target) {
  return RigidTransform(q.normalized().toRotationMatrix(), translation_mm, source,
                        target);
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  return RigidTransform(rotation_.transpose(), -(rotation_.transpose() * translation_),
                        target_, source_);
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  if (source_ != Frame::unspecified && rhs.target_ != Frame::unspecified &&
      source_ != rhs.target_) {
    throw FrameMismatch("cannot compose: left operand expects " +
                        std::string(to_string(source_)) + ", right operand produces " +
                        std::string(to_string(rhs.target_)));
  }
  return RigidTransform(rotation_ * rhs.rotation_,
                        rotation_ * rhs.translation_ + translation_, rhs.source_,
                        target_);
}

Point3d RigidTransform::operator*(const Point3d& p) const {
  if (source_ != Frame::unspecified && p.frame != Frame::unspecified &&
      source_ != p.frame) {
    throw FrameMismatch("transform expects a point in " +
                        std::string(to_string(source_)) + ", got " +
                        std::string(to_string(p.frame)));
  }
  return Point3d{(*this) * p.mm, target_};
}

RigidTransform RigidTransform::with_frames(Frame source, Frame target) const {
  RigidTransform t = *this;
  t.source_ = source;
  t.target_ = target;
  return t;
}

}  // namespace depthcal
