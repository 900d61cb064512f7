#pragma once

#include <Eigen/Geometry>

#include "depthcal/types.hpp"

namespace depthcal {

/// Rotation matrix for a rotation-vector (axis * angle, radians).
Mat3 so3_exp(const Vec3& rotation_vector);

/// Rotation-vector of a rotation matrix, angle in [0, pi].
Vec3 so3_log(const Mat3& rotation);

/// Nearest proper rotation to an arbitrary 3x3 matrix (sign-corrected
/// polar factor via SVD).
Mat3 nearest_rotation(const Mat3& m);

/// Proper rigid motion: rotation plus translation in millimetres.
///
/// The rotation is projected to the nearest element of SO(3) at
/// construction, so tracked poses with rounding drift are accepted and
/// every stored instance satisfies |R^T R - I|_max <= 1e-9, det R = 1.
///
/// Optional frame tags name the source and target coordinate systems.
/// Composition and point action verify them when both sides carry tags and
/// throw FrameMismatch on disagreement; untagged values compose freely.
class RigidTransform {
 public:
  /// Identity, untagged.
  RigidTransform();

  RigidTransform(const Mat3& rotation, const Vec3& translation_mm,
                 Frame source = Frame::unspecified,
                 Frame target = Frame::unspecified);

  static RigidTransform from_matrix(const Mat4& homogeneous,
                                    Frame source = Frame::unspecified,
                                    Frame target = Frame::unspecified);
  static RigidTransform from_quaternion(const Eigen::Quaterniond& q,
                                        const Vec3& translation_mm,
                                        Frame source = Frame::unspecified,
                                        Frame target = Frame::unspecified);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Frame source() const { return source_; }
  Frame target() const { return target_; }

  Mat4 matrix() const;
  Eigen::Quaterniond unit_quaternion() const { return Eigen::Quaterniond(rotation_); }

  /// Closed-form inverse (R^T, -R^T t); frame tags swap.
  RigidTransform inverse() const;

  /// Composition: the right operand applies first. Requires
  /// rhs.target == this->source when both are tagged.
  RigidTransform operator*(const RigidTransform& rhs) const;

  /// Point action R p + t on raw coordinates.
  Vec3 operator*(const Vec3& p_mm) const { return rotation_ * p_mm + translation_; }

  /// Tagged point action: verifies p.frame against source(), retags the
  /// result with target().
  Point3d operator*(const Point3d& p) const;

  /// Same numeric value with different advisory tags.
  RigidTransform with_frames(Frame source, Frame target) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
  Frame source_ = Frame::unspecified;
  Frame target_ = Frame::unspecified;
};

}  // namespace depthcal
