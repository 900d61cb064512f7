#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string_view>

namespace depthcal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Coordinate frame labels. Advisory metadata: verified where two tagged
/// values meet, ignored when either side is unspecified. Never part of
/// numeric equality.
enum class Frame : std::uint8_t {
  unspecified,
  world,
  camera_left,
  camera_right,
  marker,
};

std::string_view to_string(Frame frame);
Frame frame_from_string(std::string_view name);

/// 3D point in millimetres with an advisory frame tag.
struct Point3d {
  Vec3 mm = Vec3::Zero();
  Frame frame = Frame::unspecified;
};

enum class Side : std::uint8_t { left, right };

/// Provenance of a 2D detection: manual label vs detector output.
enum class PointSource : std::uint8_t { ground_truth, model };

std::string_view to_string(Side side);
Side side_from_string(std::string_view name);
std::string_view to_string(PointSource source);
PointSource source_from_string(std::string_view name);

}  // namespace depthcal
