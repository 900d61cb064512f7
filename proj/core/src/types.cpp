#include "depthcal/types.hpp"

#include "depthcal/errors.hpp"

namespace depthcal {

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::unspecified: return "unspecified";
    case Frame::world: return "world";
    case Frame::camera_left: return "camera-left";
    case Frame::camera_right: return "camera-right";
    case Frame::marker: return "marker";
  }
  return "unspecified";
}

Frame frame_from_string(std::string_view name) {
  if (name == "unspecified") return Frame::unspecified;
  if (name == "world") return Frame::world;
  if (name == "camera-left") return Frame::camera_left;
  if (name == "camera-right") return Frame::camera_right;
  if (name == "marker") return Frame::marker;
  throw ParseError("unknown frame label: " + std::string(name));
}

std::string_view to_string(Side side) {
  return side == Side::left ? "left" : "right";
}

Side side_from_string(std::string_view name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  throw ParseError("unknown side: " + std::string(name));
}

std::string_view to_string(PointSource source) {
  return source == PointSource::ground_truth ? "gt" : "model";
}

PointSource source_from_string(std::string_view name) {
  if (name == "gt") return PointSource::ground_truth;
  if (name == "model") return PointSource::model;
  throw ParseError("unknown point source: " + std::string(name));
}

}  // namespace depthcal
