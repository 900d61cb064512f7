#include "depthcal/io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <utility>

#include "depthcal/errors.hpp"

namespace depthcal::io {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path.string() + ": cannot open for reading");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void dump_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ParseError(path.string() + ": cannot open for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw ParseError(path.string() + ": write failed");
  }
}

const json& member(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) {
    throw ParseError(ctx + ": expected an object");
  }
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(ctx + ": missing field '" + key + "'");
  }
  return *it;
}

bool has(const json& j, const char* key) { return j.is_object() && j.contains(key); }

double as_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) {
    throw ParseError(ctx + ": expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw ParseError(ctx + ": non-finite number");
  }
  return v;
}

/// null reads back as NaN (the serializer writes NaN as null).
double as_number_or_nan(const json& j, const std::string& ctx) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) {
    throw ParseError(ctx + ": expected a number or null");
  }
  return j.get<double>();
}

int as_int(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) {
    throw ParseError(ctx + ": expected an integer");
  }
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& ctx) {
  if (!j.is_string()) {
    throw ParseError(ctx + ": expected a string");
  }
  return j.get<std::string>();
}

const json& as_array(const json& j, std::size_t expected_size, const std::string& ctx) {
  if (!j.is_array()) {
    throw ParseError(ctx + ": expected an array");
  }
  if (expected_size > 0 && j.size() != expected_size) {
    throw ParseError(ctx + ": expected " + std::to_string(expected_size) +
                     " elements, got " + std::to_string(j.size()));
  }
  return j;
}

double number_field(const json& j, const char* key, const std::string& ctx) {
  return as_number(member(j, key, ctx), ctx + "." + key);
}

int int_field(const json& j, const char* key, const std::string& ctx) {
  return as_int(member(j, key, ctx), ctx + "." + key);
}

Vec2 as_vec2(const json& j, const std::string& ctx) {
  const json& a = as_array(j, 2, ctx);
  return Vec2(as_number(a[0], ctx + "[0]"), as_number(a[1], ctx + "[1]"));
}

Vec3 as_vec3(const json& j, const std::string& ctx) {
  const json& a = as_array(j, 3, ctx);
  return Vec3(as_number(a[0], ctx + "[0]"), as_number(a[1], ctx + "[1]"),
              as_number(a[2], ctx + "[2]"));
}

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// ---- pose element --------------------------------------------------------

json pose_json(const RigidTransform& t) {
  json rotation = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      rotation.push_back(t.rotation()(r, c));
    }
  }
  json j;
  j["rotation"] = std::move(rotation);
  j["translation_mm"] = vec3_json(t.translation());
  if (t.source() != Frame::unspecified || t.target() != Frame::unspecified) {
    j["frame"] = std::string(to_string(t.source())) + "->" +
                 std::string(to_string(t.target()));
  }
  return j;
}

RigidTransform pose_from(const json& j, const std::string& ctx) {
  const json& rotation = as_array(member(j, "rotation", ctx), 9, ctx + ".rotation");
  Mat3 r;
  for (int i = 0; i < 9; ++i) {
    r(i / 3, i % 3) = as_number(rotation[i], ctx + ".rotation[" + std::to_string(i) + "]");
  }
  const Vec3 t = as_vec3(member(j, "translation_mm", ctx), ctx + ".translation_mm");
  Frame source = Frame::unspecified;
  Frame target = Frame::unspecified;
  if (has(j, "frame")) {
    const std::string label = as_string(j.at("frame"), ctx + ".frame");
    const auto arrow = label.find("->");
    try {
      if (arrow == std::string::npos) {
        target = frame_from_string(label);
      } else {
        source = frame_from_string(label.substr(0, arrow));
        target = frame_from_string(label.substr(arrow + 2));
      }
    } catch (const Error& e) {
      throw ParseError(ctx + ".frame: " + e.what());
    }
  }
  if (has(j, "timestamp_s")) {
    as_number(j.at("timestamp_s"), ctx + ".timestamp_s");  // accepted, unused
  }
  try {
    return RigidTransform(r, t, source, target);
  } catch (const Error& e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

// ---- camera records ------------------------------------------------------

json intrinsics_json(const CameraIntrinsics& intr) {
  json j;
  j["fx"] = intr.fx;
  j["fy"] = intr.fy;
  j["cx"] = intr.cx;
  j["cy"] = intr.cy;
  j["dist"] = json::array({intr.k1, intr.k2, intr.p1, intr.p2, intr.k3});
  j["image_size"] = json::array({intr.width, intr.height});
  return j;
}

CameraIntrinsics intrinsics_from(const json& j, const std::string& ctx) {
  CameraIntrinsics intr;
  intr.fx = number_field(j, "fx", ctx);
  intr.fy = number_field(j, "fy", ctx);
  intr.cx = number_field(j, "cx", ctx);
  intr.cy = number_field(j, "cy", ctx);
  const json& dist = as_array(member(j, "dist", ctx), 5, ctx + ".dist");
  intr.k1 = as_number(dist[0], ctx + ".dist[0]");
  intr.k2 = as_number(dist[1], ctx + ".dist[1]");
  intr.p1 = as_number(dist[2], ctx + ".dist[2]");
  intr.p2 = as_number(dist[3], ctx + ".dist[3]");
  intr.k3 = as_number(dist[4], ctx + ".dist[4]");
  const json& size = as_array(member(j, "image_size", ctx), 2, ctx + ".image_size");
  intr.width = as_int(size[0], ctx + ".image_size[0]");
  intr.height = as_int(size[1], ctx + ".image_size[1]");
  try {
    intr.validate();
  } catch (const Error& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  return intr;
}

json rig_json(const StereoRig& rig) {
  json j;
  j["left"] = intrinsics_json(rig.left);
  j["right"] = intrinsics_json(rig.right);
  j["left_to_right"] = pose_json(rig.left_to_right);
  return j;
}

StereoRig rig_from(const json& j, const std::string& ctx) {
  StereoRig rig;
  rig.left = intrinsics_from(member(j, "left", ctx), ctx + ".left");
  rig.right = intrinsics_from(member(j, "right", ctx), ctx + ".right");
  rig.left_to_right = pose_from(member(j, "left_to_right", ctx), ctx + ".left_to_right");
  try {
    rig.validate();
  } catch (const Error& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  return rig;
}

// ---- caliper / stats records --------------------------------------------

json caliper_json(std::span<const CaliperDistance> caliper) {
  json arr = json::array();
  for (const CaliperDistance& c : caliper) {
    json j;
    j["ids"] = json::array({c.id_a, c.id_b});
    j["distance_mm"] = c.distance_mm;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<CaliperDistance> caliper_from(const json& j, const std::string& ctx) {
  const json& arr = as_array(j, 0, ctx);
  std::vector<CaliperDistance> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ictx = ctx + "[" + std::to_string(i) + "]";
    const json& ids = as_array(member(arr[i], "ids", ictx), 2, ictx + ".ids");
    CaliperDistance c;
    c.id_a = as_int(ids[0], ictx + ".ids[0]");
    c.id_b = as_int(ids[1], ictx + ".ids[1]");
    c.distance_mm = number_field(arr[i], "distance_mm", ictx);
    if (c.distance_mm < 0.0) {
      throw ParseError(ictx + ".distance_mm: must be >= 0");
    }
    out.push_back(c);
  }
  return out;
}

// ---- scene config --------------------------------------------------------

json scene_config_json(const SceneConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["n_points"] = cfg.n_points;
  j["annulus"] = {{"a_mm", cfg.annulus.a_mm},
                  {"b_mm", cfg.annulus.b_mm},
                  {"h_mm", cfg.annulus.h_mm}};
  j["rig"] = rig_json(cfg.rig);
  j["n_handeye_frames"] = cfg.n_handeye_frames;
  j["n_handeye_points"] = cfg.n_handeye_points;
  j["n_annulus_frames"] = cfg.n_annulus_frames;
  j["n_pivot_poses"] = cfg.n_pivot_poses;
  j["noise"] = {{"px_sigma", cfg.noise.px_sigma},
                {"marker_t_sigma", cfg.noise.marker_t_sigma},
                {"marker_r_sigma_deg", cfg.noise.marker_r_sigma_deg}};
  return j;
}

SceneConfig scene_config_from(const json& j, const std::string& ctx) {
  if (!j.is_object()) {
    throw ParseError(ctx + ": expected an object");
  }
  SceneConfig cfg;  // absent fields keep their defaults
  if (has(j, "seed")) {
    const json& seed = j.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      throw ParseError(ctx + ".seed: expected a non-negative integer");
    }
    cfg.seed = seed.get<std::uint64_t>();
  }
  if (has(j, "n_points")) cfg.n_points = as_int(j.at("n_points"), ctx + ".n_points");
  if (has(j, "annulus")) {
    const json& a = j.at("annulus");
    const std::string actx = ctx + ".annulus";
    if (has(a, "a_mm")) cfg.annulus.a_mm = as_number(a.at("a_mm"), actx + ".a_mm");
    if (has(a, "b_mm")) cfg.annulus.b_mm = as_number(a.at("b_mm"), actx + ".b_mm");
    if (has(a, "h_mm")) cfg.annulus.h_mm = as_number(a.at("h_mm"), actx + ".h_mm");
  }
  if (has(j, "rig")) cfg.rig = rig_from(j.at("rig"), ctx + ".rig");
  if (has(j, "n_handeye_frames")) {
    cfg.n_handeye_frames = as_int(j.at("n_handeye_frames"), ctx + ".n_handeye_frames");
  }
  if (has(j, "n_handeye_points")) {
    cfg.n_handeye_points = as_int(j.at("n_handeye_points"), ctx + ".n_handeye_points");
  }
  if (has(j, "n_annulus_frames")) {
    cfg.n_annulus_frames = as_int(j.at("n_annulus_frames"), ctx + ".n_annulus_frames");
  }
  if (has(j, "n_pivot_poses")) {
    cfg.n_pivot_poses = as_int(j.at("n_pivot_poses"), ctx + ".n_pivot_poses");
  }
  if (has(j, "noise")) {
    const json& n = j.at("noise");
    const std::string nctx = ctx + ".noise";
    if (has(n, "px_sigma")) cfg.noise.px_sigma = as_number(n.at("px_sigma"), nctx + ".px_sigma");
    if (has(n, "marker_t_sigma")) {
      cfg.noise.marker_t_sigma = as_number(n.at("marker_t_sigma"), nctx + ".marker_t_sigma");
    }
    if (has(n, "marker_r_sigma_deg")) {
      cfg.noise.marker_r_sigma_deg =
          as_number(n.at("marker_r_sigma_deg"), nctx + ".marker_r_sigma_deg");
    }
  }
  return cfg;
}

// ---- report cells --------------------------------------------------------

json cell_json(const ReportCell& cell) {
  json j;
  j["name"] = cell.name;
  j["missing"] = cell.missing;
  j["note"] = cell.note;
  j["excluded_a"] = cell.excluded_a;
  j["excluded_b"] = cell.excluded_b;
  j["skipped_pairs"] = cell.skipped_pairs;
  if (cell.stats.has_value()) {
    json s;
    s["mean"] = cell.stats->mean;
    s["std"] = cell.stats->stddev;
    s["n"] = cell.stats->n;
    s["unit"] = cell.stats->unit;
    s["samples"] = cell.stats->samples;
    j["stats"] = std::move(s);
  } else {
    j["stats"] = nullptr;
  }
  return j;
}

ReportCell cell_from(const json& j, const std::string& ctx) {
  ReportCell cell;
  cell.name = as_string(member(j, "name", ctx), ctx + ".name");
  const json& missing = member(j, "missing", ctx);
  if (!missing.is_boolean()) {
    throw ParseError(ctx + ".missing: expected a boolean");
  }
  cell.missing = missing.get<bool>();
  cell.note = as_string(member(j, "note", ctx), ctx + ".note");
  cell.excluded_a = int_field(j, "excluded_a", ctx);
  cell.excluded_b = int_field(j, "excluded_b", ctx);
  cell.skipped_pairs = int_field(j, "skipped_pairs", ctx);
  const json& stats = member(j, "stats", ctx);
  if (!stats.is_null()) {
    ErrorStats s;
    s.mean = number_field(stats, "mean", ctx + ".stats");
    s.stddev = number_field(stats, "std", ctx + ".stats");
    s.n = int_field(stats, "n", ctx + ".stats");
    s.unit = as_string(member(stats, "unit", ctx + ".stats"), ctx + ".stats.unit");
    const json& samples = as_array(member(stats, "samples", ctx + ".stats"), 0,
                                   ctx + ".stats.samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      s.samples.push_back(
          as_number(samples[i], ctx + ".stats.samples[" + std::to_string(i) + "]"));
    }
    cell.stats = std::move(s);
  }
  return cell;
}

json frame_poses_json(const FramePoses& fp) {
  json j;
  j["frame_id"] = fp.frame_id;
  j["camera_pose"] = pose_json(fp.camera_pose);
  j["marker_pose"] = pose_json(fp.marker_pose);
  return j;
}

FramePoses frame_poses_from(const json& j, const std::string& ctx) {
  FramePoses fp;
  fp.frame_id = int_field(j, "frame_id", ctx);
  fp.camera_pose = pose_from(member(j, "camera_pose", ctx), ctx + ".camera_pose");
  fp.marker_pose = pose_from(member(j, "marker_pose", ctx), ctx + ".marker_pose");
  return fp;
}

}  // namespace

// ---- poses ---------------------------------------------------------------

std::vector<RigidTransform> load_poses(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const json& arr = as_array(root, 0, path.string());
  std::vector<RigidTransform> poses;
  poses.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    poses.push_back(pose_from(arr[i], path.string() + "[" + std::to_string(i) + "]"));
  }
  return poses;
}

void save_poses(const std::filesystem::path& path, std::span<const RigidTransform> poses) {
  json arr = json::array();
  for (const RigidTransform& t : poses) {
    arr.push_back(pose_json(t));
  }
  dump_file(path, arr);
}

std::vector<FramePose> load_frame_poses(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const json& arr = as_array(root, 0, path.string());
  std::vector<FramePose> poses;
  std::set<int> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    FramePose fp;
    fp.frame_id = int_field(arr[i], "frame_id", ctx);
    fp.pose = pose_from(member(arr[i], "pose", ctx), ctx + ".pose");
    if (!seen.insert(fp.frame_id).second) {
      throw ParseError(ctx + ": duplicate frame_id " + std::to_string(fp.frame_id));
    }
    poses.push_back(std::move(fp));
  }
  return poses;
}

void save_frame_poses(const std::filesystem::path& path, std::span<const FramePose> poses) {
  json arr = json::array();
  for (const FramePose& fp : poses) {
    json j;
    j["frame_id"] = fp.frame_id;
    j["pose"] = pose_json(fp.pose);
    arr.push_back(std::move(j));
  }
  dump_file(path, arr);
}

// ---- cameras -------------------------------------------------------------

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  const json root = parse_file(path);
  if (has(root, "left")) {
    return intrinsics_from(member(root, "left", path.string()), path.string() + ".left");
  }
  return intrinsics_from(root, path.string());
}

StereoRig load_rig(const std::filesystem::path& path) {
  return rig_from(parse_file(path), path.string());
}

void save_rig(const std::filesystem::path& path, const StereoRig& rig) {
  dump_file(path, rig_json(rig));
}

// ---- calibration ---------------------------------------------------------

std::vector<HandEyeFrame> load_handeye_session(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const json& arr = as_array(root, 0, path.string());
  std::vector<HandEyeFrame> session;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    HandEyeFrame frame;
    frame.marker_pose = pose_from(member(arr[i], "marker_pose", ctx), ctx + ".marker_pose");
    const json& corrs = as_array(member(arr[i], "correspondences", ctx), 0,
                                 ctx + ".correspondences");
    std::set<int> ids;
    for (std::size_t k = 0; k < corrs.size(); ++k) {
      const std::string kctx = ctx + ".correspondences[" + std::to_string(k) + "]";
      Correspondence2D3D c;
      c.id = int_field(corrs[k], "id", kctx);
      c.image_px = as_vec2(member(corrs[k], "image_px", kctx), kctx + ".image_px");
      c.world_mm = as_vec3(member(corrs[k], "world_mm", kctx), kctx + ".world_mm");
      if (!ids.insert(c.id).second) {
        throw ParseError(kctx + ": duplicate correspondence id " + std::to_string(c.id));
      }
      frame.correspondences.push_back(std::move(c));
    }
    session.push_back(std::move(frame));
  }
  return session;
}

void save_handeye_session(const std::filesystem::path& path,
                          std::span<const HandEyeFrame> session) {
  json arr = json::array();
  for (const HandEyeFrame& frame : session) {
    json corrs = json::array();
    for (const Correspondence2D3D& c : frame.correspondences) {
      json j;
      j["id"] = c.id;
      j["image_px"] = vec2_json(c.image_px);
      j["world_mm"] = vec3_json(c.world_mm);
      corrs.push_back(std::move(j));
    }
    json j;
    j["marker_pose"] = pose_json(frame.marker_pose);
    j["correspondences"] = std::move(corrs);
    arr.push_back(std::move(j));
  }
  dump_file(path, arr);
}

PivotResult load_pivot_result(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const std::string ctx = path.string();
  PivotResult result;
  result.tip_offset = as_vec3(member(root, "tip_offset", ctx), ctx + ".tip_offset");
  result.pivot_point = as_vec3(member(root, "pivot_point", ctx), ctx + ".pivot_point");
  result.rms_3d = number_field(root, "rms_3d", ctx);
  result.mean_error = number_field(root, "mean_error", ctx);
  result.max_error = number_field(root, "max_error", ctx);
  result.major_angle_deg = number_field(root, "major_angle", ctx);
  result.minor_angle_deg = number_field(root, "minor_angle", ctx);
  result.n_poses = int_field(root, "n_poses", ctx);
  return result;
}

void save_pivot_result(const std::filesystem::path& path, const PivotResult& result) {
  json j;
  j["tip_offset"] = vec3_json(result.tip_offset);
  j["pivot_point"] = vec3_json(result.pivot_point);
  j["rms_3d"] = result.rms_3d;
  j["mean_error"] = result.mean_error;
  j["max_error"] = result.max_error;
  j["major_angle"] = result.major_angle_deg;
  j["minor_angle"] = result.minor_angle_deg;
  j["n_poses"] = result.n_poses;
  dump_file(path, j);
}

HandEyeResult load_handeye_result(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const std::string ctx = path.string();
  HandEyeResult result;
  result.marker_to_camera = pose_from(member(root, "d_rc", ctx), ctx + ".d_rc");
  result.selected_frame = int_field(root, "selected_frame", ctx);
  const json& rms = as_array(member(root, "per_frame_reproj_rms", ctx), 0,
                             ctx + ".per_frame_reproj_rms");
  for (std::size_t i = 0; i < rms.size(); ++i) {
    result.per_frame_reproj_rms_px.push_back(
        as_number_or_nan(rms[i], ctx + ".per_frame_reproj_rms[" + std::to_string(i) + "]"));
  }
  result.mean_reproj_px = number_field(root, "mean_reproj", ctx);
  result.std_reproj_px = number_field(root, "std_reproj", ctx);
  return result;
}

void save_handeye_result(const std::filesystem::path& path, const HandEyeResult& result) {
  json j;
  j["d_rc"] = pose_json(result.marker_to_camera);
  j["selected_frame"] = result.selected_frame;
  j["per_frame_reproj_rms"] = result.per_frame_reproj_rms_px;  // NaN dumps as null
  j["mean_reproj"] = result.mean_reproj_px;
  j["std_reproj"] = result.std_reproj_px;
  dump_file(path, j);
}

// ---- stereo --------------------------------------------------------------

std::vector<FrameDetections> load_detections(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const json& arr = as_array(root, 0, path.string());
  std::vector<FrameDetections> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    FrameDetections fd;
    fd.frame_id = int_field(arr[i], "frame_id", ctx);
    try {
      fd.side = side_from_string(as_string(member(arr[i], "side", ctx), ctx + ".side"));
      fd.source =
          source_from_string(as_string(member(arr[i], "source", ctx), ctx + ".source"));
    } catch (const Error& e) {
      throw ParseError(ctx + ": " + e.what());
    }
    const json& points = as_array(member(arr[i], "points", ctx), 0, ctx + ".points");
    std::set<int> ids;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const std::string kctx = ctx + ".points[" + std::to_string(k) + "]";
      Detection d;
      if (has(points[k], "id") && !points[k].at("id").is_null()) {
        d.id = as_int(points[k].at("id"), kctx + ".id");
        if (!ids.insert(*d.id).second) {
          throw ParseError(kctx + ": duplicate id " + std::to_string(*d.id));
        }
      }
      d.px = as_vec2(member(points[k], "px", kctx), kctx + ".px");
      fd.points.push_back(std::move(d));
    }
    out.push_back(std::move(fd));
  }
  return out;
}

void save_detections(const std::filesystem::path& path,
                     std::span<const FrameDetections> detections) {
  json arr = json::array();
  for (const FrameDetections& fd : detections) {
    json points = json::array();
    for (const Detection& d : fd.points) {
      json j;
      if (d.id.has_value()) {
        j["id"] = *d.id;
      }
      j["px"] = vec2_json(d.px);
      points.push_back(std::move(j));
    }
    json j;
    j["frame_id"] = fd.frame_id;
    j["side"] = to_string(fd.side);
    j["source"] = to_string(fd.source);
    j["points"] = std::move(points);
    arr.push_back(std::move(j));
  }
  dump_file(path, arr);
}

std::vector<FrameMatches> load_matches(const std::filesystem::path& path,
                                       PointSource source) {
  const json root = parse_file(path);
  const json& arr = as_array(root, 0, path.string());
  std::vector<FrameMatches> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    FrameMatches fm;
    fm.frame_id = int_field(arr[i], "frame_id", ctx);
    const json& matches = as_array(member(arr[i], "matches", ctx), 0, ctx + ".matches");
    std::set<int> ids;
    for (std::size_t k = 0; k < matches.size(); ++k) {
      const std::string kctx = ctx + ".matches[" + std::to_string(k) + "]";
      PointMatch m;
      m.id = int_field(matches[k], "id", kctx);
      m.left_px = as_vec2(member(matches[k], "left_px", kctx), kctx + ".left_px");
      m.right_px = as_vec2(member(matches[k], "right_px", kctx), kctx + ".right_px");
      m.source = source;
      if (!ids.insert(m.id).second) {
        throw ParseError(kctx + ": duplicate id " + std::to_string(m.id));
      }
      fm.matches.push_back(std::move(m));
    }
    out.push_back(std::move(fm));
  }
  return out;
}

void save_matches(const std::filesystem::path& path, std::span<const FrameMatches> matches) {
  json arr = json::array();
  for (const FrameMatches& fm : matches) {
    json list = json::array();
    for (const PointMatch& m : fm.matches) {
      json j;
      j["id"] = m.id;
      j["left_px"] = vec2_json(m.left_px);
      j["right_px"] = vec2_json(m.right_px);
      list.push_back(std::move(j));
    }
    json j;
    j["frame_id"] = fm.frame_id;
    j["matches"] = std::move(list);
    arr.push_back(std::move(j));
  }
  dump_file(path, arr);
}

std::vector<FrameTriangulation> load_triangulation(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const json& arr = as_array(root, 0, path.string());
  std::vector<FrameTriangulation> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    FrameTriangulation ft;
    ft.frame_id = int_field(arr[i], "frame_id", ctx);
    const json& points = as_array(member(arr[i], "points", ctx), 0, ctx + ".points");
    std::set<int> ids;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const std::string kctx = ctx + ".points[" + std::to_string(k) + "]";
      TriangulatedPoint p;
      p.id = int_field(points[k], "id", kctx);
      p.camera_left_mm =
          as_vec3(member(points[k], "camera_left_mm", kctx), kctx + ".camera_left_mm");
      p.reproj_residual_px = number_field(points[k], "reproj_residual_px", kctx);
      if (!ids.insert(p.id).second) {
        throw ParseError(kctx + ": duplicate id " + std::to_string(p.id));
      }
      ft.points.push_back(std::move(p));
    }
    out.push_back(std::move(ft));
  }
  return out;
}

void save_triangulation(const std::filesystem::path& path,
                        std::span<const FrameTriangulation> frames) {
  json arr = json::array();
  for (const FrameTriangulation& ft : frames) {
    json points = json::array();
    for (const TriangulatedPoint& p : ft.points) {
      json j;
      j["id"] = p.id;
      j["camera_left_mm"] = vec3_json(p.camera_left_mm);
      j["reproj_residual_px"] = p.reproj_residual_px;
      points.push_back(std::move(j));
    }
    json j;
    j["frame_id"] = ft.frame_id;
    j["points"] = std::move(points);
    arr.push_back(std::move(j));
  }
  dump_file(path, arr);
}

// ---- evaluation ----------------------------------------------------------

std::vector<CaliperDistance> load_caliper(const std::filesystem::path& path) {
  return caliper_from(parse_file(path), path.string());
}

void save_caliper(const std::filesystem::path& path,
                  std::span<const CaliperDistance> caliper) {
  dump_file(path, caliper_json(caliper));
}

std::vector<IdPoint3> load_measurements(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const json& arr = as_array(root, 0, path.string());
  std::vector<IdPoint3> out;
  std::set<int> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = path.string() + "[" + std::to_string(i) + "]";
    IdPoint3 p;
    p.id = int_field(arr[i], "id", ctx);
    p.mm = as_vec3(member(arr[i], "world_mm", ctx), ctx + ".world_mm");
    if (!ids.insert(p.id).second) {
      throw ParseError(ctx + ": duplicate id " + std::to_string(p.id));
    }
    out.push_back(std::move(p));
  }
  return out;
}

void save_measurements(const std::filesystem::path& path,
                       std::span<const IdPoint3> measurements) {
  json arr = json::array();
  for (const IdPoint3& p : measurements) {
    json j;
    j["id"] = p.id;
    j["world_mm"] = vec3_json(p.mm);
    arr.push_back(std::move(j));
  }
  dump_file(path, arr);
}

EvaluationReport load_report(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const std::string ctx = path.string();
  EvaluationReport report;
  report.dataset = as_string(member(root, "dataset", ctx), ctx + ".dataset");
  const auto load_cells = [&](const char* key) {
    const json& arr = as_array(member(root, key, ctx), 0, ctx + "." + key);
    std::vector<ReportCell> cells;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cells.push_back(cell_from(arr[i], ctx + "." + key + "[" + std::to_string(i) + "]"));
    }
    return cells;
  };
  report.table_2d = load_cells("table_2d");
  report.table_3d = load_cells("table_3d");
  report.caliper = load_cells("caliper");
  return report;
}

void save_report(const std::filesystem::path& path, const EvaluationReport& report) {
  json j;
  j["dataset"] = report.dataset;
  j["std_convention"] = "population";
  const auto dump_cells = [](const std::vector<ReportCell>& cells) {
    json arr = json::array();
    for (const ReportCell& cell : cells) {
      arr.push_back(cell_json(cell));
    }
    return arr;
  };
  j["table_2d"] = dump_cells(report.table_2d);
  j["table_3d"] = dump_cells(report.table_3d);
  j["caliper"] = dump_cells(report.caliper);
  dump_file(path, j);
}

// ---- scenes --------------------------------------------------------------

SceneConfig load_scene_config(const std::filesystem::path& path) {
  return scene_config_from(parse_file(path), path.string());
}

void save_scene_config(const std::filesystem::path& path, const SceneConfig& config) {
  dump_file(path, scene_config_json(config));
}

TruthFile load_truth(const std::filesystem::path& path) {
  const json root = parse_file(path);
  const std::string ctx = path.string();
  TruthFile tf;
  tf.config = scene_config_from(member(root, "config", ctx), ctx + ".config");
  SceneTruth& t = tf.truth;
  const auto load_points = [&](const char* key) {
    const json& arr = as_array(member(root, key, ctx), 0, ctx + "." + key);
    std::vector<Vec3> points;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      points.push_back(as_vec3(arr[i], ctx + "." + key + "[" + std::to_string(i) + "]"));
    }
    return points;
  };
  t.annulus_world = load_points("annulus_world");
  t.board_world = load_points("board_world");
  t.tip_offset_marker = as_vec3(member(root, "tip_offset_marker", ctx),
                                ctx + ".tip_offset_marker");
  t.pivot_point_world = as_vec3(member(root, "pivot_point_world", ctx),
                                ctx + ".pivot_point_world");
  t.hand_eye = pose_from(member(root, "hand_eye", ctx), ctx + ".hand_eye");
  const auto load_frames = [&](const char* key) {
    const json& arr = as_array(member(root, key, ctx), 0, ctx + "." + key);
    std::vector<FramePoses> frames;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      frames.push_back(
          frame_poses_from(arr[i], ctx + "." + key + "[" + std::to_string(i) + "]"));
    }
    return frames;
  };
  t.handeye_frames = load_frames("handeye_frames");
  t.annulus_frames = load_frames("annulus_frames");
  t.caliper = caliper_from(member(root, "caliper", ctx), ctx + ".caliper");
  return tf;
}

void save_truth(const std::filesystem::path& path, const SceneConfig& config,
                const SceneTruth& truth) {
  json j;
  j["config"] = scene_config_json(config);
  const auto points_json = [](const std::vector<Vec3>& points) {
    json arr = json::array();
    for (const Vec3& p : points) {
      arr.push_back(vec3_json(p));
    }
    return arr;
  };
  j["annulus_world"] = points_json(truth.annulus_world);
  j["board_world"] = points_json(truth.board_world);
  j["tip_offset_marker"] = vec3_json(truth.tip_offset_marker);
  j["pivot_point_world"] = vec3_json(truth.pivot_point_world);
  j["hand_eye"] = pose_json(truth.hand_eye);
  const auto frames_json = [](const std::vector<FramePoses>& frames) {
    json arr = json::array();
    for (const FramePoses& fp : frames) {
      arr.push_back(frame_poses_json(fp));
    }
    return arr;
  };
  j["handeye_frames"] = frames_json(truth.handeye_frames);
  j["annulus_frames"] = frames_json(truth.annulus_frames);
  j["caliper"] = caliper_json(truth.caliper);
  dump_file(path, j);
}

// ---- run manifest --------------------------------------------------------

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  json j;
  j["command"] = manifest.command;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  if (manifest.seed.has_value()) {
    j["seed"] = *manifest.seed;
  }
  j["tool_version"] = manifest.tool_version;
  j["wall_time_s"] = manifest.wall_time_s;
  dump_file(path, j);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ParseError(path.string() + ": cannot open for writing");
  }
  out << content;
  if (!out) {
    throw ParseError(path.string() + ": write failed");
  }
}

}  // namespace depthcal::io
