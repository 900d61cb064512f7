#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depthcal/camera.hpp"
#include "depthcal/evaluation.hpp"
#include "depthcal/hand_eye.hpp"
#include "depthcal/pivot.hpp"
#include "depthcal/rigid_transform.hpp"
#include "depthcal/scene.hpp"
#include "depthcal/stereo.hpp"

/// File-backed interchange. Every loader validates shape and invariants and
/// throws ParseError naming the file and offending field; every saver writes
/// deterministic, byte-stable JSON (two-space indent, sorted keys) so reruns
/// are byte-identical. NaN round-trips as null.
namespace depthcal::io {

// ---- poses ---------------------------------------------------------------

std::vector<RigidTransform> load_poses(const std::filesystem::path& path);
void save_poses(const std::filesystem::path& path, std::span<const RigidTransform> poses);

struct FramePose {
  int frame_id = 0;
  RigidTransform pose;
};

std::vector<FramePose> load_frame_poses(const std::filesystem::path& path);
void save_frame_poses(const std::filesystem::path& path, std::span<const FramePose> poses);

// ---- cameras -------------------------------------------------------------

/// Accepts a plain intrinsics record or a full rig file (takes the left
/// camera).
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
StereoRig load_rig(const std::filesystem::path& path);
void save_rig(const std::filesystem::path& path, const StereoRig& rig);

// ---- calibration ---------------------------------------------------------

std::vector<HandEyeFrame> load_handeye_session(const std::filesystem::path& path);
void save_handeye_session(const std::filesystem::path& path,
                          std::span<const HandEyeFrame> session);

PivotResult load_pivot_result(const std::filesystem::path& path);
void save_pivot_result(const std::filesystem::path& path, const PivotResult& result);

HandEyeResult load_handeye_result(const std::filesystem::path& path);
void save_handeye_result(const std::filesystem::path& path, const HandEyeResult& result);

// ---- stereo --------------------------------------------------------------

std::vector<FrameDetections> load_detections(const std::filesystem::path& path);
void save_detections(const std::filesystem::path& path,
                     std::span<const FrameDetections> detections);

struct FrameMatches {
  int frame_id = 0;
  std::vector<PointMatch> matches;
};

/// The match file carries no provenance; the caller states which source the
/// file holds.
std::vector<FrameMatches> load_matches(const std::filesystem::path& path,
                                       PointSource source);
void save_matches(const std::filesystem::path& path, std::span<const FrameMatches> matches);

struct FrameTriangulation {
  int frame_id = 0;
  std::vector<TriangulatedPoint> points;
};

std::vector<FrameTriangulation> load_triangulation(const std::filesystem::path& path);
void save_triangulation(const std::filesystem::path& path,
                        std::span<const FrameTriangulation> frames);

// ---- evaluation ----------------------------------------------------------

std::vector<CaliperDistance> load_caliper(const std::filesystem::path& path);
void save_caliper(const std::filesystem::path& path,
                  std::span<const CaliperDistance> caliper);

std::vector<IdPoint3> load_measurements(const std::filesystem::path& path);
void save_measurements(const std::filesystem::path& path,
                       std::span<const IdPoint3> measurements);

EvaluationReport load_report(const std::filesystem::path& path);
void save_report(const std::filesystem::path& path, const EvaluationReport& report);

// ---- scenes --------------------------------------------------------------

SceneConfig load_scene_config(const std::filesystem::path& path);
void save_scene_config(const std::filesystem::path& path, const SceneConfig& config);

/// Ground truth of a generated scene together with the generating config.
struct TruthFile {
  SceneConfig config;
  SceneTruth truth;
};

TruthFile load_truth(const std::filesystem::path& path);
void save_truth(const std::filesystem::path& path, const SceneConfig& config,
                const SceneTruth& truth);

// ---- run manifest --------------------------------------------------------

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::string tool_version;
  double wall_time_s = 0.0;
};

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Plain text, written atomically enough for our purposes (truncate +
/// write); used for the text table next to the JSON report.
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace depthcal::io
