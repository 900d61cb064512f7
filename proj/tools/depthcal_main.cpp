// Command-line front end: simulate / pivot / handeye / triangulate / evaluate.
//
// Diagnostics go to stderr, data goes to files.  Every successful run writes a
// RunManifest next to its outputs; apart from the manifest's wall time, reruns
// of the same command produce byte-identical files.
//
// Exit codes: 0 success, 2 input validation, 3 numeric or degenerate failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depthcal/errors.hpp"
#include "depthcal/evaluation.hpp"
#include "depthcal/hand_eye.hpp"
#include "depthcal/io.hpp"
#include "depthcal/pivot.hpp"
#include "depthcal/scene.hpp"
#include "depthcal/stereo.hpp"

namespace {

namespace fs = std::filesystem;
using namespace depthcal;

constexpr const char* kToolVersion = "0.1.0";

class WallClock {
 public:
  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Manifest for a command whose outputs are standalone files: lives next to
/// the primary output as `<stem>.manifest.json`.
fs::path manifest_path_for(const fs::path& out) {
  return out.parent_path() / (out.stem().string() + ".manifest.json");
}

void write_manifest(const fs::path& path, const std::string& command,
                    std::vector<std::string> inputs, std::vector<std::string> outputs,
                    std::optional<std::uint64_t> seed, const WallClock& clock) {
  io::RunManifest manifest;
  manifest.command = command;
  manifest.inputs = std::move(inputs);
  manifest.outputs = std::move(outputs);
  manifest.seed = seed;
  manifest.tool_version = kToolVersion;
  manifest.wall_time_s = clock.elapsed_s();
  io::save_manifest(path, manifest);
}

void ensure_parent_dir(const fs::path& out) {
  const fs::path parent = out.parent_path();
  if (!parent.empty()) {
    fs::create_directories(parent);
  }
}

// ---- simulate ------------------------------------------------------------

struct SimulateOpts {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void run_simulate(const SimulateOpts& opt) {
  const WallClock clock;
  SceneConfig config = opt.config.empty() ? SceneConfig{} : io::load_scene_config(opt.config);
  if (opt.seed_given) {
    config.seed = opt.seed;
  }
  config.validate();
  const SyntheticScene scene = generate_scene(config);

  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  std::vector<std::string> outputs;
  const auto emit = [&](const char* name, const auto& save) {
    const fs::path path = out / name;
    save(path);
    outputs.push_back(path.string());
  };

  emit("rig.json", [&](const fs::path& p) { io::save_rig(p, scene.rig); });
  emit("pivot_poses.json", [&](const fs::path& p) { io::save_poses(p, scene.pivot_poses); });
  emit("handeye_session.json",
       [&](const fs::path& p) { io::save_handeye_session(p, scene.handeye_session); });
  emit("detections_gt_left.json",
       [&](const fs::path& p) { io::save_detections(p, scene.detections_gt_left); });
  emit("detections_gt_right.json",
       [&](const fs::path& p) { io::save_detections(p, scene.detections_gt_right); });
  emit("detections_model_left.json",
       [&](const fs::path& p) { io::save_detections(p, scene.detections_model_left); });
  emit("detections_model_right.json",
       [&](const fs::path& p) { io::save_detections(p, scene.detections_model_right); });

  std::vector<io::FramePose> marker_poses;
  for (std::size_t i = 0; i < scene.marker_poses.size(); ++i) {
    marker_poses.push_back({scene.truth.annulus_frames[i].frame_id, scene.marker_poses[i]});
  }
  emit("marker_poses.json",
       [&](const fs::path& p) { io::save_frame_poses(p, marker_poses); });
  emit("measurements.json",
       [&](const fs::path& p) { io::save_measurements(p, scene.measurements); });
  emit("caliper.json", [&](const fs::path& p) { io::save_caliper(p, scene.truth.caliper); });
  emit("truth.json", [&](const fs::path& p) { io::save_truth(p, config, scene.truth); });

  std::vector<std::string> inputs;
  if (!opt.config.empty()) {
    inputs.push_back(opt.config);
  }
  write_manifest(out / "manifest.json", "simulate", std::move(inputs), std::move(outputs),
                 config.seed, clock);
  std::cerr << "simulate: seed " << config.seed << ", wrote " << opt.out_dir << "\n";
}

// ---- pivot ---------------------------------------------------------------

struct PivotOpts {
  std::string poses;
  std::string out;
};

void run_pivot(const PivotOpts& opt) {
  const WallClock clock;
  const std::vector<RigidTransform> poses = io::load_poses(opt.poses);
  const PivotResult result = pivot_calibrate(poses);
  ensure_parent_dir(opt.out);
  io::save_pivot_result(opt.out, result);
  write_manifest(manifest_path_for(opt.out), "pivot", {opt.poses}, {opt.out}, std::nullopt,
                 clock);
  std::cerr << "pivot: " << result.n_poses << " poses, rms_3d " << result.rms_3d << " mm\n";
}

// ---- handeye -------------------------------------------------------------

struct HandEyeOpts {
  std::string session;
  std::string intrinsics;
  std::string out;
  int threads = 1;
};

void run_handeye(const HandEyeOpts& opt) {
  const WallClock clock;
  const std::vector<HandEyeFrame> session = io::load_handeye_session(opt.session);
  const CameraIntrinsics intrinsics = io::load_intrinsics(opt.intrinsics);
  const HandEyeResult result = hand_eye_calibrate(session, intrinsics, opt.threads);
  for (std::size_t i = 0; i < result.frame_errors.size(); ++i) {
    if (!result.frame_errors[i].empty()) {
      std::cerr << "handeye: frame " << i << " not usable: " << result.frame_errors[i]
                << "\n";
    }
  }
  ensure_parent_dir(opt.out);
  io::save_handeye_result(opt.out, result);
  write_manifest(manifest_path_for(opt.out), "handeye", {opt.session, opt.intrinsics},
                 {opt.out}, std::nullopt, clock);
  std::cerr << "handeye: selected frame " << result.selected_frame << ", mean reproj "
            << result.mean_reproj_px << " px\n";
}

// ---- triangulate ---------------------------------------------------------

struct TriangulateOpts {
  std::string left, right;
  std::string gt_left, gt_right;
  std::string rig;
  std::string out;
  std::string matches_out;
  double tp_radius_px = 6.0;
  int threads = 1;
};

using DetectionsByFrame = std::map<int, const FrameDetections*>;

DetectionsByFrame index_detections(const std::vector<FrameDetections>& detections,
                                   const std::string& path) {
  DetectionsByFrame by_frame;
  for (const FrameDetections& fd : detections) {
    if (!by_frame.emplace(fd.frame_id, &fd).second) {
      throw ParseError(path + ": duplicate frame_id " + std::to_string(fd.frame_id));
    }
  }
  return by_frame;
}

/// Labeled pixel set for one side of one frame.  Ground-truth detections carry
/// ids already; model detections are assigned ids by the true-positive filter
/// against the same side's ground truth.
std::vector<IdPoint> labeled_side(const FrameDetections& fd, const DetectionsByFrame& gt,
                                  const char* gt_flag, double tp_radius_px) {
  if (fd.source == PointSource::ground_truth) {
    return labeled_points(fd);
  }
  const auto it = gt.find(fd.frame_id);
  if (it == gt.end()) {
    throw ParseError("frame " + std::to_string(fd.frame_id) +
                     ": model detections require ground truth for the same frame via " +
                     gt_flag);
  }
  const std::vector<IdPoint> gt_points = labeled_points(*it->second);
  const std::vector<Vec2> predictions = prediction_pixels(fd);
  const TruePositiveResult tp = match_true_positives(predictions, gt_points, tp_radius_px);
  return matched_points(tp);
}

void run_triangulate(const TriangulateOpts& opt) {
  const WallClock clock;
  const StereoRig rig = io::load_rig(opt.rig);
  const std::vector<FrameDetections> left = io::load_detections(opt.left);
  const std::vector<FrameDetections> right = io::load_detections(opt.right);
  const DetectionsByFrame left_by_frame = index_detections(left, opt.left);
  const DetectionsByFrame right_by_frame = index_detections(right, opt.right);

  std::vector<FrameDetections> gt_left_data, gt_right_data;
  DetectionsByFrame gt_left_by_frame, gt_right_by_frame;
  if (!opt.gt_left.empty()) {
    gt_left_data = io::load_detections(opt.gt_left);
    gt_left_by_frame = index_detections(gt_left_data, opt.gt_left);
  }
  if (!opt.gt_right.empty()) {
    gt_right_data = io::load_detections(opt.gt_right);
    gt_right_by_frame = index_detections(gt_right_data, opt.gt_right);
  }

  std::vector<io::FrameMatches> all_matches;
  std::vector<io::FrameTriangulation> all_frames;
  std::size_t n_matches = 0;
  std::size_t n_points = 0;
  for (const auto& [frame_id, left_fd] : left_by_frame) {
    const auto rit = right_by_frame.find(frame_id);
    if (rit == right_by_frame.end()) {
      std::cerr << "triangulate: frame " << frame_id << " has no right detections; skipped\n";
      continue;
    }
    const FrameDetections& right_fd = *rit->second;
    const std::vector<IdPoint> left_points =
        labeled_side(*left_fd, gt_left_by_frame, "--gt-left", opt.tp_radius_px);
    const std::vector<IdPoint> right_points =
        labeled_side(right_fd, gt_right_by_frame, "--gt-right", opt.tp_radius_px);
    const PointSource source =
        (left_fd->source == PointSource::model || right_fd.source == PointSource::model)
            ? PointSource::model
            : PointSource::ground_truth;
    std::vector<PointMatch> matches = stereo_correspond(left_points, right_points, source);
    n_matches += matches.size();

    io::FrameTriangulation frame;
    frame.frame_id = frame_id;
    for (const PointMatch& match : matches) {
      try {
        frame.points.push_back(triangulate(rig, match));
      } catch (const Error& e) {
        std::cerr << "triangulate: frame " << frame_id << " id " << match.id
                  << " dropped: " << e.what() << "\n";
      }
    }
    n_points += frame.points.size();
    all_matches.push_back({frame_id, std::move(matches)});
    all_frames.push_back(std::move(frame));
  }
  for (const auto& [frame_id, ignored] : right_by_frame) {
    if (!left_by_frame.count(frame_id)) {
      std::cerr << "triangulate: frame " << frame_id << " has no left detections; skipped\n";
    }
  }
  if (n_matches == 0) {
    throw EmptyIntersection("triangulate: no stereo matches in any frame");
  }

  std::vector<std::string> outputs{opt.out};
  ensure_parent_dir(opt.out);
  if (!opt.matches_out.empty()) {
    ensure_parent_dir(opt.matches_out);
    io::save_matches(opt.matches_out, all_matches);
    outputs.push_back(opt.matches_out);
  }
  io::save_triangulation(opt.out, all_frames);

  std::vector<std::string> inputs{opt.left, opt.right};
  if (!opt.gt_left.empty()) inputs.push_back(opt.gt_left);
  if (!opt.gt_right.empty()) inputs.push_back(opt.gt_right);
  inputs.push_back(opt.rig);
  write_manifest(manifest_path_for(opt.out), "triangulate", std::move(inputs),
                 std::move(outputs), std::nullopt, clock);
  std::cerr << "triangulate: " << n_points << " points from " << n_matches << " matches in "
            << all_frames.size() << " frames\n";
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateOpts {
  std::string dataset = "dataset";
  std::string rig, handeye, marker_poses, measurements;
  std::string matches_gt, matches_model;
  std::string tri_gt, tri_model;
  std::string caliper;
  std::string out, text_out;
  int threads = 1;
};

void append_matches(const std::string& path, PointSource source,
                    std::vector<Observation2d>& left, std::vector<Observation2d>& right) {
  for (const io::FrameMatches& fm : io::load_matches(path, source)) {
    for (const PointMatch& m : fm.matches) {
      left.push_back({fm.frame_id, m.id, m.left_px});
      right.push_back({fm.frame_id, m.id, m.right_px});
    }
  }
}

void append_triangulation(const std::string& path, std::vector<Observation3d>& out) {
  for (const io::FrameTriangulation& ft : io::load_triangulation(path)) {
    for (const TriangulatedPoint& p : ft.points) {
      out.push_back({ft.frame_id, p.id, p.camera_left_mm, Frame::camera_left});
    }
  }
}

void run_evaluate(const EvaluateOpts& opt) {
  const WallClock clock;
  ReportInputs in;
  std::vector<std::string> inputs;
  const auto record = [&](const std::string& path) {
    inputs.push_back(path);
    return path;
  };

  if (!opt.matches_gt.empty()) {
    append_matches(record(opt.matches_gt), PointSource::ground_truth, in.gt_left, in.gt_right);
  }
  if (!opt.matches_model.empty()) {
    append_matches(record(opt.matches_model), PointSource::model, in.model_left,
                   in.model_right);
  }

  const bool reproj_ready = !opt.rig.empty() && !opt.handeye.empty() &&
                            !opt.marker_poses.empty() && !opt.measurements.empty();
  const bool reproj_partial = !opt.rig.empty() || !opt.handeye.empty() ||
                              !opt.marker_poses.empty() || !opt.measurements.empty();
  if (reproj_ready) {
    const StereoRig rig = io::load_rig(record(opt.rig));
    const HandEyeResult handeye = io::load_handeye_result(record(opt.handeye));
    const std::vector<io::FramePose> marker_poses =
        io::load_frame_poses(record(opt.marker_poses));
    const std::vector<IdPoint3> measurements = io::load_measurements(record(opt.measurements));
    // marker -> camera-right, for reprojection into the second view.
    const RigidTransform marker_to_right = rig.left_to_right * handeye.marker_to_camera;
    for (const io::FramePose& fp : marker_poses) {
      for (const IdPoint3& p : measurements) {
        try {
          const Vec2 left_px =
              reproject_measured(p.mm, handeye.marker_to_camera, fp.pose, rig.left);
          const Vec2 right_px = reproject_measured(p.mm, marker_to_right, fp.pose, rig.right);
          const Point3d in_camera =
              measured_point_in_camera(p.mm, handeye.marker_to_camera, fp.pose);
          in.reproj_left.push_back({fp.frame_id, p.id, left_px});
          in.reproj_right.push_back({fp.frame_id, p.id, right_px});
          in.depth_handeye.push_back({fp.frame_id, p.id, in_camera.mm, in_camera.frame});
        } catch (const Error& e) {
          std::cerr << "evaluate: frame " << fp.frame_id << " id " << p.id
                    << " not reprojectable: " << e.what() << "\n";
        }
      }
    }
  } else if (reproj_partial) {
    std::cerr << "evaluate: reprojection cells need --rig, --handeye, --marker-poses and "
                 "--measurements together; leaving them missing\n";
  }

  if (!opt.tri_gt.empty()) {
    append_triangulation(record(opt.tri_gt), in.depth_gt);
  }
  if (!opt.tri_model.empty()) {
    append_triangulation(record(opt.tri_model), in.depth_model);
  }
  if (!opt.caliper.empty()) {
    in.caliper = io::load_caliper(record(opt.caliper));
  }

  const EvaluationReport report = build_report(opt.dataset, in);
  ensure_parent_dir(opt.out);
  io::save_report(opt.out, report);
  std::vector<std::string> outputs{opt.out};
  if (!opt.text_out.empty()) {
    ensure_parent_dir(opt.text_out);
    io::write_text(opt.text_out, format_text_table(report));
    outputs.push_back(opt.text_out);
  }
  write_manifest(manifest_path_for(opt.out), "evaluate", std::move(inputs),
                 std::move(outputs), std::nullopt, clock);
  std::cerr << "evaluate: report for '" << opt.dataset << "' written to " << opt.out << "\n";
}

int exit_code_for(const Error& e) {
  // 2: the inputs themselves are unusable.  3: inputs parsed but the
  // computation is degenerate or failed numerically.
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FrameMismatch*>(&e) ||
      dynamic_cast<const TooFewPoses*>(&e) || dynamic_cast<const Unviewable*>(&e)) {
    return 2;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical-tracking vs stereo-endoscope depth measurement toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("depthcal ") + kToolVersion);

  SimulateOpts sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--config", sim.config, "Scene configuration JSON")
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out_dir, "Output directory")->required();
  CLI::Option* seed_opt =
      simulate->add_option("--seed", sim.seed, "Override the configured RNG seed");
  int sim_threads = 1;
  simulate->add_option("--threads", sim_threads, "Worker threads (generation is serial)")
      ->check(CLI::PositiveNumber);

  PivotOpts piv;
  CLI::App* pivot = app.add_subcommand("pivot", "Pivot-calibrate a tracked stylus");
  pivot->add_option("--poses", piv.poses, "Marker poses JSON")
      ->required()
      ->check(CLI::ExistingFile);
  pivot->add_option("--out", piv.out, "Result JSON")->required();
  int pivot_threads = 1;
  pivot->add_option("--threads", pivot_threads, "Worker threads (solve is serial)")
      ->check(CLI::PositiveNumber);

  HandEyeOpts he;
  CLI::App* handeye = app.add_subcommand("handeye", "Recover the marker-to-camera transform");
  handeye->add_option("--session", he.session, "Calibration session JSON")
      ->required()
      ->check(CLI::ExistingFile);
  handeye->add_option("--intrinsics", he.intrinsics, "Camera intrinsics or rig JSON")
      ->required()
      ->check(CLI::ExistingFile);
  handeye->add_option("--out", he.out, "Result JSON")->required();
  handeye->add_option("--threads", he.threads, "Worker threads for per-frame solves")
      ->check(CLI::PositiveNumber);

  TriangulateOpts tri;
  CLI::App* triangulate = app.add_subcommand("triangulate", "Match and triangulate detections");
  triangulate->add_option("--left", tri.left, "Left detections JSON")
      ->required()
      ->check(CLI::ExistingFile);
  triangulate->add_option("--right", tri.right, "Right detections JSON")
      ->required()
      ->check(CLI::ExistingFile);
  triangulate->add_option("--gt-left", tri.gt_left, "Left ground-truth detections JSON")
      ->check(CLI::ExistingFile);
  triangulate->add_option("--gt-right", tri.gt_right, "Right ground-truth detections JSON")
      ->check(CLI::ExistingFile);
  triangulate->add_option("--rig", tri.rig, "Stereo rig JSON")
      ->required()
      ->check(CLI::ExistingFile);
  triangulate->add_option("--out", tri.out, "Triangulation JSON")->required();
  triangulate->add_option("--matches-out", tri.matches_out, "Also write stereo matches JSON");
  triangulate
      ->add_option("--tp-radius", tri.tp_radius_px,
                   "True-positive match radius in pixels")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  triangulate->add_option("--threads", tri.threads, "Worker threads (per-frame loop is serial)")
      ->check(CLI::PositiveNumber);

  EvaluateOpts ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Build the comparison report");
  evaluate->add_option("--dataset", ev.dataset, "Dataset label for the report")
      ->capture_default_str();
  evaluate->add_option("--rig", ev.rig, "Stereo rig JSON")->check(CLI::ExistingFile);
  evaluate->add_option("--handeye", ev.handeye, "Hand-eye result JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--marker-poses", ev.marker_poses, "Per-frame marker poses JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--measurements", ev.measurements, "Measured 3D points JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--matches-gt", ev.matches_gt, "Ground-truth stereo matches JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--matches-model", ev.matches_model, "Model stereo matches JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--tri-gt", ev.tri_gt, "Ground-truth triangulation JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--tri-model", ev.tri_model, "Model triangulation JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--caliper", ev.caliper, "Caliper reference distances JSON")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", ev.out, "Report JSON")->required();
  evaluate->add_option("--text-out", ev.text_out, "Also write a plain-text table");
  evaluate->add_option("--threads", ev.threads, "Worker threads (evaluation is serial)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      sim.seed_given = seed_opt->count() > 0;
      run_simulate(sim);
    } else if (pivot->parsed()) {
      run_pivot(piv);
    } else if (handeye->parsed()) {
      run_handeye(he);
    } else if (triangulate->parsed()) {
      run_triangulate(tri);
    } else if (evaluate->parsed()) {
      run_evaluate(ev);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
