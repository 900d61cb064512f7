#include "depthcal/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "depthcal/errors.hpp"
#include "depthcal/evaluation.hpp"
#include "depthcal/scene.hpp"
#include "support/oracles.hpp"

namespace depthcal {
namespace {

namespace fs = std::filesystem;
using testing::random_rigid;
using testing::TestRng;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("depthcal_io_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name) const { return dir_ / name; }

  void write_raw(const std::string& name, const std::string& text) const {
    std::ofstream out(file(name));
    out << text;
  }

  std::string read_raw(const fs::path& path) const {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }

  fs::path dir_;
};

TEST_F(IoTest, PosesRoundTripBitExact) {
  TestRng rng(81);
  std::vector<RigidTransform> poses;
  for (int i = 0; i < 5; ++i) {
    poses.push_back(random_rigid(rng, 100.0).with_frames(Frame::marker, Frame::world));
  }
  poses.push_back(RigidTransform());  // untagged identity
  io::save_poses(file("poses.json"), poses);
  const std::vector<RigidTransform> loaded = io::load_poses(file("poses.json"));
  ASSERT_EQ(loaded.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_EQ(loaded[i].matrix(), poses[i].matrix());
    EXPECT_EQ(loaded[i].source(), poses[i].source());
    EXPECT_EQ(loaded[i].target(), poses[i].target());
  }
}

TEST_F(IoTest, PoseFrameStringVariants) {
  write_raw("single.json",
            R"([{"rotation":[1,0,0,0,1,0,0,0,1],"translation_mm":[0,0,0],"frame":"world"}])");
  const auto single = io::load_poses(file("single.json"));
  EXPECT_EQ(single[0].source(), Frame::unspecified);
  EXPECT_EQ(single[0].target(), Frame::world);

  write_raw("arrow.json",
            R"([{"rotation":[1,0,0,0,1,0,0,0,1],"translation_mm":[1,2,3],)"
            R"("frame":"world->camera-left","timestamp_s":12.5}])");
  const auto arrow = io::load_poses(file("arrow.json"));
  EXPECT_EQ(arrow[0].source(), Frame::world);
  EXPECT_EQ(arrow[0].target(), Frame::camera_left);

  write_raw("bad.json",
            R"([{"rotation":[1,0,0,0,1,0,0,0,1],"translation_mm":[0,0,0],"frame":"moon"}])");
  EXPECT_THROW(io::load_poses(file("bad.json")), ParseError);
}

TEST_F(IoTest, MalformedPoseReportsPathAndField) {
  write_raw("short.json", R"([{"rotation":[1,0,0],"translation_mm":[0,0,0]}])");
  try {
    io::load_poses(file("short.json"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("short.json"), std::string::npos);
    EXPECT_NE(msg.find("rotation"), std::string::npos);
  }
}

TEST_F(IoTest, MissingFileNamesThePath) {
  try {
    io::load_poses(file("absent.json"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("absent.json"), std::string::npos);
  }
}

TEST_F(IoTest, MalformedJsonNamesThePath) {
  write_raw("broken.json", "[{\"rotation\": ");
  try {
    io::load_poses(file("broken.json"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.json"), std::string::npos);
  }
}

TEST_F(IoTest, RigRoundTripAndIntrinsicsExtraction) {
  const StereoRig rig = SceneConfig::default_rig();
  io::save_rig(file("rig.json"), rig);
  const StereoRig loaded = io::load_rig(file("rig.json"));
  EXPECT_EQ(loaded.left.fx, rig.left.fx);
  EXPECT_EQ(loaded.right.k1, rig.right.k1);
  EXPECT_EQ(loaded.left_to_right.matrix(), rig.left_to_right.matrix());
  EXPECT_EQ(loaded.left_to_right.source(), Frame::camera_left);
  EXPECT_EQ(loaded.left_to_right.target(), Frame::camera_right);

  // A rig file doubles as an intrinsics file: the left camera is used.
  const CameraIntrinsics left = io::load_intrinsics(file("rig.json"));
  EXPECT_EQ(left.fx, rig.left.fx);
  EXPECT_EQ(left.cy, rig.left.cy);
}

TEST_F(IoTest, IntrinsicsValidateOnLoad) {
  write_raw("intr.json",
            R"({"fx":0,"fy":1000,"cx":500,"cy":500,"dist":[0,0,0,0,0],"image_size":[1000,1000]})");
  EXPECT_THROW(io::load_intrinsics(file("intr.json")), ParseError);
}

TEST_F(IoTest, DistCoefficientOrderIsKOneKTwoPOnePTwoKThree) {
  write_raw("intr.json",
            R"({"fx":1000,"fy":1000,"cx":500,"cy":500,)"
            R"("dist":[0.1,0.2,0.3,0.4,0.5],"image_size":[1000,1000]})");
  const CameraIntrinsics intr = io::load_intrinsics(file("intr.json"));
  EXPECT_EQ(intr.k1, 0.1);
  EXPECT_EQ(intr.k2, 0.2);
  EXPECT_EQ(intr.p1, 0.3);
  EXPECT_EQ(intr.p2, 0.4);
  EXPECT_EQ(intr.k3, 0.5);
}

TEST_F(IoTest, HandeyeSessionRoundTrip) {
  TestRng rng(82);
  std::vector<HandEyeFrame> session(2);
  for (HandEyeFrame& frame : session) {
    frame.marker_pose = random_rigid(rng, 50.0).with_frames(Frame::world, Frame::marker);
    for (int i = 0; i < 8; ++i) {
      frame.correspondences.push_back(
          {i, Vec2(rng.uniform(0, 1920), rng.uniform(0, 1080)),
           Vec3(rng.uniform(-20, 20), rng.uniform(-20, 20), 0.0)});
    }
  }
  io::save_handeye_session(file("session.json"), session);
  const auto loaded = io::load_handeye_session(file("session.json"));
  ASSERT_EQ(loaded.size(), 2u);
  ASSERT_EQ(loaded[0].correspondences.size(), 8u);
  EXPECT_EQ(loaded[0].marker_pose.matrix(), session[0].marker_pose.matrix());
  EXPECT_EQ(loaded[1].correspondences[3].image_px, session[1].correspondences[3].image_px);
  EXPECT_EQ(loaded[1].correspondences[3].world_mm, session[1].correspondences[3].world_mm);
}

TEST_F(IoTest, DuplicateCorrespondenceIdThrows) {
  write_raw("session.json", R"([{"marker_pose":{"rotation":[1,0,0,0,1,0,0,0,1],)"
                            R"("translation_mm":[0,0,0]},"correspondences":[)"
                            R"({"id":1,"image_px":[0,0],"world_mm":[0,0,0]},)"
                            R"({"id":1,"image_px":[1,1],"world_mm":[1,1,1]}]}])");
  EXPECT_THROW(io::load_handeye_session(file("session.json")), ParseError);
}

TEST_F(IoTest, PivotResultRecordHasExactlyTheReportedFields) {
  PivotResult result;
  result.tip_offset = Vec3(0, 0, -150);
  result.pivot_point = Vec3(20, -15, 40);
  result.rms_3d = 0.36;
  result.mean_error = 0.34;
  result.max_error = 0.48;
  result.major_angle_deg = 60.82;
  result.minor_angle_deg = 54.92;
  result.n_poses = 500;
  io::save_pivot_result(file("pivot.json"), result);

  const std::string text = read_raw(file("pivot.json"));
  for (const char* key : {"tip_offset", "pivot_point", "rms_3d", "mean_error", "max_error",
                          "major_angle", "minor_angle", "n_poses"}) {
    EXPECT_NE(text.find(std::string("\"") + key + "\""), std::string::npos) << key;
  }
  EXPECT_EQ(text.find("major_angle_deg"), std::string::npos);

  const PivotResult loaded = io::load_pivot_result(file("pivot.json"));
  EXPECT_EQ(loaded.tip_offset, result.tip_offset);
  EXPECT_EQ(loaded.major_angle_deg, result.major_angle_deg);
  EXPECT_EQ(loaded.n_poses, 500);
}

TEST_F(IoTest, HandeyeResultRoundTripWithNanAsNull) {
  HandEyeResult result;
  result.marker_to_camera =
      RigidTransform(Mat3::Identity(), Vec3(1, 2, 3), Frame::marker, Frame::camera_left);
  result.selected_frame = 1;
  result.per_frame_reproj_rms_px = {0.5, std::numeric_limits<double>::quiet_NaN(), 0.7};
  result.mean_reproj_px = 0.6;
  result.std_reproj_px = 0.1;
  io::save_handeye_result(file("he.json"), result);

  const std::string text = read_raw(file("he.json"));
  EXPECT_NE(text.find("null"), std::string::npos);
  EXPECT_NE(text.find("\"d_rc\""), std::string::npos);
  EXPECT_NE(text.find("\"per_frame_reproj_rms\""), std::string::npos);
  EXPECT_NE(text.find("\"mean_reproj\""), std::string::npos);

  const HandEyeResult loaded = io::load_handeye_result(file("he.json"));
  EXPECT_EQ(loaded.selected_frame, 1);
  ASSERT_EQ(loaded.per_frame_reproj_rms_px.size(), 3u);
  EXPECT_EQ(loaded.per_frame_reproj_rms_px[0], 0.5);
  EXPECT_TRUE(std::isnan(loaded.per_frame_reproj_rms_px[1]));
  EXPECT_EQ(loaded.per_frame_reproj_rms_px[2], 0.7);
  EXPECT_EQ(loaded.marker_to_camera.translation(), Vec3(1, 2, 3));
}

TEST_F(IoTest, DetectionsRoundTripWithOptionalIds) {
  std::vector<FrameDetections> detections(2);
  detections[0].frame_id = 0;
  detections[0].side = Side::left;
  detections[0].source = PointSource::ground_truth;
  detections[0].points = {{0, Vec2(10, 20)}, {1, Vec2(30, 40)}};
  detections[1].frame_id = 1;
  detections[1].side = Side::right;
  detections[1].source = PointSource::model;
  detections[1].points = {{std::nullopt, Vec2(50, 60)}};
  io::save_detections(file("det.json"), detections);

  const auto loaded = io::load_detections(file("det.json"));
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].side, Side::left);
  EXPECT_EQ(loaded[0].source, PointSource::ground_truth);
  ASSERT_TRUE(loaded[0].points[1].id.has_value());
  EXPECT_EQ(*loaded[0].points[1].id, 1);
  EXPECT_EQ(loaded[1].side, Side::right);
  EXPECT_EQ(loaded[1].source, PointSource::model);
  EXPECT_FALSE(loaded[1].points[0].id.has_value());

  const std::string text = read_raw(file("det.json"));
  EXPECT_NE(text.find("\"gt\""), std::string::npos);
  EXPECT_NE(text.find("\"model\""), std::string::npos);
}

TEST_F(IoTest, DuplicateDetectionIdThrows) {
  write_raw("det.json", R"([{"frame_id":0,"side":"left","source":"gt","points":[)"
                        R"({"id":2,"px":[0,0]},{"id":2,"px":[1,1]}]}])");
  EXPECT_THROW(io::load_detections(file("det.json")), ParseError);
}

TEST_F(IoTest, MatchesRoundTripAssignsCallerSource) {
  std::vector<io::FrameMatches> matches(1);
  matches[0].frame_id = 3;
  matches[0].matches = {{7, Vec2(1, 2), Vec2(3, 4), PointSource::model}};
  io::save_matches(file("matches.json"), matches);

  const std::string text = read_raw(file("matches.json"));
  EXPECT_EQ(text.find("source"), std::string::npos);  // schema carries no source field

  const auto as_gt = io::load_matches(file("matches.json"), PointSource::ground_truth);
  ASSERT_EQ(as_gt.size(), 1u);
  EXPECT_EQ(as_gt[0].frame_id, 3);
  EXPECT_EQ(as_gt[0].matches[0].source, PointSource::ground_truth);
  EXPECT_EQ(as_gt[0].matches[0].left_px, Vec2(1, 2));
}

TEST_F(IoTest, TriangulationRoundTrip) {
  std::vector<io::FrameTriangulation> frames(1);
  frames[0].frame_id = 2;
  frames[0].points = {{4, Vec3(1, 2, 100), 0.25}, {9, Vec3(-3, 0, 90), 0.5}};
  io::save_triangulation(file("tri.json"), frames);
  const auto loaded = io::load_triangulation(file("tri.json"));
  ASSERT_EQ(loaded.size(), 1u);
  ASSERT_EQ(loaded[0].points.size(), 2u);
  EXPECT_EQ(loaded[0].points[1].id, 9);
  EXPECT_EQ(loaded[0].points[1].camera_left_mm, Vec3(-3, 0, 90));
  EXPECT_EQ(loaded[0].points[0].reproj_residual_px, 0.25);
}

TEST_F(IoTest, CaliperRoundTripRejectsNegativeDistance) {
  const std::vector<CaliperDistance> caliper{{0, 1, 8.5}, {1, 2, 9.25}};
  io::save_caliper(file("caliper.json"), caliper);
  const auto loaded = io::load_caliper(file("caliper.json"));
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[1].id_a, 1);
  EXPECT_EQ(loaded[1].distance_mm, 9.25);

  write_raw("bad.json", R"([{"ids":[0,1],"distance_mm":-1.0}])");
  EXPECT_THROW(io::load_caliper(file("bad.json")), ParseError);
}

TEST_F(IoTest, MeasurementsRoundTripRejectsDuplicates) {
  const std::vector<IdPoint3> measurements{{0, Vec3(1, 2, 3)}, {1, Vec3(4, 5, 6)}};
  io::save_measurements(file("meas.json"), measurements);
  const auto loaded = io::load_measurements(file("meas.json"));
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[1].mm, Vec3(4, 5, 6));

  write_raw("dup.json", R"([{"id":1,"world_mm":[0,0,0]},{"id":1,"world_mm":[1,1,1]}])");
  EXPECT_THROW(io::load_measurements(file("dup.json")), ParseError);
}

TEST_F(IoTest, ReportRoundTripIncludingMissingCells) {
  ReportInputs in;
  in.gt_left = {{0, 0, {10.0, 10.0}}, {0, 1, {20.0, 10.0}}};
  in.reproj_left = {{0, 0, {10.5, 10.0}}, {0, 1, {20.5, 10.0}}};
  const EvaluationReport report = build_report("roundtrip", in);
  io::save_report(file("report.json"), report);
  const EvaluationReport loaded = io::load_report(file("report.json"));
  EXPECT_EQ(loaded.dataset, "roundtrip");
  ASSERT_EQ(loaded.table_2d.size(), report.table_2d.size());
  EXPECT_FALSE(loaded.table_2d[0].missing);
  ASSERT_TRUE(loaded.table_2d[0].stats.has_value());
  EXPECT_EQ(loaded.table_2d[0].stats->n, 2);
  EXPECT_NEAR(loaded.table_2d[0].stats->mean, 0.5, 1e-12);
  EXPECT_TRUE(loaded.table_2d[1].missing);
  EXPECT_FALSE(loaded.table_2d[1].stats.has_value());
}

TEST_F(IoTest, SceneConfigDefaultsAndRoundTrip) {
  write_raw("empty.json", "{}");
  const SceneConfig defaults = io::load_scene_config(file("empty.json"));
  const SceneConfig reference;
  EXPECT_EQ(defaults.seed, reference.seed);
  EXPECT_EQ(defaults.n_points, reference.n_points);
  EXPECT_EQ(defaults.annulus.a_mm, reference.annulus.a_mm);
  EXPECT_EQ(defaults.noise.px_sigma, 0.0);

  SceneConfig config;
  config.seed = 77;
  config.n_points = 9;
  config.annulus.h_mm = 4.0;
  config.noise.marker_t_sigma = 0.25;
  io::save_scene_config(file("config.json"), config);
  const SceneConfig loaded = io::load_scene_config(file("config.json"));
  EXPECT_EQ(loaded.seed, 77u);
  EXPECT_EQ(loaded.n_points, 9);
  EXPECT_EQ(loaded.annulus.h_mm, 4.0);
  EXPECT_EQ(loaded.noise.marker_t_sigma, 0.25);
  EXPECT_EQ(loaded.rig.left.fx, config.rig.left.fx);
}

TEST_F(IoTest, NegativeSeedRejected) {
  write_raw("config.json", R"({"seed": -3})");
  EXPECT_THROW(io::load_scene_config(file("config.json")), ParseError);
}

TEST_F(IoTest, TruthRoundTrip) {
  SceneConfig config;
  config.seed = 5;
  config.n_points = 6;
  config.n_handeye_points = 10;
  config.n_pivot_poses = 12;
  const SyntheticScene scene = generate_scene(config);
  io::save_truth(file("truth.json"), config, scene.truth);
  const io::TruthFile loaded = io::load_truth(file("truth.json"));
  EXPECT_EQ(loaded.config.seed, 5u);
  ASSERT_EQ(loaded.truth.annulus_world.size(), scene.truth.annulus_world.size());
  EXPECT_EQ(loaded.truth.annulus_world[3], scene.truth.annulus_world[3]);
  EXPECT_EQ(loaded.truth.hand_eye.matrix(), scene.truth.hand_eye.matrix());
  EXPECT_EQ(loaded.truth.tip_offset_marker, scene.truth.tip_offset_marker);
  ASSERT_EQ(loaded.truth.annulus_frames.size(), scene.truth.annulus_frames.size());
  EXPECT_EQ(loaded.truth.annulus_frames[0].camera_pose.matrix(),
            scene.truth.annulus_frames[0].camera_pose.matrix());
  ASSERT_EQ(loaded.truth.caliper.size(), scene.truth.caliper.size());
  EXPECT_EQ(loaded.truth.caliper[2].distance_mm, scene.truth.caliper[2].distance_mm);
}

TEST_F(IoTest, ManifestSeedIsOptional) {
  io::RunManifest manifest;
  manifest.command = "pivot";
  manifest.inputs = {"poses.json"};
  manifest.outputs = {"result.json"};
  manifest.tool_version = "0.1.0";
  manifest.wall_time_s = 0.125;
  io::save_manifest(file("manifest.json"), manifest);
  EXPECT_EQ(read_raw(file("manifest.json")).find("\"seed\""), std::string::npos);

  manifest.seed = 42;
  io::save_manifest(file("manifest2.json"), manifest);
  EXPECT_NE(read_raw(file("manifest2.json")).find("\"seed\""), std::string::npos);
}

TEST_F(IoTest, SavingTwiceIsByteIdentical) {
  TestRng rng(83);
  std::vector<RigidTransform> poses;
  for (int i = 0; i < 4; ++i) {
    poses.push_back(random_rigid(rng, 80.0).with_frames(Frame::marker, Frame::world));
  }
  io::save_poses(file("a.json"), poses);
  io::save_poses(file("b.json"), poses);
  EXPECT_EQ(read_raw(file("a.json")), read_raw(file("b.json")));

  const StereoRig rig = SceneConfig::default_rig();
  io::save_rig(file("rig_a.json"), rig);
  io::save_rig(file("rig_b.json"), rig);
  EXPECT_EQ(read_raw(file("rig_a.json")), read_raw(file("rig_b.json")));
}

TEST_F(IoTest, WriteTextWritesVerbatim) {
  io::write_text(file("table.txt"), "line one\nline two\n");
  EXPECT_EQ(read_raw(file("table.txt")), "line one\nline two\n");
}

}  // namespace
}  // namespace depthcal
