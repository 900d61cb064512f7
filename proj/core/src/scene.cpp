#include "depthcal/scene.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "depthcal/errors.hpp"
#include "depthcal/random.hpp"

namespace depthcal {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Fixed scene constants; everything config-independent lives here so the
// random stream stays small and auditable.
const Vec3 kTipOffset(0.0, 0.0, -150.0);
const Vec3 kPivotPoint(20.0, -15.0, 40.0);
constexpr double kPivotMajorDeg = 60.0;  // full angular extents of the sweep
constexpr double kPivotMinorDeg = 54.0;
constexpr double kGoldenAngle = 2.399963229728653;
constexpr double kBoardZ = -5.0;
constexpr double kBoardHalf = 24.0;   // mm
constexpr double kViewMargin = 12.0;  // px kept clear inside the image edge
constexpr double kMinDepth = 10.0;    // mm

// ---- arc-length machinery ------------------------------------------------

double annulus_speed(double a, double b, double h, double t) {
  const double dx = -a * std::sin(t);
  const double dy = b * std::cos(t);
  const double dz = -2.0 * h * std::sin(2.0 * t);
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double f_lo, double f_mid, double f_hi, double whole,
                        double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lm = 0.5 * (lo + mid);
  const double mh = 0.5 * (mid + hi);
  const double f_lm = f(lm);
  const double f_mh = f(mh);
  const double left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid);
  const double right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_mh + f_hi);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, mid, hi, f_mid, f_mh, f_hi, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  if (!(hi > lo)) return 0.0;
  const double mid = 0.5 * (lo + hi);
  const double f_lo = f(lo);
  const double f_mid = f(mid);
  const double f_hi = f(hi);
  const double whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
  return adaptive_simpson(f, lo, hi, f_lo, f_mid, f_hi, whole, tol, 48);
}

// ---- randomness helpers (draw counts are part of the stream contract) ----

Vec3 random_unit_vector(Pcg32& rng) {
  const Vec3 v(rng.normal(), rng.normal(), rng.normal());
  const double n = v.norm();
  return n > 1e-12 ? Vec3(v / n) : Vec3::UnitZ();
}

/// Right-composed rotation noise, additive translation noise; draws are
/// consumed only for strictly positive sigmas.
RigidTransform perturb_pose(const RigidTransform& pose, Pcg32& rng,
                            const NoiseConfig& noise) {
  Mat3 r = pose.rotation();
  Vec3 t = pose.translation();
  if (noise.marker_r_sigma_deg > 0.0) {
    const Vec3 axis = random_unit_vector(rng);
    const double angle = noise.marker_r_sigma_deg * kDeg * rng.normal();
    r = r * so3_exp(angle * axis);
  }
  if (noise.marker_t_sigma > 0.0) {
    // marker_t_sigma is the rms of the full 3D perturbation.
    const double per_axis = noise.marker_t_sigma / std::sqrt(3.0);
    t += per_axis * Vec3(rng.normal(), rng.normal(), rng.normal());
  }
  return RigidTransform(r, t, pose.source(), pose.target());
}

Vec2 noisy_pixel(const Vec2& px, Pcg32& rng, double sigma,
                 const CameraIntrinsics& intr) {
  Vec2 out = px;
  if (sigma > 0.0) {
    out += sigma * Vec2(rng.normal(), rng.normal());
  }
  // The view margin keeps real clamping astronomically unlikely; this only
  // guarantees the in-bounds invariant of emitted detections.
  out.x() = std::clamp(out.x(), 0.0, static_cast<double>(intr.width - 1));
  out.y() = std::clamp(out.y(), 0.0, static_cast<double>(intr.height - 1));
  return out;
}

// ---- geometry helpers ----------------------------------------------------

RigidTransform look_at_camera(const Vec3& position, const Vec3& target, double roll) {
  const Vec3 forward = (target - position).normalized();  // camera +z
  Vec3 right = Vec3::UnitY().cross(forward);
  if (right.norm() < 1e-9) {
    right = Vec3::UnitX().cross(forward);
  }
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  const Mat3 rolled = Eigen::AngleAxisd(roll, Vec3::UnitZ()).toRotationMatrix() * r;
  return RigidTransform(rolled, -(rolled * position), Frame::world, Frame::camera_left);
}

/// Projects through the full camera model and rejects anything outside the
/// safe image area; scene configs either view everything or are refused.
Vec2 project_checked(const CameraIntrinsics& intr, const RigidTransform& world_to_camera,
                     const Vec3& p_world, const std::string& what) {
  const Vec3 cam = world_to_camera * p_world;
  if (!(cam.z() > kMinDepth)) {
    throw Unviewable(what + ": point at camera depth " + std::to_string(cam.z()) +
                     " mm (needs > " + std::to_string(kMinDepth) + ")");
  }
  const Vec2 px = project_camera_point(intr, cam);
  if (px.x() < kViewMargin || px.x() > intr.width - 1 - kViewMargin ||
      px.y() < kViewMargin || px.y() > intr.height - 1 - kViewMargin) {
    throw Unviewable(what + ": projection (" + std::to_string(px.x()) + ", " +
                     std::to_string(px.y()) + ") px outside the safe image area");
  }
  return px;
}

}  // namespace

StereoRig SceneConfig::default_rig() {
  CameraIntrinsics cam;
  cam.fx = 1100.0;
  cam.fy = 1100.0;
  cam.cx = 960.0;
  cam.cy = 540.0;
  cam.width = 1920;
  cam.height = 1080;
  cam.k1 = -0.05;
  cam.k2 = 0.01;
  cam.k3 = 0.0;
  cam.p1 = 1e-4;
  cam.p2 = -1e-4;
  StereoRig rig;
  rig.left = cam;
  rig.right = cam;
  rig.left_to_right = RigidTransform(Mat3::Identity(), Vec3(-4.0, 0.0, 0.0),
                                     Frame::camera_left, Frame::camera_right);
  return rig;
}

void SceneConfig::validate() const {
  rig.validate();
  if (n_points < 2) {
    throw ParseError("config.n_points must be >= 2, got " + std::to_string(n_points));
  }
  if (!(annulus.a_mm > 0.0) || !(annulus.b_mm > 0.0)) {
    throw ParseError("config.annulus semi-axes must be positive");
  }
  if (!std::isfinite(annulus.h_mm)) {
    throw ParseError("config.annulus.h_mm must be finite");
  }
  if (n_handeye_frames < 1) {
    throw ParseError("config.n_handeye_frames must be >= 1, got " +
                     std::to_string(n_handeye_frames));
  }
  if (n_handeye_points < 6) {
    throw ParseError("config.n_handeye_points must be >= 6, got " +
                     std::to_string(n_handeye_points));
  }
  if (n_annulus_frames < 1) {
    throw ParseError("config.n_annulus_frames must be >= 1, got " +
                     std::to_string(n_annulus_frames));
  }
  if (n_pivot_poses < 10) {
    throw ParseError("config.n_pivot_poses must be >= 10, got " +
                     std::to_string(n_pivot_poses));
  }
  const auto check_sigma = [](double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ParseError(std::string("config.noise.") + name + " must be >= 0");
    }
  };
  check_sigma(noise.px_sigma, "px_sigma");
  check_sigma(noise.marker_t_sigma, "marker_t_sigma");
  check_sigma(noise.marker_r_sigma_deg, "marker_r_sigma_deg");
}

std::vector<Vec3> generate_annulus(int n, double a_mm, double b_mm, double h_mm) {
  if (n < 2) {
    throw ParseError("generate_annulus needs n >= 2, got " + std::to_string(n));
  }
  if (!(a_mm > 0.0) || !(b_mm > 0.0) || !std::isfinite(h_mm)) {
    throw ParseError("generate_annulus needs positive semi-axes and finite height");
  }
  const auto speed = [&](double t) { return annulus_speed(a_mm, b_mm, h_mm, t); };
  const double rough =
      2.0 * kPi * std::sqrt(std::max(a_mm, b_mm) * std::max(a_mm, b_mm) +
                            4.0 * h_mm * h_mm) +
      1.0;
  const double tol = 1e-10 * rough;  // absolute; total length is below `rough`
  const double total = integrate(speed, 0.0, 2.0 * kPi, tol);

  std::vector<Vec3> points;
  points.reserve(n);
  double lo = 0.0;      // bracket base: arc length at `lo` is `s_lo`
  double s_lo = 0.0;
  for (int i = 0; i < n; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(n);
    double hi = 2.0 * kPi;
    double theta = lo + (target - s_lo) / speed(lo);
    theta = std::clamp(theta, lo, hi);
    for (int iter = 0; iter < 100; ++iter) {
      const double s_theta = s_lo + integrate(speed, lo, theta, tol);
      const double err = s_theta - target;
      if (std::abs(err) <= 1e-9 * std::max(total, 1.0)) break;
      if (err > 0.0) {
        hi = theta;
      } else {
        lo = theta;
        s_lo = s_theta;
      }
      double next = theta - err / speed(theta);
      if (!(next > lo) || !(next < hi)) {
        next = 0.5 * (lo + hi);
      }
      theta = next;
    }
    points.emplace_back(a_mm * std::cos(theta), b_mm * std::sin(theta),
                        h_mm * std::cos(2.0 * theta));
    lo = theta;  // arc length is monotone; the next target lies to the right
    s_lo = target;
  }
  return points;
}

SyntheticScene generate_scene(const SceneConfig& config) {
  config.validate();
  SyntheticScene scene;
  scene.config = config;
  scene.rig = config.rig;
  SceneTruth& truth = scene.truth;
  Pcg32 rng(config.seed);

  // Stream order: (a) no draws, (b) hand-eye transform, (c) hand-eye camera
  // poses, (d) board points, (e) per hand-eye frame pixel + marker noise,
  // (f) annulus camera poses + marker noise, (g) model detection noise,
  // (h) stylus measurement noise, (i) pivot pose noise.

  // (a) phantom geometry and fixed pivot ground truth.
  truth.annulus_world = generate_annulus(config.n_points, config.annulus.a_mm,
                                         config.annulus.b_mm, config.annulus.h_mm);
  truth.tip_offset_marker = kTipOffset;
  truth.pivot_point_world = kPivotPoint;
  for (int i = 0; i < config.n_points; ++i) {
    const int j = (i + 1) % config.n_points;
    if (j == 0 && config.n_points == 2) break;  // a 2-point ring has one chord
    truth.caliper.push_back(
        {i, j, (truth.annulus_world[j] - truth.annulus_world[i]).norm()});
  }

  // (b) true hand-eye transform D: marker -> camera-left.
  {
    const Vec3 axis = random_unit_vector(rng);
    const double angle = rng.uniform(10.0 * kDeg, 25.0 * kDeg);
    const Vec3 t(rng.uniform(25.0, 60.0), rng.uniform(-15.0, 15.0),
                 rng.uniform(-15.0, 15.0));
    truth.hand_eye =
        RigidTransform(so3_exp(angle * axis), t, Frame::marker, Frame::camera_left);
  }
  const RigidTransform camera_to_marker = truth.hand_eye.inverse();

  // Camera placement: look-at poses on a cone around the target, azimuth
  // spread over the frames; 4 uniforms per camera.
  const auto draw_camera_pose = [&](int index, int count, const Vec3& target) {
    const double distance = rng.uniform(100.0, 130.0);
    const double polar = (16.0 + 8.0 * rng.uniform()) * kDeg;
    const double azimuth =
        2.0 * kPi * static_cast<double>(index) / static_cast<double>(count) +
        rng.uniform(-0.25, 0.25);
    const double roll = rng.uniform(-0.2, 0.2);
    const Vec3 position =
        target + distance * Vec3(std::sin(polar) * std::cos(azimuth),
                                 std::sin(polar) * std::sin(azimuth), std::cos(polar));
    return look_at_camera(position, target, roll);
  };

  // (c) hand-eye frame poses; the true marker pose follows from E = D * R.
  const Vec3 board_center(0.0, 0.0, kBoardZ);
  for (int i = 0; i < config.n_handeye_frames; ++i) {
    const RigidTransform camera = draw_camera_pose(i, config.n_handeye_frames, board_center);
    truth.handeye_frames.push_back({i, camera, camera_to_marker * camera});
  }

  // (d) planar calibration board: jittered grid at z = kBoardZ exactly.
  {
    const int side = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(config.n_handeye_points))));
    const double spacing = 2.0 * kBoardHalf / static_cast<double>(side - 1);
    for (int j = 0; j < config.n_handeye_points; ++j) {
      const int gx = j % side;
      const int gy = j / side;
      truth.board_world.emplace_back(
          -kBoardHalf + gx * spacing + rng.uniform(-1.2, 1.2),
          -kBoardHalf + gy * spacing + rng.uniform(-1.2, 1.2), kBoardZ);
    }
  }

  // (e) hand-eye sessions: exact projections, then per frame the pixel
  // noise (two normals per point) followed by the marker-pose noise.
  for (int i = 0; i < config.n_handeye_frames; ++i) {
    const FramePoses& fp = truth.handeye_frames[i];
    HandEyeFrame clean;
    clean.marker_pose = fp.marker_pose;
    for (int j = 0; j < config.n_handeye_points; ++j) {
      const Vec2 px = project_checked(config.rig.left, fp.camera_pose,
                                      truth.board_world[j],
                                      "hand-eye frame " + std::to_string(i));
      clean.correspondences.push_back({j, px, truth.board_world[j]});
    }
    HandEyeFrame noisy = clean;
    for (Correspondence2D3D& c : noisy.correspondences) {
      c.image_px = noisy_pixel(c.image_px, rng, config.noise.px_sigma, config.rig.left);
    }
    noisy.marker_pose = perturb_pose(fp.marker_pose, rng, config.noise);
    scene.handeye_session_clean.push_back(std::move(clean));
    scene.handeye_session.push_back(std::move(noisy));
  }

  // (f) annulus stereo frames: camera pose draws, then marker-pose noise.
  for (int f = 0; f < config.n_annulus_frames; ++f) {
    const RigidTransform camera = draw_camera_pose(f, config.n_annulus_frames, Vec3::Zero());
    truth.annulus_frames.push_back({f, camera, camera_to_marker * camera});
    scene.marker_poses.push_back(
        perturb_pose(truth.annulus_frames.back().marker_pose, rng, config.noise));
  }

  // (g) detections: ground truth is the exact projection; model predictions
  // add pixel noise, left side first, then right.
  for (int f = 0; f < config.n_annulus_frames; ++f) {
    const FramePoses& fp = truth.annulus_frames[f];
    const RigidTransform right_camera = config.rig.left_to_right * fp.camera_pose;
    FrameDetections gt_left{f, Side::left, PointSource::ground_truth, {}};
    FrameDetections gt_right{f, Side::right, PointSource::ground_truth, {}};
    for (int i = 0; i < config.n_points; ++i) {
      const std::string what = "annulus frame " + std::to_string(f) + ", point " +
                               std::to_string(i);
      gt_left.points.push_back(
          {i, project_checked(config.rig.left, fp.camera_pose,
                              truth.annulus_world[i], what + " (left)")});
      gt_right.points.push_back(
          {i, project_checked(config.rig.right, right_camera,
                              truth.annulus_world[i], what + " (right)")});
    }
    FrameDetections model_left{f, Side::left, PointSource::model, gt_left.points};
    for (Detection& d : model_left.points) {
      d.px = noisy_pixel(d.px, rng, config.noise.px_sigma, config.rig.left);
    }
    FrameDetections model_right{f, Side::right, PointSource::model, gt_right.points};
    for (Detection& d : model_right.points) {
      d.px = noisy_pixel(d.px, rng, config.noise.px_sigma, config.rig.right);
    }
    scene.detections_gt_left.push_back(std::move(gt_left));
    scene.detections_gt_right.push_back(std::move(gt_right));
    scene.detections_model_left.push_back(std::move(model_left));
    scene.detections_model_right.push_back(std::move(model_right));
  }

  // (h) stylus measurements: the clean set is the ground truth itself; the
  // noisy set adds the tracked-translation noise (rms marker_t_sigma).
  for (int i = 0; i < config.n_points; ++i) {
    scene.measurements_clean.push_back({i, truth.annulus_world[i]});
    Vec3 measured = truth.annulus_world[i];
    if (config.noise.marker_t_sigma > 0.0) {
      const double per_axis = config.noise.marker_t_sigma / std::sqrt(3.0);
      measured += per_axis * Vec3(rng.normal(), rng.normal(), rng.normal());
    }
    scene.measurements.push_back({i, measured});
  }

  // (i) pivot stream: a deterministic elliptical cone sweep (full extents
  // kPivotMajorDeg x kPivotMinorDeg) with a golden-angle spin about the
  // stylus axis; the clean stream consumes no draws.
  for (int k = 0; k < config.n_pivot_poses; ++k) {
    const double phi =
        2.0 * kPi * static_cast<double>(k) / static_cast<double>(config.n_pivot_poses);
    const double rho = kDeg * std::sqrt(std::pow(0.5 * kPivotMajorDeg * std::cos(phi), 2) +
                                        std::pow(0.5 * kPivotMinorDeg * std::sin(phi), 2));
    const Vec3 tilt_axis(-std::sin(phi), std::cos(phi), 0.0);
    const Mat3 r = (Eigen::AngleAxisd(rho, tilt_axis) *
                    Eigen::AngleAxisd(kGoldenAngle * k, Vec3::UnitZ()))
                       .toRotationMatrix();
    const RigidTransform pose(r, kPivotPoint - r * kTipOffset, Frame::marker,
                              Frame::world);
    scene.pivot_poses_clean.push_back(pose);
    scene.pivot_poses.push_back(perturb_pose(pose, rng, config.noise));
  }

  return scene;
}

}  // namespace depthcal
