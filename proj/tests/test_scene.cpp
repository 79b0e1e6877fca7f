#include <cmath>
#include <numbers>

#include "doctest.h"

#include "evflow/core/error.hpp"
#include "evflow/scene/generate.hpp"
#include "evflow/scene/render.hpp"
#include "support.hpp"

using namespace evflow;
using namespace evflow::scene;

namespace {

TexturedPlane fronto_plane(double z, double half, Texture tex) {
  return TexturedPlane(Eigen::Vector3d::UnitZ(), z, std::move(tex), PlaneExtent{-half, half, -half, half});
}

Texture flat(double v) {
  Texture t;
  t.mean = v;
  return t;
}

}  // namespace

TEST_CASE("empty scene renders the background") {
  PlanarScene sc;
  sc.background = 0.3;
  const auto K = CameraIntrinsics::from_fov(16, 12, 60);
  const Frame f = render_frame(sc, Pose{}, K, 5);
  CHECK(f.t == 5);
  for (double v : f.intensity.data()) CHECK(v == 0.3);
}

TEST_CASE("constant texture covering the view renders uniformly") {
  PlanarScene sc;
  sc.background = 0.0;
  sc.planes.push_back(fronto_plane(2.0, 100.0, flat(0.5)));
  const auto K = CameraIntrinsics::from_fov(20, 20, 70);
  const Frame f = render_frame(sc, Pose{}, K);
  for (std::size_t i = 0; i < f.intensity.size(); ++i) CHECK(f.intensity.data()[i] == 0.5);
}

TEST_CASE("sinusoid texture matches direct inverse-homography evaluation") {
  Texture tex;
  tex.mean = 0.5;
  tex.sinusoids = {{0.2, 0.7, -0.4, 0.3}, {0.15, -1.1, 0.9, 1.7}};
  PlanarScene sc;
  sc.planes.push_back(fronto_plane(3.0, 100.0, tex));
  const auto K = CameraIntrinsics::from_fov(24, 18, 65);
  Pose pose;
  pose.position = Eigen::Vector3d(0.2, -0.1, 0.3);
  pose.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(0.2, Eigen::Vector3d(0.3, 1.0, 0.2).normalized()));

  const Frame f = render_frame(sc, pose, K);
  const auto& pl = sc.planes[0];
  // Plane coordinates (a, b, 1) -> pixel.
  Eigen::Matrix3d M;
  M.col(0) = pl.axis_a();
  M.col(1) = pl.axis_b();
  M.col(2) = pl.origin() - pose.position;
  const Eigen::Matrix3d H = K.matrix() * pose.rotation().transpose() * M;
  const Eigen::Matrix3d Hinv = H.inverse();
  double worst = 0.0;
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const Eigen::Vector3d ab = Hinv * Eigen::Vector3d(x, y, 1.0);
      const double a = ab.x() / ab.z();
      const double b = ab.y() / ab.z();
      double expected = 0.5;
      for (const auto& s : tex.sinusoids) {
        expected += s.amplitude * std::sin(2 * std::numbers::pi * (s.freq_a * a + s.freq_b * b) + s.phase);
      }
      worst = std::max(worst, std::abs(f.intensity(x, y) - expected));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("rendering is deterministic") {
  const PlanarScene sc = gen_scene(SceneConfig{}, 42);
  const auto K = CameraIntrinsics::from_fov(32, 24, 70);
  CHECK(render_frame(sc, Pose{}, K).intensity == render_frame(sc, Pose{}, K).intensity);
  const PlanarScene again = gen_scene(SceneConfig{}, 42);
  CHECK(render_frame(again, Pose{}, K).intensity == render_frame(sc, Pose{}, K).intensity);
}

TEST_CASE("generated scenes satisfy their config") {
  SceneConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PlanarScene sc = gen_scene(cfg, seed);
    CHECK_NOTHROW(validate_scene(sc));
    CHECK(static_cast<int>(sc.planes.size()) >= cfg.plane_count_min);
    CHECK(static_cast<int>(sc.planes.size()) <= cfg.plane_count_max);
    for (const auto& p : sc.planes) CHECK(p.signed_distance(Eigen::Vector3d::Zero()) > 0.0);
  }
}

TEST_CASE("identical poses give zero flow everywhere") {
  const PlanarScene sc = gen_scene(SceneConfig{}, 3);
  const auto K = CameraIntrinsics::from_fov(32, 32, 70);
  Rng rng(1);
  const Pose p = testsupport::random_pose(rng, 0.2, 0.2);
  const FlowField f = analytic_flow(sc, p, p, K);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      CHECK(f.valid(x, y) == 1);
      CHECK(std::abs(f.u(x, y)) < 1e-9);
      CHECK(std::abs(f.v(x, y)) < 1e-9);
    }
  }
}

TEST_CASE("fronto-parallel plane under x translation gives u = -fx tx / Z") {
  PlanarScene sc;
  sc.planes.push_back(fronto_plane(4.0, 100.0, flat(0.5)));
  const auto K = CameraIntrinsics::from_fov(40, 30, 60);
  Pose pj;
  pj.position.x() = 0.1;
  const FlowField f = analytic_flow(sc, Pose{}, pj, K);
  const FlowField oracle = testsupport::projection_flow(sc, Pose{}, pj, K);
  const double expected = -K.fx * 0.1 / 4.0;
  int valid = 0;
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      CHECK(f.valid(x, y) == oracle.valid(x, y));
      if (!f.valid(x, y)) continue;
      ++valid;
      CHECK(std::abs(f.u(x, y) - expected) < 1e-5);
      CHECK(std::abs(f.v(x, y)) < 1e-6);
      CHECK(std::abs(oracle.u(x, y) - expected) < 1e-5);
    }
  }
  // Pixels that leave the image on the left are invalid.
  CHECK(valid == (K.width - 1) * K.height);
}

TEST_CASE("a nearer plane sliding over a background pixel invalidates it") {
  PlanarScene sc;
  sc.planes.push_back(fronto_plane(2.0, 0.3, flat(0.9)));
  sc.planes.push_back(fronto_plane(5.0, 100.0, flat(0.2)));
  const auto K = CameraIntrinsics::from_fov(64, 64, 70);
  Pose pj;
  pj.position.x() = -0.2;

  const CameraView vi(sc, Pose{}, K);
  REQUIRE(vi.cast(40, 31).plane == 1);
  const FlowField f = analytic_flow(sc, Pose{}, pj, K);
  // Two-pose depth test: the point's depth in view j against the nearest hit there.
  const Eigen::Vector3d X = testsupport::pixel_ray(K, Pose{}, 40, 31) * 5.0;
  const Eigen::Vector3d toX = X - pj.position;
  const auto seen = testsupport::world_cast(sc, pj.position, toX);
  REQUIRE(seen.plane == 0);
  REQUIRE(seen.t < 1.0);
  CHECK(f.valid(40, 31) == 0);
  // A background pixel far from the front plane stays valid.
  CHECK(f.valid(60, 5) == 1);
}

TEST_CASE("analytic flow matches brute-force projection on random scenes") {
  const auto K = CameraIntrinsics::from_fov(32, 24, 75);
  Rng rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    const PlanarScene sc = gen_scene(SceneConfig{}, 100 + trial);
    const Pose pi = testsupport::random_pose(rng, 0.3, 0.15);
    const Pose pj = testsupport::random_pose(rng, 0.3, 0.15);
    const FlowField f = analytic_flow(sc, pi, pj, K);
    const FlowField o = testsupport::projection_flow(sc, pi, pj, K);
    int mismatched = 0;
    double worst = 0.0;
    for (int y = 0; y < K.height; ++y) {
      for (int x = 0; x < K.width; ++x) {
        if (f.valid(x, y) != o.valid(x, y)) {
          ++mismatched;
          continue;
        }
        if (!f.valid(x, y)) continue;
        worst = std::max(worst, std::hypot(double(f.u(x, y)) - o.u(x, y), double(f.v(x, y)) - o.v(x, y)));
      }
    }
    CHECK(mismatched == 0);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("forward then backward warp returns to the start pixel") {
  const auto K = CameraIntrinsics::from_fov(32, 32, 70);
  Rng rng(5);
  const PlanarScene sc = gen_scene(SceneConfig{}, 9);
  const Pose pi = testsupport::random_pose(rng, 0.2, 0.1);
  const Pose pj = testsupport::random_pose(rng, 0.2, 0.1);
  const PoseWarp fw(sc, pi, pj, K);
  const PoseWarp bw(sc, pj, pi, K);
  int checked = 0;
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const auto q = fw.map(x, y);
      if (!q) continue;
      const auto back = bw.map(q->x(), q->y());
      REQUIRE(back.has_value());
      CHECK((*back - Eigen::Vector2d(x, y)).norm() < 1e-3);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("zero speed and rotation bounds give a constant pose") {
  TrajectoryConfig cfg;
  cfg.speed_min = 0.0;
  cfg.speed_max = 0.0;
  cfg.max_rotation_rate = 0.0;
  cfg.max_rotation_deviation = 0.0;
  cfg.start = Eigen::Vector3d(0.1, 0.0, -0.1);
  const PlanarScene sc = gen_scene(SceneConfig{}, 1);
  const Trajectory traj = gen_trajectory(cfg, 4, sc);
  const Pose first = traj.pose_at(traj.t_begin());
  for (Timestamp t = traj.t_begin(); t <= traj.t_end(); t += 997) {
    const Pose p = traj.pose_at(t);
    CHECK(p.position == first.position);
    CHECK(p.orientation.coeffs() == first.orientation.coeffs());
  }
}

TEST_CASE("trajectory generation is deterministic per seed") {
  const PlanarScene sc = gen_scene(SceneConfig{}, 2);
  const Trajectory a = gen_trajectory(TrajectoryConfig{}, 8, sc);
  const Trajectory b = gen_trajectory(TrajectoryConfig{}, 8, sc);
  REQUIRE(a.waypoints().size() == b.waypoints().size());
  for (std::size_t i = 0; i < a.waypoints().size(); ++i) {
    CHECK(a.waypoints()[i].t == b.waypoints()[i].t);
    CHECK(a.waypoints()[i].pose.position == b.waypoints()[i].pose.position);
    CHECK(a.waypoints()[i].pose.orientation.coeffs() == b.waypoints()[i].pose.orientation.coeffs());
  }
}

TEST_CASE("generated trajectories stay on the camera side of every plane") {
  TrajectoryConfig cfg;
  cfg.end = Eigen::Vector3d(0.2, -0.1, 0.3);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const PlanarScene sc = gen_scene(SceneConfig{}, seed);
    const Trajectory traj = gen_trajectory(cfg, seed, sc);
    bool ok = true;
    // 1 ms dense sampling oracle.
    for (Timestamp t = traj.t_begin();; t = std::min(t + 1000, traj.t_end())) {
      const Eigen::Vector3d c = traj.pose_at(t).position;
      for (const auto& pl : sc.planes) ok &= (pl.offset() - pl.normal().dot(c)) > 0.0;
      if (t == traj.t_end()) break;
    }
    CHECK(ok);
  }
}

TEST_CASE("straight-line speed outside the bounds is a config error") {
  TrajectoryConfig cfg;
  cfg.speed_max = 1.0;  // the default line needs 2.25 units/s
  const PlanarScene sc = gen_scene(SceneConfig{}, 1);
  try {
    gen_trajectory(cfg, 1, sc);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
  }
}

TEST_CASE("intrinsics from fov centre the principal point") {
  const auto K = CameraIntrinsics::from_fov(64, 48, 90);
  CHECK(K.cx == doctest::Approx(31.5));
  CHECK(K.cy == doctest::Approx(23.5));
  CHECK(K.fx == doctest::Approx(32.0));
  CHECK((K.matrix() * K.inverse() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}
