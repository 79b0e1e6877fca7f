#include <cmath>

#include "doctest.h"

#include "evflow/core/error.hpp"
#include "evflow/sampler/schedule.hpp"
#include "evflow/scene/generate.hpp"
#include "support.hpp"

using namespace evflow;
using namespace evflow::sampler;
using scene::CameraIntrinsics;
using scene::PlanarScene;

namespace {

PlanarScene wall(double z) {
  PlanarScene sc;
  scene::Texture tex;
  tex.mean = 0.5;
  sc.planes.emplace_back(Eigen::Vector3d::UnitZ(), z, tex, scene::PlaneExtent{-100, 100, -100, 100});
  return sc;
}

Trajectory pan(double tx, Timestamp duration) {
  Waypoint a;
  Waypoint b;
  b.t = duration;
  b.pose.position.x() = tx;
  return Trajectory({a, b});
}

// Largest brute-force displacement over both directions.
double oracle_displacement(const PlanarScene& sc, const Trajectory& traj, const CameraIntrinsics& K,
                           Timestamp a, Timestamp b) {
  double worst = 0.0;
  const Pose pa = traj.pose_at(a);
  const Pose pb = traj.pose_at(b);
  for (const auto& f : {testsupport::projection_flow(sc, pa, pb, K), testsupport::projection_flow(sc, pb, pa, K)}) {
    for (int y = 0; y < K.height; ++y) {
      for (int x = 0; x < K.width; ++x) {
        if (f.valid(x, y)) worst = std::max(worst, std::hypot(double(f.u(x, y)), double(f.v(x, y))));
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("static trajectory needs no intermediate frames") {
  const PlanarScene sc = wall(3.0);
  const auto K = CameraIntrinsics::from_fov(16, 16, 60);
  Waypoint a;
  Waypoint b;
  b.t = 20000;
  const Trajectory traj({a, b});
  const auto s = plan_schedule(sc, traj, K, 0, 20000);
  CHECK(s.times == std::vector<Timestamp>{0, 20000});
  REQUIRE(s.displacements.size() == 1);
  CHECK(s.displacements[0] == 0.0);
}

TEST_CASE("half-pixel probe motion is scheduled without subdivision") {
  const PlanarScene sc = wall(4.0);
  const auto K = CameraIntrinsics::from_fov(24, 24, 60);
  const Timestamp T = 16000;
  // 0.5 px over the probe interval T/16, so 8 px over the window.
  const double tx = 8.0 * 4.0 / K.fx;
  const Trajectory traj = pan(tx, T);
  const auto s = plan_schedule(sc, traj, K, 0, T);
  CHECK(s.bisections == 0);
  CHECK(s.intervals() == 8);
  for (std::size_t i = 0; i < s.intervals(); ++i) {
    CHECK(oracle_displacement(sc, traj, K, s.times[i], s.times[i + 1]) <= 1.0 + 1e-9);
  }
}

TEST_CASE("60 px pan needs at least 60 verified intervals") {
  const PlanarScene sc = wall(3.0);
  const auto K = CameraIntrinsics::from_fov(32, 32, 70);
  const Timestamp T = 33333;
  const double tx = 60.0 * 3.0 / K.fx;
  const Trajectory traj = pan(tx, T);
  const auto s = plan_schedule(sc, traj, K, 0, T);
  CHECK(s.intervals() >= 60);
  CHECK(s.times.front() == 0);
  CHECK(s.times.back() == T);
  for (std::size_t i = 0; i < s.intervals(); ++i) {
    CHECK(s.times[i] < s.times[i + 1]);
    CHECK(oracle_displacement(sc, traj, K, s.times[i], s.times[i + 1]) <= 1.001);
  }
}

TEST_CASE("schedules on generated motion are bounded and deterministic") {
  const auto K = CameraIntrinsics::from_fov(24, 24, 70);
  scene::TrajectoryConfig tc;
  tc.end = Eigen::Vector3d(0.3, 0.1, 0.2);
  tc.max_rotation_rate = 2.0;
  tc.max_rotation_deviation = 0.3;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PlanarScene sc = scene::gen_scene(scene::SceneConfig{}, seed);
    const Trajectory traj = scene::gen_trajectory(tc, seed, sc);
    const auto s = plan_schedule(sc, traj, K, traj.t_begin(), traj.t_end());
    const auto again = plan_schedule(sc, traj, K, traj.t_begin(), traj.t_end());
    CHECK(s.times == again.times);
    for (std::size_t i = 0; i < s.intervals(); ++i) {
      CHECK(s.times[i] < s.times[i + 1]);
      CHECK(oracle_displacement(sc, traj, K, s.times[i], s.times[i + 1]) <= 1.0 + 1e-3);
    }
  }
}

TEST_CASE("plan_schedule_through keeps every knot") {
  const PlanarScene sc = wall(3.0);
  const auto K = CameraIntrinsics::from_fov(16, 16, 70);
  const Trajectory traj = pan(0.5, 30000);
  const std::vector<Timestamp> knots{0, 10000, 20000, 30000};
  const auto s = plan_schedule_through(sc, traj, K, knots);
  for (Timestamp k : knots) CHECK(std::find(s.times.begin(), s.times.end(), k) != s.times.end());
  CHECK(s.displacements.size() == s.intervals());
}

TEST_CASE("invalid windows and impossible motion are reported") {
  const PlanarScene sc = wall(3.0);
  const auto K = CameraIntrinsics::from_fov(16, 16, 70);
  const Trajectory traj = pan(0.5, 1000);
  CHECK_THROWS_AS(plan_schedule(sc, traj, K, 500, 500), Error);
  CHECK_THROWS_AS(plan_schedule(sc, traj, K, 0, 2000), Error);

  // 5 px in one microsecond cannot be subdivided.
  const Trajectory jump = pan(5.0 * 3.0 / K.fx, 1);
  try {
    plan_schedule(sc, jump, K, 0, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPathologicalMotion);
  }

  PlanOptions tight;
  tight.max_intervals = 5;
  try {
    plan_schedule(sc, pan(20.0 * 3.0 / K.fx, 10000), K, 0, 10000, tight);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPathologicalMotion);
  }
}
