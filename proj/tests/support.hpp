#pragma once

// Helpers shared by the test executables. The oracles here deliberately avoid
// the library's homography and closed-form code paths.

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "evflow/core/event.hpp"
#include "evflow/core/frame.hpp"
#include "evflow/core/rng.hpp"
#include "evflow/core/trajectory.hpp"
#include "evflow/scene/planar_scene.hpp"

namespace testsupport {

using namespace evflow;

inline EventStream random_stream(Rng& rng, std::size_t n, std::uint32_t w, std::uint32_t h,
                                 Timestamp t0, Timestamp t1) {
  EventStream s;
  s.width = w;
  s.height = h;
  s.t_start = t0;
  s.t_end = t1;
  s.events.resize(n);
  for (auto& e : s.events) {
    e.x = static_cast<std::uint16_t>(rng.uniform_int(0, static_cast<int>(w) - 1));
    e.y = static_cast<std::uint16_t>(rng.uniform_int(0, static_cast<int>(h) - 1));
    e.t = t0 + static_cast<Timestamp>(rng.next() % static_cast<std::uint64_t>(t1 - t0 + 1));
    e.p = rng.uniform() < 0.5 ? -1 : 1;
  }
  std::sort(s.events.begin(), s.events.end(), event_before);
  return s;
}

inline Pose random_pose(Rng& rng, double box, double max_angle) {
  Pose p;
  p.position = Eigen::Vector3d(rng.uniform(-box, box), rng.uniform(-box, box), rng.uniform(-box, box));
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  p.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(rng.uniform(0.0, max_angle), axis));
  return p;
}

// Nearest plane hit along a world ray, parameter in units of |dir|.
struct WorldHit {
  int plane = -1;
  double t = std::numeric_limits<double>::infinity();
};

inline WorldHit world_cast(const scene::PlanarScene& sc, const Eigen::Vector3d& origin,
                           const Eigen::Vector3d& dir) {
  WorldHit best;
  for (std::size_t k = 0; k < sc.planes.size(); ++k) {
    const auto& pl = sc.planes[k];
    const double denom = pl.normal().dot(dir);
    if (denom == 0.0) continue;
    const double t = (pl.offset() - pl.normal().dot(origin)) / denom;
    if (!(t > 0.0) || t >= best.t) continue;
    const Eigen::Vector3d X = origin + t * dir;
    const Eigen::Vector3d rel = X - pl.offset() * pl.normal();
    if (!pl.extent().contains(rel.dot(pl.axis_a()), rel.dot(pl.axis_b()))) continue;
    best.plane = static_cast<int>(k);
    best.t = t;
  }
  return best;
}

inline Eigen::Vector3d pixel_ray(const scene::CameraIntrinsics& K, const Pose& pose, double x, double y) {
  return pose.rotation() * Eigen::Vector3d((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
}

// Brute-force flow: back-project through the scene, move the 3D point (or
// direction at infinity) into the second camera, project, and test the
// segment from the second camera centre for a nearer surface.
inline FlowField projection_flow(const scene::PlanarScene& sc, const Pose& pi, const Pose& pj,
                                 const scene::CameraIntrinsics& K) {
  FlowField f(K.width, K.height);
  const Eigen::Matrix3d Rj = pj.rotation();
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const Eigen::Vector3d d = pixel_ray(K, pi, x, y);
      const WorldHit hit = world_cast(sc, pi.position, d);
      Eigen::Vector3d cam;
      if (hit.plane >= 0) {
        cam = Rj.transpose() * (pi.position + hit.t * d - pj.position);
      } else {
        cam = Rj.transpose() * d;
      }
      if (!(cam.z() > 0.0)) continue;
      const double xj = K.fx * cam.x() / cam.z() + K.cx;
      const double yj = K.fy * cam.y() / cam.z() + K.cy;
      if (!(xj >= -0.5 && xj < K.width - 0.5 && yj >= -0.5 && yj < K.height - 0.5)) continue;
      const Eigen::Vector3d back = Rj * cam;  // from camera j to the point
      const WorldHit seen = world_cast(sc, pj.position, back);
      if (hit.plane < 0) {
        if (seen.plane >= 0) continue;
      } else if (seen.plane >= 0 && seen.plane != hit.plane && seen.t < 1.0 - 1e-9) {
        continue;
      }
      f.u(x, y) = static_cast<float>(xj - x);
      f.v(x, y) = static_cast<float>(yj - y);
      f.valid(x, y) = 1;
    }
  }
  return f;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("evflow_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Every regular file under root, as (relative path, bytes).
std::vector<std::pair<std::string, std::string>> tree_contents(const std::filesystem::path& root);

// Smooth random 16×16 log video over `frames` frames: per-pixel sums of a
// few low-frequency sinusoids in time plus a moving spatial pattern.
std::vector<LogFrame> smooth_video(std::uint64_t seed, int width, int height,
                                   const std::vector<Timestamp>& times);

struct OracleEvent {
  Timestamp t;
  int p;
};

// Dense time-stepping reference simulator: walks every nanosecond of the
// piecewise-linear log signal and fires whenever it departs from the
// reference by C. Result is per pixel, row-major.
std::vector<std::vector<OracleEvent>> dense_oracle(const std::vector<LogFrame>& frames,
                                                   const std::vector<Timestamp>& times, double c);

// Random strictly increasing microsecond times with gaps in [lo, hi].
std::vector<Timestamp> random_times(Rng& rng, int count, int lo, int hi);

}  // namespace testsupport
