#include "evflow/scene/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "evflow/core/error.hpp"
#include "evflow/core/rng.hpp"

namespace evflow::scene {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

Eigen::Vector3d random_unit(Rng& rng) {
  Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
  const double n = v.norm();
  return n > 0.0 ? Eigen::Vector3d(v / n) : Eigen::Vector3d::UnitX();
}

Eigen::Vector3d random_in_ball(Rng& rng, double radius) {
  return random_unit(rng) * radius * std::cbrt(rng.uniform());
}

Eigen::Quaterniond exp_map(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Eigen::Quaterniond::Identity();
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, w / angle)).normalized();
}

std::vector<double> smoothed_lattice(int n, Rng& rng) {
  const auto size = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  std::vector<double> raw(size);
  for (double& v : raw) v = rng.uniform(-1.0, 1.0);
  std::vector<double> out(size, 0.0);
  double peak = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int ii = (i + di + n) % n;
          const int jj = (j + dj + n) % n;
          sum += raw[static_cast<std::size_t>(jj * n + ii)];
        }
      }
      out[static_cast<std::size_t>(j * n + i)] = sum / 9.0;
      peak = std::max(peak, std::abs(sum / 9.0));
    }
  }
  if (peak > 0.0) {
    for (double& v : out) v /= peak;
  }
  return out;
}

}  // namespace

Texture gen_texture(double mean, double amplitude_budget, const SceneConfig& cfg,
                    std::uint64_t seed) {
  Rng rng(seed);
  Texture tex;
  tex.mean = mean;
  const int count = std::clamp(rng.uniform_int(cfg.sinusoids_min, cfg.sinusoids_max), 0,
                               static_cast<int>(Texture::kMaxSinusoids));
  std::vector<double> weights(static_cast<std::size_t>(count));
  double total = 0.0;
  for (double& w : weights) total += (w = rng.uniform(0.5, 1.0));
  for (int k = 0; k < count; ++k) {
    const double freq = rng.uniform(cfg.frequency_min, cfg.frequency_max);
    const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    tex.sinusoids.push_back(Sinusoid{
        0.6 * amplitude_budget * weights[static_cast<std::size_t>(k)] / total,
        freq * std::cos(dir),
        freq * std::sin(dir),
        rng.uniform(0.0, 2.0 * std::numbers::pi),
    });
  }
  if (cfg.lattice_size > 0) {
    tex.lattice_size = cfg.lattice_size;
    tex.lattice_spacing = cfg.lattice_spacing;
    tex.lattice_amplitude = (count > 0 ? 0.4 : 1.0) * amplitude_budget;
    tex.lattice = smoothed_lattice(cfg.lattice_size, rng);
  }
  return tex;
}

PlanarScene gen_scene(const SceneConfig& cfg, std::uint64_t seed) {
  if (cfg.plane_count_min < 1 || cfg.plane_count_max > static_cast<int>(PlanarScene::kMaxPlanes) ||
      cfg.plane_count_min > cfg.plane_count_max) {
    throw Error(ErrorCode::kConfig, "scene plane count range must lie within [1, 8]");
  }
  if (!(cfg.depth_min > 0.0 && cfg.depth_min <= cfg.depth_max)) {
    throw Error(ErrorCode::kConfig, "scene depth range must be positive and non-empty");
  }
  Rng rng(seed);
  PlanarScene scene;
  scene.background = cfg.background;
  const int count = rng.uniform_int(cfg.plane_count_min, cfg.plane_count_max);

  for (int k = 0; k + 1 < count; ++k) {
    const double tilt = rng.uniform(0.0, cfg.max_tilt_deg * kDegToRad);
    const double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Eigen::Vector3d normal(std::sin(tilt) * std::cos(azimuth),
                                 std::sin(tilt) * std::sin(azimuth), std::cos(tilt));
    const double offset = rng.uniform(cfg.depth_min, cfg.depth_max);

    // Centre the plane's rectangle on a random viewing direction.
    const Eigen::Vector3d dir(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 1.0);
    const Eigen::Vector3d hit = dir * (offset / normal.dot(dir));
    const TexturedPlane probe(normal, offset, Texture{}, PlaneExtent{});
    const Eigen::Vector2d centre = probe.plane_coords(hit);
    const double ha = rng.uniform(cfg.half_size_min, cfg.half_size_max);
    const double hb = rng.uniform(cfg.half_size_min, cfg.half_size_max);

    const double mean = rng.uniform(0.25, 0.75);
    const double budget = std::min(mean, 1.0 - mean) - 0.05;
    scene.planes.emplace_back(
        normal, offset, gen_texture(mean, budget, cfg, rng.next()),
        PlaneExtent{centre.x() - ha, centre.x() + ha, centre.y() - hb, centre.y() + hb});
  }

  const double back_offset = cfg.depth_max + 1.5;
  const double back_half = 4.0 * back_offset;
  const double mean = rng.uniform(0.3, 0.7);
  scene.planes.emplace_back(Eigen::Vector3d::UnitZ(), back_offset,
                            gen_texture(mean, std::min(mean, 1.0 - mean) - 0.05, cfg, rng.next()),
                            PlaneExtent{-back_half, back_half, -back_half, back_half});
  validate_scene(scene);
  return scene;
}

bool trajectory_clear_of_planes(const Trajectory& traj, const PlanarScene& scene,
                                double clearance) {
  for (Timestamp t = traj.t_begin();; t = std::min(t + 1000, traj.t_end())) {
    const Eigen::Vector3d p = traj.pose_at(t).position;
    for (const TexturedPlane& plane : scene.planes) {
      if (plane.signed_distance(p) < clearance) return false;
    }
    if (t == traj.t_end()) break;
  }
  return true;
}

namespace {

bool speed_within(const Trajectory& traj, double lo, double hi) {
  constexpr double kSlack = 1e-9;
  for (Timestamp t = traj.t_begin();; t = std::min(t + 1000, traj.t_end())) {
    const double speed = traj.velocity_at(static_cast<double>(t)).norm();
    if (speed < lo - kSlack || speed > hi + kSlack) return false;
    if (t == traj.t_end()) break;
  }
  return true;
}

bool rotation_rate_within(const Trajectory& traj, double max_rate) {
  const auto& w = traj.waypoints();
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const double angle = w[k].pose.orientation.angularDistance(w[k + 1].pose.orientation);
    const double seconds = static_cast<double>(w[k + 1].t - w[k].t) * 1e-6;
    if (angle > max_rate * seconds + 1e-12) return false;
  }
  return true;
}

}  // namespace

Trajectory gen_trajectory(const TrajectoryConfig& cfg, std::uint64_t seed,
                          const PlanarScene& scene) {
  if (cfg.duration_us <= 0) throw Error(ErrorCode::kConfig, "trajectory duration must be > 0");
  if (cfg.waypoints_min < 2 || cfg.waypoints_min > cfg.waypoints_max) {
    throw Error(ErrorCode::kConfig, "trajectory waypoint range must be non-empty and >= 2");
  }
  if (!(cfg.speed_min >= 0.0 && cfg.speed_min <= cfg.speed_max)) {
    throw Error(ErrorCode::kConfig, "trajectory speed bounds must satisfy 0 <= min <= max");
  }
  if (!(cfg.max_rotation_rate >= 0.0) || !(cfg.max_rotation_deviation >= 0.0)) {
    throw Error(ErrorCode::kConfig, "trajectory rotation bounds must be >= 0");
  }
  if (cfg.max_rounds < 1) throw Error(ErrorCode::kConfig, "trajectory max_rounds must be >= 1");

  const bool stationary = cfg.speed_max == 0.0;
  const double seconds = static_cast<double>(cfg.duration_us) * 1e-6;
  if (!stationary) {
    const double line_speed = (cfg.end - cfg.start).norm() / seconds;
    if (line_speed < cfg.speed_min || line_speed > cfg.speed_max) {
      throw Error(ErrorCode::kConfig,
                  "start-to-end speed " + std::to_string(line_speed) +
                      " is outside the configured speed bounds");
    }
  } else if (cfg.speed_min > 0.0) {
    throw Error(ErrorCode::kConfig, "speed_max = 0 requires speed_min = 0");
  }

  Rng rng(seed);
  for (int round = 0; round < cfg.max_rounds; ++round) {
    // The final round is the unperturbed straight line.
    const double scale = (round + 1 == cfg.max_rounds) ? 0.0 : std::pow(0.7, round);
    const int n = rng.uniform_int(cfg.waypoints_min, cfg.waypoints_max);
    const double segment_s = seconds / (n - 1);

    std::vector<Waypoint> waypoints;
    waypoints.reserve(static_cast<std::size_t>(n));
    Eigen::Vector3d omega = random_in_ball(rng, cfg.max_rotation_deviation * scale);
    for (int k = 0; k < n; ++k) {
      const double f = static_cast<double>(k) / (n - 1);
      Waypoint w;
      w.t = static_cast<Timestamp>(std::llround(f * static_cast<double>(cfg.duration_us)));
      if (stationary) {
        w.pose.position = cfg.start;
      } else {
        w.pose.position = cfg.start + f * (cfg.end - cfg.start);
        if (k > 0 && k + 1 < n) w.pose.position += random_in_ball(rng, cfg.jitter * scale);
      }
      if (k > 0) {
        const double step = 0.9 * cfg.max_rotation_rate * segment_s * scale * rng.uniform();
        omega += random_unit(rng) * step;
        const double norm = omega.norm();
        if (norm > cfg.max_rotation_deviation) omega *= cfg.max_rotation_deviation / norm;
      }
      w.pose.orientation = exp_map(omega);
      waypoints.push_back(w);
    }

    Trajectory traj(std::move(waypoints));
    if (!stationary && !speed_within(traj, cfg.speed_min, cfg.speed_max)) continue;
    if (!rotation_rate_within(traj, cfg.max_rotation_rate)) continue;
    if (!trajectory_clear_of_planes(traj, scene, cfg.clearance)) continue;
    return traj;
  }
  throw Error(ErrorCode::kGenerationFailure,
              "no valid trajectory after " + std::to_string(cfg.max_rounds) + " rounds");
}

}  // namespace evflow::scene
