#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "evflow/core/trajectory.hpp"
#include "evflow/scene/planar_scene.hpp"

namespace evflow::scene {

struct SceneConfig {
  int plane_count_min = 2;  // includes the backdrop
  int plane_count_max = 5;
  double depth_min = 1.5;
  double depth_max = 6.0;
  double max_tilt_deg = 35.0;
  double half_size_min = 0.4;  // plane half-extent, scene units
  double half_size_max = 2.0;
  int sinusoids_min = 3;
  int sinusoids_max = 6;
  double frequency_min = 0.3;  // cycles per scene unit
  double frequency_max = 3.0;
  int lattice_size = 16;
  double lattice_spacing = 0.2;
  double background = 0.5;
};

// Depth-ordered textured planes in front of a camera at the origin looking
// along +z. The last plane is a large fronto-parallel backdrop that fills the
// view for any camera near the origin.
PlanarScene gen_scene(const SceneConfig& cfg, std::uint64_t seed);

Texture gen_texture(double mean, double amplitude_budget, const SceneConfig& cfg, std::uint64_t seed);

struct TrajectoryConfig {
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d end = Eigen::Vector3d(0.3, 0.0, 0.0);
  Timestamp duration_us = 133'333;
  double speed_min = 0.0;    // scene units per second
  double speed_max = 6.0;
  double max_rotation_rate = 1.0;       // rad/s
  double max_rotation_deviation = 0.2;  // rad from the base orientation
  double jitter = 0.05;                 // lateral waypoint perturbation, scene units
  int waypoints_min = 4;
  int waypoints_max = 12;
  double clearance = 0.2;  // minimum distance to any plane, scene units
  int max_rounds = 64;
};

// Random smooth trajectory from cfg.start to cfg.end. Every round draws new
// waypoints with shrinking perturbations; a round is rejected when 1 ms
// sampling finds a speed outside [speed_min, speed_max], an angular rate above
// max_rotation_rate, or a camera position closer than `clearance` to (or
// behind) any scene plane. Throws Error{kGenerationFailure} after max_rounds
// and Error{kConfig} when the straight-line speed is itself outside the bounds.
// speed_max == 0 pins the position at cfg.start.
Trajectory gen_trajectory(const TrajectoryConfig& cfg, std::uint64_t seed, const PlanarScene& scene);

// Checks used by gen_trajectory's rejection loop; exposed for tests.
bool trajectory_clear_of_planes(const Trajectory& traj, const PlanarScene& scene, double clearance);

}  // namespace evflow::scene
