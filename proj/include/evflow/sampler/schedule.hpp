#pragma once

#include <cstddef>
#include <vector>

#include "evflow/core/trajectory.hpp"
#include "evflow/scene/planar_scene.hpp"

namespace evflow::sampler {

// Render timestamps between two label times such that no pixel moves more
// than max_disp pixels between consecutive frames.
struct SampleSchedule {
  std::vector<Timestamp> times;  // times.front() = t_i, times.back() = t_j
  double max_disp = 1.0;
  // Largest verified forward/backward displacement per interval.
  std::vector<double> displacements;
  std::size_t bisections = 0;

  std::size_t intervals() const { return times.empty() ? 0 : times.size() - 1; }
};

struct PlanOptions {
  double max_disp = 1.0;
  std::size_t max_intervals = 100'000;
};

// Max over pixels of the forward and backward analytic flow magnitudes
// between the poses at a and b.
double interval_displacement(const scene::PlanarScene& scene, const Trajectory& traj,
                             const scene::CameraIntrinsics& K, Timestamp a, Timestamp b);

// Step-size estimate from the displacement measured over the previous
// interval (next = previous · max_disp / |F|), followed by verified bisection
// of any candidate interval whose displacement exceeds max_disp. The first
// estimate comes from a probe over (t_j − t_i) / 16.
//
// Throws Error{kInvalidWindow} if t_i >= t_j or the window is outside the
// trajectory, Error{kPathologicalMotion} when a 1 µs interval still moves
// more than max_disp or the interval cap is exceeded.
SampleSchedule plan_schedule(const scene::PlanarScene& scene, const Trajectory& traj,
                             const scene::CameraIntrinsics& K, Timestamp t_i, Timestamp t_j,
                             const PlanOptions& options = {});

// Concatenates schedules over consecutive windows [t_0, t_1], [t_1, t_2], ...
// so that every boundary time is a knot.
SampleSchedule plan_schedule_through(const scene::PlanarScene& scene, const Trajectory& traj,
                                     const scene::CameraIntrinsics& K,
                                     const std::vector<Timestamp>& knots,
                                     const PlanOptions& options = {});

}  // namespace evflow::sampler
