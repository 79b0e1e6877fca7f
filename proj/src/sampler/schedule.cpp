#include "evflow/sampler/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evflow/core/error.hpp"
#include "evflow/scene/render.hpp"

namespace evflow::sampler {
namespace {

// Interval acceptance slack; absorbs rounding on motions that land exactly
// on max_disp.
constexpr double kAcceptSlack = 1e-9;

Timestamp next_step(Timestamp previous, double displacement, double max_disp,
                    Timestamp remaining) {
  if (displacement <= 0.0) return remaining;
  const double estimate = static_cast<double>(previous) * max_disp / displacement;
  if (estimate >= static_cast<double>(remaining)) return remaining;
  return std::max<Timestamp>(1, static_cast<Timestamp>(std::floor(estimate + 1e-6)));
}

}  // namespace

double interval_displacement(const scene::PlanarScene& scene, const Trajectory& traj,
                             const scene::CameraIntrinsics& K, Timestamp a, Timestamp b) {
  const Pose pa = traj.pose_at(a);
  const Pose pb = traj.pose_at(b);
  return std::max(scene::max_flow_magnitude(scene, pa, pb, K),
                  scene::max_flow_magnitude(scene, pb, pa, K));
}

SampleSchedule plan_schedule(const scene::PlanarScene& scene, const Trajectory& traj,
                             const scene::CameraIntrinsics& K, Timestamp t_i, Timestamp t_j,
                             const PlanOptions& options) {
  if (t_i >= t_j) {
    throw Error(ErrorCode::kInvalidWindow, "plan_schedule: t_i must be < t_j");
  }
  if (t_i < traj.t_begin() || t_j > traj.t_end()) {
    throw Error(ErrorCode::kInvalidWindow, "plan_schedule: window outside the trajectory");
  }
  if (!(options.max_disp > 0.0)) {
    throw Error(ErrorCode::kConfig, "plan_schedule: max_disp must be > 0");
  }
  const double limit = options.max_disp + kAcceptSlack;

  SampleSchedule schedule;
  schedule.max_disp = options.max_disp;
  schedule.times.push_back(t_i);

  const Timestamp probe = std::clamp<Timestamp>((t_j - t_i) / 16, 1, t_j - t_i);
  Timestamp step = next_step(probe, interval_displacement(scene, traj, K, t_i, t_i + probe),
                             options.max_disp, t_j - t_i);

  Timestamp t = t_i;
  while (t < t_j) {
    Timestamp len = std::min(step, t_j - t);
    double disp = interval_displacement(scene, traj, K, t, t + len);
    while (disp > limit) {
      if (len == 1) {
        throw Error(ErrorCode::kPathologicalMotion,
                    "plan_schedule: displacement " + std::to_string(disp) +
                        " px over 1 us at t=" + std::to_string(t));
      }
      len = (len + 1) / 2;
      ++schedule.bisections;
      disp = interval_displacement(scene, traj, K, t, t + len);
    }
    t += len;
    schedule.times.push_back(t);
    schedule.displacements.push_back(disp);
    if (schedule.intervals() > options.max_intervals) {
      throw Error(ErrorCode::kPathologicalMotion,
                  "plan_schedule: more than " + std::to_string(options.max_intervals) +
                      " intervals");
    }
    step = next_step(len, disp, options.max_disp, std::max<Timestamp>(t_j - t, 1));
  }
  return schedule;
}

SampleSchedule plan_schedule_through(const scene::PlanarScene& scene, const Trajectory& traj,
                                     const scene::CameraIntrinsics& K,
                                     const std::vector<Timestamp>& knots,
                                     const PlanOptions& options) {
  if (knots.size() < 2) {
    throw Error(ErrorCode::kInvalidWindow, "plan_schedule_through: need at least two knots");
  }
  SampleSchedule all;
  all.max_disp = options.max_disp;
  all.times.push_back(knots.front());
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    SampleSchedule part = plan_schedule(scene, traj, K, knots[k], knots[k + 1], options);
    all.times.insert(all.times.end(), part.times.begin() + 1, part.times.end());
    all.displacements.insert(all.displacements.end(), part.displacements.begin(),
                             part.displacements.end());
    all.bisections += part.bisections;
    if (all.intervals() > options.max_intervals) {
      throw Error(ErrorCode::kPathologicalMotion, "plan_schedule_through: interval cap exceeded");
    }
  }
  return all;
}

}  // namespace evflow::sampler
