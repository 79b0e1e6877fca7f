#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "evflow/core/event.hpp"

namespace evflow {

// Camera pose in world coordinates. orientation rotates camera-frame vectors
// into the world frame; the camera looks along its +z axis, x right, y down.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Eigen::Matrix3d rotation() const { return orientation.toRotationMatrix(); }
};

struct Waypoint {
  Timestamp t = 0;
  Pose pose;
};

// Smooth camera path: Catmull-Rom (cubic Hermite) position through the
// waypoints with finite-difference tangents, slerp orientation per segment.
class Trajectory {
 public:
  Trajectory() = default;
  // Throws Error{kConfig} unless times are strictly increasing, there is at
  // least one waypoint and every quaternion is unit within 1e-9.
  explicit Trajectory(std::vector<Waypoint> waypoints);

  const std::vector<Waypoint>& waypoints() const noexcept { return waypoints_; }
  Timestamp t_begin() const { return waypoints_.front().t; }
  Timestamp t_end() const { return waypoints_.back().t; }

  // Throws Error{kRange} outside [t_begin, t_end].
  Pose pose_at(Timestamp t) const;
  Pose pose_at_precise(double t_us) const;
  // Position derivative in scene units per second.
  Eigen::Vector3d velocity_at(double t_us) const;

 private:
  std::size_t segment_for(double t_us) const;
  Eigen::Vector3d tangent(std::size_t i) const;  // units per microsecond

  std::vector<Waypoint> waypoints_;
};

Pose pose_at(const Trajectory& trajectory, Timestamp t);

}  // namespace evflow
