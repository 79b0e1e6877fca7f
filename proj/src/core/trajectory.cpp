#include "evflow/core/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evflow/core/error.hpp"

namespace evflow {

Trajectory::Trajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw Error(ErrorCode::kConfig, "trajectory needs at least one waypoint");
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    if (i > 0 && waypoints_[i].t <= waypoints_[i - 1].t) {
      throw Error(ErrorCode::kConfig,
                  "trajectory waypoint times must be strictly increasing (index " +
                      std::to_string(i) + ")");
    }
    if (std::abs(waypoints_[i].pose.orientation.norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kConfig,
                  "trajectory waypoint " + std::to_string(i) + " has a non-unit quaternion");
    }
  }
}

std::size_t Trajectory::segment_for(double t_us) const {
  // Index i of the segment [t_i, t_{i+1}] containing t; last segment for t_end.
  auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t_us,
                             [](double t, const Waypoint& w) { return t < static_cast<double>(w.t); });
  const auto i = static_cast<std::size_t>(std::distance(waypoints_.begin(), it));
  return std::min(i == 0 ? 0 : i - 1, waypoints_.size() - 2);
}

Eigen::Vector3d Trajectory::tangent(std::size_t i) const {
  const std::size_t n = waypoints_.size();
  const std::size_t lo = (i == 0) ? 0 : i - 1;
  const std::size_t hi = (i + 1 >= n) ? n - 1 : i + 1;
  const double dt = static_cast<double>(waypoints_[hi].t - waypoints_[lo].t);
  return (waypoints_[hi].pose.position - waypoints_[lo].pose.position) / dt;
}

Pose Trajectory::pose_at_precise(double t_us) const {
  if (waypoints_.empty() || t_us < static_cast<double>(t_begin()) ||
      t_us > static_cast<double>(t_end())) {
    throw Error(ErrorCode::kRange, "pose_at: t outside trajectory range");
  }
  if (waypoints_.size() == 1) return waypoints_.front().pose;

  const std::size_t i = segment_for(t_us);
  const Waypoint& w0 = waypoints_[i];
  const Waypoint& w1 = waypoints_[i + 1];
  if (t_us == static_cast<double>(w0.t)) return w0.pose;
  if (t_us == static_cast<double>(w1.t)) return w1.pose;

  const double h = static_cast<double>(w1.t - w0.t);
  const double s = (t_us - static_cast<double>(w0.t)) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;

  Pose out;
  // h00 = 1 - h01; this form keeps a motionless segment exactly constant.
  out.position = w0.pose.position + h01 * (w1.pose.position - w0.pose.position) +
                 h10 * h * tangent(i) + h11 * h * tangent(i + 1);
  if (w0.pose.orientation.coeffs() == w1.pose.orientation.coeffs()) {
    out.orientation = w0.pose.orientation;
  } else {
    out.orientation = w0.pose.orientation.slerp(s, w1.pose.orientation).normalized();
  }
  return out;
}

Pose Trajectory::pose_at(Timestamp t) const { return pose_at_precise(static_cast<double>(t)); }

Eigen::Vector3d Trajectory::velocity_at(double t_us) const {
  if (waypoints_.size() < 2) return Eigen::Vector3d::Zero();
  if (t_us < static_cast<double>(t_begin()) || t_us > static_cast<double>(t_end())) {
    throw Error(ErrorCode::kRange, "velocity_at: t outside trajectory range");
  }
  const std::size_t i = segment_for(t_us);
  const Waypoint& w0 = waypoints_[i];
  const Waypoint& w1 = waypoints_[i + 1];
  const double h = static_cast<double>(w1.t - w0.t);
  const double s = (t_us - static_cast<double>(w0.t)) / h;
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s;
  const double d11 = 3 * s2 - 2 * s;
  const Eigen::Vector3d per_us = (d00 * w0.pose.position + d10 * h * tangent(i) +
                                  d01 * w1.pose.position + d11 * h * tangent(i + 1)) /
                                 h;
  return per_us * 1e6;
}

Pose pose_at(const Trajectory& trajectory, Timestamp t) { return trajectory.pose_at(t); }

}  // namespace evflow
