#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "evflow/core/frame.hpp"
#include "evflow/core/trajectory.hpp"
#include "evflow/scene/planar_scene.hpp"

namespace evflow::scene {

struct RayHit {
  int plane = -1;  // -1: background
  double depth = std::numeric_limits<double>::infinity();  // camera z of the hit
};

// A scene seen from one pose, with per-plane terms precomputed so that
// casting a pixel ray costs a few dot products per plane.
class CameraView {
 public:
  CameraView(const PlanarScene& scene, const Pose& pose, const CameraIntrinsics& K);

  // Nearest plane hit by the ray through sub-pixel (x, y); pixel centres are
  // at integer coordinates.
  RayHit cast(double x, double y) const;
  // Plane coordinates of the hit of `plane` at depth along pixel (x, y).
  Eigen::Vector2d plane_coords(int plane, double x, double y, double depth) const;

  const PlanarScene& scene() const noexcept { return *scene_; }
  const CameraIntrinsics& intrinsics() const noexcept { return K_; }
  const Pose& pose() const noexcept { return pose_; }

 private:
  struct PlaneTerms {
    Eigen::Vector3d normal_cam;  // plane normal in camera frame
    double distance;             // signed distance of the camera centre
    Eigen::Vector3d axis_a_cam;
    Eigen::Vector3d axis_b_cam;
    double a0;
    double b0;
  };

  const PlanarScene* scene_;
  Pose pose_;
  CameraIntrinsics K_;
  std::vector<PlaneTerms> terms_;
};

Frame render_frame(const PlanarScene& scene, const Pose& pose, const CameraIntrinsics& K,
                   Timestamp t = 0);

// Exact pixel mapping between two poses through the plane-induced
// homographies K (R + t nᵀ / d) K⁻¹ (infinite homography for background).
class PoseWarp {
 public:
  PoseWarp(const PlanarScene& scene, const Pose& from, const Pose& to, const CameraIntrinsics& K);

  // Position of (x, y) in the `to` image, or nullopt if the point leaves the
  // image, goes behind the camera or is hidden by a nearer plane.
  std::optional<Eigen::Vector2d> map(double x, double y) const;

 private:
  CameraView from_;
  CameraView to_;
  std::vector<Eigen::Matrix3d> homographies_;
  Eigen::Matrix3d infinite_;
};

FlowField analytic_flow(const PlanarScene& scene, const Pose& pose_i, const Pose& pose_j,
                        const CameraIntrinsics& K);

// Largest |flow| over valid pixels of the warp from `from` to `to`.
double max_flow_magnitude(const PlanarScene& scene, const Pose& from, const Pose& to,
                          const CameraIntrinsics& K);

}  // namespace evflow::scene
