#include "evflow/scene/render.hpp"

#include <algorithm>
#include <cmath>

#include "evflow/core/parallel.hpp"

namespace evflow::scene {

CameraView::CameraView(const PlanarScene& scene, const Pose& pose, const CameraIntrinsics& K)
    : scene_(&scene), pose_(pose), K_(K) {
  const Eigen::Matrix3d R = pose.rotation();
  const Eigen::Vector3d& C = pose.position;
  terms_.reserve(scene.planes.size());
  for (const TexturedPlane& plane : scene.planes) {
    const Eigen::Vector3d rel = C - plane.origin();
    terms_.push_back(PlaneTerms{
        R.transpose() * plane.normal(),
        plane.signed_distance(C),
        R.transpose() * plane.axis_a(),
        R.transpose() * plane.axis_b(),
        rel.dot(plane.axis_a()),
        rel.dot(plane.axis_b()),
    });
  }
}

RayHit CameraView::cast(double x, double y) const {
  const Eigen::Vector3d dir((x - K_.cx) / K_.fx, (y - K_.cy) / K_.fy, 1.0);
  RayHit best;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const PlaneTerms& pt = terms_[k];
    const double denom = pt.normal_cam.dot(dir);
    if (denom == 0.0) continue;
    const double depth = pt.distance / denom;
    if (!(depth > 0.0) || depth >= best.depth) continue;
    const double a = pt.a0 + depth * pt.axis_a_cam.dot(dir);
    const double b = pt.b0 + depth * pt.axis_b_cam.dot(dir);
    if (!scene_->planes[k].extent().contains(a, b)) continue;
    best.plane = static_cast<int>(k);
    best.depth = depth;
  }
  return best;
}

Eigen::Vector2d CameraView::plane_coords(int plane, double x, double y, double depth) const {
  const Eigen::Vector3d dir((x - K_.cx) / K_.fx, (y - K_.cy) / K_.fy, 1.0);
  const PlaneTerms& pt = terms_[static_cast<std::size_t>(plane)];
  return {pt.a0 + depth * pt.axis_a_cam.dot(dir), pt.b0 + depth * pt.axis_b_cam.dot(dir)};
}

Frame render_frame(const PlanarScene& scene, const Pose& pose, const CameraIntrinsics& K,
                   Timestamp t) {
  const CameraView view(scene, pose, K);
  Frame frame{Grid<double>(K.width, K.height, scene.background), t};
  parallel_for(static_cast<std::size_t>(K.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    auto out = frame.intensity.row(y);
    for (int x = 0; x < K.width; ++x) {
      const RayHit hit = view.cast(x, y);
      if (hit.plane < 0) continue;
      const Eigen::Vector2d ab = view.plane_coords(hit.plane, x, y, hit.depth);
      const double value =
          scene.planes[static_cast<std::size_t>(hit.plane)].texture().evaluate(ab.x(), ab.y());
      out[static_cast<std::size_t>(x)] = std::clamp(value, 0.0, 1.0);
    }
  });
  return frame;
}

PoseWarp::PoseWarp(const PlanarScene& scene, const Pose& from, const Pose& to,
                   const CameraIntrinsics& K)
    : from_(scene, from, K), to_(scene, to, K) {
  const Eigen::Matrix3d Ri = from.rotation();
  const Eigen::Matrix3d Rj = to.rotation();
  const Eigen::Matrix3d R_rel = Rj.transpose() * Ri;
  const Eigen::Vector3d t_rel = Rj.transpose() * (from.position - to.position);
  const Eigen::Matrix3d Km = K.matrix();
  const Eigen::Matrix3d Kinv = K.inverse();
  infinite_ = Km * R_rel * Kinv;
  homographies_.reserve(scene.planes.size());
  for (const TexturedPlane& plane : scene.planes) {
    const Eigen::Vector3d n_i = Ri.transpose() * plane.normal();
    const double d_i = plane.signed_distance(from.position);
    homographies_.push_back(Km * (R_rel + t_rel * n_i.transpose() / d_i) * Kinv);
  }
}

std::optional<Eigen::Vector2d> PoseWarp::map(double x, double y) const {
  const RayHit hit = from_.cast(x, y);
  const Eigen::Matrix3d& H =
      hit.plane >= 0 ? homographies_[static_cast<std::size_t>(hit.plane)] : infinite_;
  const Eigen::Vector3d p = H * Eigen::Vector3d(x, y, 1.0);
  if (!(p.z() > 0.0)) return std::nullopt;
  const double xj = p.x() / p.z();
  const double yj = p.y() / p.z();
  const CameraIntrinsics& K = to_.intrinsics();
  if (!(xj >= -0.5 && xj < K.width - 0.5 && yj >= -0.5 && yj < K.height - 0.5)) {
    return std::nullopt;
  }
  const RayHit seen = to_.cast(xj, yj);
  if (hit.plane < 0) {
    if (seen.plane >= 0) return std::nullopt;
  } else {
    // Third homogeneous coordinate is depth_j / depth_i for plane points.
    const double depth_j = p.z() * hit.depth;
    if (seen.plane >= 0 && seen.plane != hit.plane && seen.depth < depth_j * (1.0 - 1e-9)) {
      return std::nullopt;
    }
  }
  return Eigen::Vector2d(xj, yj);
}

FlowField analytic_flow(const PlanarScene& scene, const Pose& pose_i, const Pose& pose_j,
                        const CameraIntrinsics& K) {
  const PoseWarp warp(scene, pose_i, pose_j, K);
  FlowField flow(K.width, K.height);
  parallel_for(static_cast<std::size_t>(K.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < K.width; ++x) {
      const auto mapped = warp.map(x, y);
      if (!mapped) continue;
      flow.u(x, y) = static_cast<float>(mapped->x() - x);
      flow.v(x, y) = static_cast<float>(mapped->y() - y);
      flow.valid(x, y) = 1;
    }
  });
  return flow;
}

double max_flow_magnitude(const PlanarScene& scene, const Pose& from, const Pose& to,
                          const CameraIntrinsics& K) {
  const PoseWarp warp(scene, from, to, K);
  std::vector<double> row_max(static_cast<std::size_t>(K.height), 0.0);
  parallel_for(static_cast<std::size_t>(K.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    double best = 0.0;
    for (int x = 0; x < K.width; ++x) {
      const auto mapped = warp.map(x, y);
      if (!mapped) continue;
      best = std::max(best, (*mapped - Eigen::Vector2d(x, y)).squaredNorm());
    }
    row_max[row] = best;
  });
  return std::sqrt(*std::max_element(row_max.begin(), row_max.end()));
}

}  // namespace evflow::scene
