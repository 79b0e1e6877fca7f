#include "evflow/scene/planar_scene.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "evflow/core/error.hpp"

namespace evflow::scene {
namespace {

int wrap(long long i, int n) {
  const long long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

}  // namespace

double Texture::evaluate(double a, double b) const {
  double value = mean;
  for (const Sinusoid& s : sinusoids) {
    value += s.amplitude *
             std::sin(2.0 * std::numbers::pi * (s.freq_a * a + s.freq_b * b) + s.phase);
  }
  if (lattice_size > 0 && lattice_amplitude != 0.0) {
    const double u = a / lattice_spacing;
    const double w = b / lattice_spacing;
    const double u0 = std::floor(u);
    const double w0 = std::floor(w);
    const double fu = u - u0;
    const double fw = w - w0;
    const int i0 = wrap(static_cast<long long>(u0), lattice_size);
    const int j0 = wrap(static_cast<long long>(w0), lattice_size);
    const int i1 = (i0 + 1) % lattice_size;
    const int j1 = (j0 + 1) % lattice_size;
    auto at = [&](int i, int j) {
      return lattice[static_cast<std::size_t>(j) * static_cast<std::size_t>(lattice_size) +
                     static_cast<std::size_t>(i)];
    };
    const double top = (1.0 - fu) * at(i0, j0) + fu * at(i1, j0);
    const double bottom = (1.0 - fu) * at(i0, j1) + fu * at(i1, j1);
    value += lattice_amplitude * ((1.0 - fw) * top + fw * bottom);
  }
  return value;
}

TexturedPlane::TexturedPlane(const Eigen::Vector3d& normal, double offset, Texture texture,
                             PlaneExtent extent)
    : normal_(normal.normalized()),
      offset_(offset),
      texture_(std::move(texture)),
      extent_(extent) {
  const Eigen::Vector3d helper =
      std::abs(normal_.y()) > 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  axis_a_ = helper.cross(normal_).normalized();
  axis_b_ = normal_.cross(axis_a_);
}

Eigen::Vector2d TexturedPlane::plane_coords(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d rel = p - origin();
  return {rel.dot(axis_a_), rel.dot(axis_b_)};
}

void validate_scene(const PlanarScene& scene) {
  if (scene.planes.empty() || scene.planes.size() > PlanarScene::kMaxPlanes) {
    throw Error(ErrorCode::kConfig, "scene must have between 1 and 8 planes, got " +
                                        std::to_string(scene.planes.size()));
  }
  if (!(scene.background >= 0.0 && scene.background <= 1.0)) {
    throw Error(ErrorCode::kConfig, "scene background intensity must be in [0, 1]");
  }
  for (std::size_t i = 0; i < scene.planes.size(); ++i) {
    const TexturedPlane& plane = scene.planes[i];
    if (!(plane.offset() > 0.0)) {
      throw Error(ErrorCode::kConfig, "plane " + std::to_string(i) + " must have offset > 0");
    }
    if (plane.texture().sinusoids.size() > Texture::kMaxSinusoids) {
      throw Error(ErrorCode::kConfig, "plane " + std::to_string(i) + " has more than 8 sinusoids");
    }
    const Texture& tex = plane.texture();
    if (tex.lattice_size < 0 ||
        tex.lattice.size() != static_cast<std::size_t>(tex.lattice_size) *
                                  static_cast<std::size_t>(tex.lattice_size) ||
        (tex.lattice_size > 0 && !(tex.lattice_spacing > 0.0))) {
      throw Error(ErrorCode::kConfig, "plane " + std::to_string(i) + " has a malformed lattice");
    }
  }
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraIntrinsics::inverse() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::validate() const {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kConfig, "image size must be positive");
  if (width > 65535 || height > 65535) {
    throw Error(ErrorCode::kConfig, "image size must fit in 16-bit event coordinates");
  }
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::kConfig, "focal lengths must be > 0");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::kConfig, "principal point must lie inside the image");
  }
}

CameraIntrinsics CameraIntrinsics::from_fov(int width, int height, double horizontal_fov_deg) {
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.fx = 0.5 * width / std::tan(0.5 * horizontal_fov_deg * std::numbers::pi / 180.0);
  k.fy = k.fx;
  k.cx = 0.5 * (width - 1);
  k.cy = 0.5 * (height - 1);
  return k;
}

}  // namespace evflow::scene
