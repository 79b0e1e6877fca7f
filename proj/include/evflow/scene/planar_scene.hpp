#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace evflow::scene {

// One planar wave; frequencies are in cycles per scene unit along the plane's
// a and b axes.
struct Sinusoid {
  double amplitude = 0.0;
  double freq_a = 0.0;
  double freq_b = 0.0;
  double phase = 0.0;
};

// Band-limited periodic texture: mean + sum of sinusoids + a smoothed random
// lattice sampled bilinearly. Values outside [0, 1] are clamped at render time.
struct Texture {
  static constexpr std::size_t kMaxSinusoids = 8;

  double mean = 0.5;
  std::vector<Sinusoid> sinusoids;
  int lattice_size = 0;  // lattice is lattice_size × lattice_size, periodic
  double lattice_spacing = 1.0;
  double lattice_amplitude = 0.0;
  std::vector<double> lattice;  // row-major, values in [-1, 1]

  double evaluate(double a, double b) const;
};

struct PlaneExtent {
  double a_min = -1.0;
  double a_max = 1.0;
  double b_min = -1.0;
  double b_max = 1.0;

  bool contains(double a, double b) const noexcept {
    return a >= a_min && a <= a_max && b >= b_min && b <= b_max;
  }
};

// The plane {X : normal · X = offset}. The scene origin sits on the side
// normal points away from; cameras must stay on that side.
class TexturedPlane {
 public:
  TexturedPlane(const Eigen::Vector3d& normal, double offset, Texture texture, PlaneExtent extent);

  const Eigen::Vector3d& normal() const noexcept { return normal_; }
  double offset() const noexcept { return offset_; }
  const Texture& texture() const noexcept { return texture_; }
  const PlaneExtent& extent() const noexcept { return extent_; }
  // In-plane orthonormal axes; (normal, axis_a, axis_b) is right-handed up to sign.
  const Eigen::Vector3d& axis_a() const noexcept { return axis_a_; }
  const Eigen::Vector3d& axis_b() const noexcept { return axis_b_; }
  Eigen::Vector3d origin() const { return offset_ * normal_; }

  // Distance from point to the plane, positive on the origin side.
  double signed_distance(const Eigen::Vector3d& p) const { return offset_ - normal_.dot(p); }
  Eigen::Vector2d plane_coords(const Eigen::Vector3d& p) const;

 private:
  Eigen::Vector3d normal_;
  double offset_;
  Texture texture_;
  PlaneExtent extent_;
  Eigen::Vector3d axis_a_;
  Eigen::Vector3d axis_b_;
};

struct PlanarScene {
  static constexpr std::size_t kMaxPlanes = 8;

  std::vector<TexturedPlane> planes;
  double background = 0.5;
};

// Throws Error{kConfig} unless 1 <= planes <= 8, every offset > 0, every
// texture has at most 8 sinusoids and background is in [0, 1].
void validate_scene(const PlanarScene& scene);

struct CameraIntrinsics {
  double fx = 100.0;
  double fy = 100.0;
  double cx = 32.0;
  double cy = 32.0;
  int width = 64;
  int height = 64;

  Eigen::Matrix3d matrix() const;
  Eigen::Matrix3d inverse() const;
  // Throws Error{kConfig} on non-positive focal lengths or a principal point
  // outside the image.
  void validate() const;
  // Square pixels, principal point at the image centre.
  static CameraIntrinsics from_fov(int width, int height, double horizontal_fov_deg);
};

}  // namespace evflow::scene
