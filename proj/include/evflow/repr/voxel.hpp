#pragma once

#include <cstddef>
#include <vector>

#include "evflow/core/event.hpp"
#include "evflow/core/grid.hpp"

namespace evflow::repr {

// B×H×W signed temporal-bin accumulation of an event window.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  // Throws Error{kShape} for bins < 2 or negative sizes.
  VoxelGrid(int bins, int height, int width, Timestamp t0 = 0, Timestamp tN = 0);

  int bins() const noexcept { return bins_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  Timestamp t0() const noexcept { return t0_; }
  Timestamp tN() const noexcept { return tN_; }

  float& at(int b, int y, int x) { return values_[index(b, y, x)]; }
  float at(int b, int y, int x) const { return values_[index(b, y, x)]; }
  std::vector<float>& values() noexcept { return values_; }
  const std::vector<float>& values() const noexcept { return values_; }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  std::size_t index(int b, int y, int x) const {
    return (static_cast<std::size_t>(b) * static_cast<std::size_t>(height_) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int bins_ = 0;
  int height_ = 0;
  int width_ = 0;
  Timestamp t0_ = 0;
  Timestamp tN_ = 0;
  std::vector<float> values_;
};

inline constexpr int kDefaultBins = 5;

// Bilinear temporal kernel max(0, 1 − |b − s|).
inline double temporal_kernel(double b, double s) noexcept {
  const double d = b > s ? b - s : s - b;
  return d < 1.0 ? 1.0 - d : 0.0;
}

// Normalized bin coordinate s = (t − t0) / (tN − t0) · (B − 1).
double bin_coordinate(Timestamp t, Timestamp t0, Timestamp tN, int bins);

// Each event adds p · max(0, 1 − |b − s|) to every bin b at its pixel.
// Accumulates in double, chunk by chunk in a fixed order, then stores float.
// Throws Error{kInvalidWindow} when tN <= t0 or an event lies outside
// [t0, tN], Error{kShape} for bins < 2.
VoxelGrid voxelize(const EventStream& stream, Timestamp t0, Timestamp tN, int bins = kDefaultBins);

// True where Σ_b |V(b, y, x)| > 0.
Mask valid_mask(const VoxelGrid& grid);

// Fraction of pixels with non-zero absolute bin mass; equals the mean of
// valid_mask. 0 for an empty grid.
double density(const VoxelGrid& grid);

}  // namespace evflow::repr
