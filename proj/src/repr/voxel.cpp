#include "evflow/repr/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evflow/core/error.hpp"
#include "evflow/core/parallel.hpp"

namespace evflow::repr {
namespace {

constexpr std::size_t kChunkEvents = 1 << 16;

}  // namespace

VoxelGrid::VoxelGrid(int bins, int height, int width, Timestamp t0, Timestamp tN)
    : bins_(bins), height_(height), width_(width), t0_(t0), tN_(tN) {
  if (bins < 2) throw Error(ErrorCode::kShape, "voxel grid needs at least 2 bins");
  if (height < 0 || width < 0) throw Error(ErrorCode::kShape, "voxel grid size must be >= 0");
  values_.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(height) *
                     static_cast<std::size_t>(width),
                 0.0f);
}

double bin_coordinate(Timestamp t, Timestamp t0, Timestamp tN, int bins) {
  return static_cast<double>(t - t0) / static_cast<double>(tN - t0) * (bins - 1);
}

VoxelGrid voxelize(const EventStream& stream, Timestamp t0, Timestamp tN, int bins) {
  if (tN <= t0) throw Error(ErrorCode::kInvalidWindow, "voxelize: tN must be > t0");
  if (bins < 2) throw Error(ErrorCode::kShape, "voxelize: bins must be >= 2");
  const auto& events = stream.events;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].t < t0 || events[i].t > tN) {
      throw Error(ErrorCode::kInvalidWindow,
                  "voxelize: event " + std::to_string(i) + " outside [t0, tN]");
    }
    if (events[i].x >= stream.width || events[i].y >= stream.height) {
      throw Error(ErrorCode::kShape, "voxelize: event " + std::to_string(i) + " out of bounds");
    }
  }

  const int width = static_cast<int>(stream.width);
  const int height = static_cast<int>(stream.height);
  const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t cells = plane * static_cast<std::size_t>(bins);
  const std::size_t chunks = (events.size() + kChunkEvents - 1) / kChunkEvents;

  // Partial sums per chunk, added in chunk order so the result does not
  // depend on the number of workers.
  std::vector<std::vector<double>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double>& acc = partial[c];
    acc.assign(cells, 0.0);
    const std::size_t end = std::min(events.size(), (c + 1) * kChunkEvents);
    for (std::size_t i = c * kChunkEvents; i < end; ++i) {
      const Event& e = events[i];
      const double s = bin_coordinate(e.t, t0, tN, bins);
      const std::size_t pixel = static_cast<std::size_t>(e.y) * static_cast<std::size_t>(width) + e.x;
      const int lo = std::max(0, static_cast<int>(std::floor(s)));
      const int hi = std::min(bins - 1, lo + 1);
      for (int b = lo; b <= hi; ++b) {
        const double w = temporal_kernel(b, s);
        if (w > 0.0) acc[static_cast<std::size_t>(b) * plane + pixel] += e.p * w;
      }
    }
  });

  VoxelGrid grid(bins, height, width, t0, tN);
  std::vector<double> total(cells, 0.0);
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < cells; ++i) total[i] += acc[i];
  }
  auto& out = grid.values();
  for (std::size_t i = 0; i < cells; ++i) out[i] = static_cast<float>(total[i]);
  return grid;
}

Mask valid_mask(const VoxelGrid& grid) {
  Mask mask(grid.width(), grid.height(), 0);
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      double mass = 0.0;
      for (int b = 0; b < grid.bins(); ++b) mass += std::abs(static_cast<double>(grid.at(b, y, x)));
      mask(x, y) = mass > 0.0 ? 1 : 0;
    }
  }
  return mask;
}

double density(const VoxelGrid& grid) {
  const Mask mask = valid_mask(grid);
  if (mask.size() == 0) return 0.0;
  std::size_t active = 0;
  for (std::uint8_t v : mask.data()) active += v;
  return static_cast<double>(active) / static_cast<double>(mask.size());
}

}  // namespace evflow::repr
