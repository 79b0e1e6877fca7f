#pragma once

#include "evflow/core/event.hpp"
#include "evflow/core/grid.hpp"

namespace evflow {

// Normalized intensity image in [0, 1].
struct Frame {
  Grid<double> intensity;
  Timestamp t = 0;
};

// Per-pixel log intensity, same layout as Frame.
struct LogFrame {
  Grid<double> level;
  Timestamp t = 0;
};

// Dense displacement in pixels. u and v are only meaningful where valid != 0.
struct FlowField {
  Grid<float> u;
  Grid<float> v;
  Mask valid;

  FlowField() = default;
  FlowField(int width, int height)
      : u(width, height, 0.0f), v(width, height, 0.0f), valid(width, height, 0) {}

  int width() const noexcept { return u.width(); }
  int height() const noexcept { return u.height(); }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

}  // namespace evflow
