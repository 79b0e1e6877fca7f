#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "evflow/core/event.hpp"
#include "evflow/core/frame.hpp"

namespace evflow::simulator {

struct SimulatorConfig {
  double threshold = 0.2;  // C, log-intensity units
  double log_floor = 0.01;
  bool symmetric = true;        // OFF events use `threshold` too
  double threshold_off = 0.2;   // used only when !symmetric

  // Realism extras, all off by default.
  Timestamp refractory_us = 0;     // crossings this soon after an event are dropped
  double threshold_sigma = 0.0;    // per-pixel relative Gaussian threshold spread
  double shot_noise_rate_hz = 0.0; // per-pixel Poisson noise events
  std::uint64_t noise_seed = 0;

  double on_threshold() const { return threshold; }
  double off_threshold() const { return symmetric ? threshold : threshold_off; }
  // Throws Error{kConfig} on C <= 0 or log_floor <= 0.
  void validate() const;
};

// Per-pixel trigger state: reference log level and time of the last event.
struct PixelTriggerState {
  double reference = 0.0;
  Timestamp last_event = 0;
  bool has_event = false;
};

// L = ln(I + log_floor) per pixel.
LogFrame log_transform(const Frame& frame, double log_floor);

struct SimulationResult {
  EventStream stream;
  Grid<double> final_reference;  // L_ref after the last frame
};

// Threshold-crossing event generation over log frames taken at `times`.
// L is linear in time between consecutive frames; every time it departs from
// the pixel's reference by the threshold an event is emitted at the exact
// crossing time (rounded to the nearest microsecond) and the reference moves
// by one threshold. References start at the first frame.
//
// Throws Error{kAlignment} when frames and times differ in count or frame
// timestamps differ from `times`, Error{kConfig} for an invalid cfg.
SimulationResult simulate(std::span<const LogFrame> frames, std::span<const Timestamp> times,
                          const SimulatorConfig& cfg);

EventStream generate_events(std::span<const LogFrame> frames, std::span<const Timestamp> times,
                            const SimulatorConfig& cfg);

// One independent generate_events run per threshold, in input order.
// Throws Error{kConfig} for an empty list or non-positive / repeated values.
std::vector<std::pair<double, EventStream>> multi_density(std::span<const LogFrame> frames,
                                                          std::span<const Timestamp> times,
                                                          std::span<const double> thresholds,
                                                          const SimulatorConfig& base = {});

}  // namespace evflow::simulator
