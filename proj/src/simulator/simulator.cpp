#include "evflow/simulator/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "evflow/core/error.hpp"
#include "evflow/core/parallel.hpp"
#include "evflow/core/rng.hpp"

namespace evflow::simulator {
namespace {

constexpr int kTileRows = 8;

struct PixelThresholds {
  double on;
  double off;
};

PixelThresholds thresholds_for(const SimulatorConfig& cfg, std::size_t pixel) {
  PixelThresholds th{cfg.on_threshold(), cfg.off_threshold()};
  if (cfg.threshold_sigma > 0.0) {
    Rng rng(mix_seed(cfg.noise_seed, 2 * pixel));
    th.on *= std::max(0.01, 1.0 + cfg.threshold_sigma * rng.normal());
    th.off *= std::max(0.01, 1.0 + cfg.threshold_sigma * rng.normal());
  }
  return th;
}

Timestamp round_us(double t) { return static_cast<Timestamp>(std::llround(t)); }

void emit(std::vector<Event>& out, PixelTriggerState& state, const SimulatorConfig& cfg, int x,
          int y, double t_exact, int polarity) {
  const Timestamp t = round_us(t_exact);
  if (cfg.refractory_us > 0 && state.has_event && t - state.last_event < cfg.refractory_us) {
    return;
  }
  out.push_back(Event{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t,
                      static_cast<std::int8_t>(polarity)});
  state.last_event = t;
  state.has_event = true;
}

void shot_noise(std::vector<Event>& out, const SimulatorConfig& cfg, std::size_t pixel, int x,
                int y, Timestamp t0, Timestamp t1) {
  Rng rng(mix_seed(cfg.noise_seed, 2 * pixel + 1));
  const double mean_gap_us = 1e6 / cfg.shot_noise_rate_hz;
  double t = static_cast<double>(t0);
  while (true) {
    t += -std::log(1.0 - rng.uniform()) * mean_gap_us;
    if (t > static_cast<double>(t1)) break;
    const int polarity = rng.uniform() < 0.5 ? -1 : 1;
    out.push_back(Event{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                        std::min(round_us(t), t1), static_cast<std::int8_t>(polarity)});
  }
}

// k-way merge of individually sorted tile lists.
std::vector<Event> merge_tiles(std::vector<std::vector<Event>>& tiles) {
  std::size_t total = 0;
  for (const auto& tile : tiles) total += tile.size();
  std::vector<Event> merged;
  merged.reserve(total);

  using Head = std::pair<std::size_t, std::size_t>;  // (tile, position)
  auto later = [&](const Head& a, const Head& b) {
    const Event& ea = tiles[a.first][a.second];
    const Event& eb = tiles[b.first][b.second];
    if (event_before(eb, ea)) return true;
    if (event_before(ea, eb)) return false;
    return a.first > b.first;
  };
  std::priority_queue<Head, std::vector<Head>, decltype(later)> heap(later);
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    if (!tiles[k].empty()) heap.emplace(k, 0);
  }
  while (!heap.empty()) {
    auto [k, i] = heap.top();
    heap.pop();
    merged.push_back(tiles[k][i]);
    if (i + 1 < tiles[k].size()) heap.emplace(k, i + 1);
  }
  return merged;
}

}  // namespace

void SimulatorConfig::validate() const {
  if (!(threshold > 0.0)) throw Error(ErrorCode::kConfig, "threshold C must be > 0");
  if (!symmetric && !(threshold_off > 0.0)) {
    throw Error(ErrorCode::kConfig, "OFF threshold must be > 0");
  }
  if (!(log_floor > 0.0)) throw Error(ErrorCode::kConfig, "log_floor must be > 0");
  if (refractory_us < 0) throw Error(ErrorCode::kConfig, "refractory period must be >= 0");
  if (!(threshold_sigma >= 0.0) || !(shot_noise_rate_hz >= 0.0)) {
    throw Error(ErrorCode::kConfig, "noise parameters must be >= 0");
  }
}

LogFrame log_transform(const Frame& frame, double log_floor) {
  LogFrame out{Grid<double>(frame.intensity.width(), frame.intensity.height()), frame.t};
  auto src = frame.intensity.data();
  auto dst = out.level.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::log(src[i] + log_floor);
  return out;
}

SimulationResult simulate(std::span<const LogFrame> frames, std::span<const Timestamp> times,
                          const SimulatorConfig& cfg) {
  cfg.validate();
  if (frames.size() != times.size()) {
    throw Error(ErrorCode::kAlignment, "simulate: " + std::to_string(frames.size()) +
                                           " frames for " + std::to_string(times.size()) +
                                           " schedule times");
  }
  if (frames.empty()) throw Error(ErrorCode::kAlignment, "simulate: no frames");
  const int width = frames.front().level.width();
  const int height = frames.front().level.height();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (frames[k].t != times[k]) {
      throw Error(ErrorCode::kAlignment,
                  "simulate: frame " + std::to_string(k) + " timestamp differs from schedule");
    }
    if (frames[k].level.width() != width || frames[k].level.height() != height) {
      throw Error(ErrorCode::kAlignment, "simulate: frame " + std::to_string(k) + " size differs");
    }
    if (k > 0 && times[k] <= times[k - 1]) {
      throw Error(ErrorCode::kAlignment, "simulate: schedule times must be strictly increasing");
    }
  }

  SimulationResult result;
  result.final_reference = Grid<double>(width, height);
  const auto tile_count = static_cast<std::size_t>((height + kTileRows - 1) / kTileRows);
  std::vector<std::vector<Event>> tiles(tile_count);

  parallel_for(tile_count, [&](std::size_t tile) {
    std::vector<Event>& out = tiles[tile];
    const int y_begin = static_cast<int>(tile) * kTileRows;
    const int y_end = std::min(height, y_begin + kTileRows);
    for (int y = y_begin; y < y_end; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t pixel =
            static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
        const PixelThresholds th = thresholds_for(cfg, pixel);
        PixelTriggerState state{frames.front().level(x, y), times.front(), false};
        for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
          const double la = frames[k].level(x, y);
          const double lb = frames[k + 1].level(x, y);
          const double delta = lb - la;
          const auto ta = static_cast<double>(times[k]);
          const double span = static_cast<double>(times[k + 1]) - ta;
          if (delta > 0.0) {
            while (lb - state.reference >= th.on) {
              const double level = state.reference + th.on;
              const double f = std::clamp((level - la) / delta, 0.0, 1.0);
              emit(out, state, cfg, x, y, ta + f * span, +1);
              state.reference = level;
            }
          } else if (delta < 0.0) {
            while (state.reference - lb >= th.off) {
              const double level = state.reference - th.off;
              const double f = std::clamp((level - la) / delta, 0.0, 1.0);
              emit(out, state, cfg, x, y, ta + f * span, -1);
              state.reference = level;
            }
          }
        }
        result.final_reference(x, y) = state.reference;
        if (cfg.shot_noise_rate_hz > 0.0) {
          shot_noise(out, cfg, pixel, x, y, times.front(), times.back());
        }
      }
    }
    std::sort(out.begin(), out.end(), event_before);
  });

  result.stream.events = merge_tiles(tiles);
  result.stream.width = static_cast<std::uint32_t>(width);
  result.stream.height = static_cast<std::uint32_t>(height);
  result.stream.t_start = times.front();
  result.stream.t_end = times.back();
  return result;
}

EventStream generate_events(std::span<const LogFrame> frames, std::span<const Timestamp> times,
                            const SimulatorConfig& cfg) {
  return simulate(frames, times, cfg).stream;
}

std::vector<std::pair<double, EventStream>> multi_density(std::span<const LogFrame> frames,
                                                          std::span<const Timestamp> times,
                                                          std::span<const double> thresholds,
                                                          const SimulatorConfig& base) {
  if (thresholds.empty()) throw Error(ErrorCode::kConfig, "multi_density: empty threshold list");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0)) {
      throw Error(ErrorCode::kConfig, "multi_density: thresholds must be > 0");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (thresholds[j] == thresholds[i]) {
        throw Error(ErrorCode::kConfig, "multi_density: thresholds must be distinct");
      }
    }
  }
  std::vector<std::pair<double, EventStream>> out;
  out.reserve(thresholds.size());
  for (double c : thresholds) {
    SimulatorConfig cfg = base;
    cfg.threshold = c;
    if (cfg.symmetric) cfg.threshold_off = c;
    out.emplace_back(c, generate_events(frames, times, cfg));
  }
  return out;
}

}  // namespace evflow::simulator
