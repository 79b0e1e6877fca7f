#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <sstream>

namespace testsupport {

std::vector<std::pair<std::string, std::string>> tree_contents(const std::filesystem::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.emplace_back(std::filesystem::relative(entry.path(), root).generic_string(), ss.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LogFrame> smooth_video(std::uint64_t seed, int width, int height,
                                   const std::vector<Timestamp>& times) {
  Rng rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  const double span = static_cast<double>(times.back() - times.front());
  const double kx = rng.uniform(0.1, 0.6);
  const double ky = rng.uniform(0.1, 0.6);
  const double speed = rng.uniform(0.5, 3.0);
  const double amp = rng.uniform(0.3, 1.5);
  const double base = rng.uniform(-2.0, -0.5);
  std::vector<LogFrame> frames;
  for (Timestamp t : times) {
    const double s = static_cast<double>(t - times.front()) / span;
    LogFrame f{Grid<double>(width, height), t};
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        f.level(x, y) = base + amp * std::sin(kx * x + ky * y - two_pi * speed * s) +
                        0.3 * std::cos(0.7 * kx * y + two_pi * 0.7 * s);
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<std::vector<OracleEvent>> dense_oracle(const std::vector<LogFrame>& frames,
                                                   const std::vector<Timestamp>& times, double c) {
  const int w = frames.front().level.width();
  const int h = frames.front().level.height();
  std::vector<std::vector<OracleEvent>> out(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto& evs = out[static_cast<std::size_t>(y * w + x)];
      double ref = frames.front().level(x, y);
      for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
        const double la = frames[k].level(x, y);
        const double lb = frames[k + 1].level(x, y);
        const std::int64_t a_ns = times[k] * 1000;
        const std::int64_t b_ns = times[k + 1] * 1000;
        const double slope = (lb - la) / static_cast<double>(b_ns - a_ns);
        for (std::int64_t t = a_ns + 1; t <= b_ns; ++t) {
          const double level = t == b_ns ? lb : la + slope * static_cast<double>(t - a_ns);
          while (level - ref >= c) {
            ref += c;
            evs.push_back({(t + 500) / 1000, +1});
          }
          while (ref - level >= c) {
            ref -= c;
            evs.push_back({(t + 500) / 1000, -1});
          }
        }
      }
    }
  }
  return out;
}

std::vector<Timestamp> random_times(Rng& rng, int count, int lo, int hi) {
  std::vector<Timestamp> t{0};
  while (static_cast<int>(t.size()) < count) t.push_back(t.back() + rng.uniform_int(lo, hi));
  return t;
}

}  // namespace testsupport
