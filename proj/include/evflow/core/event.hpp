#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace evflow {

// Microseconds.
using Timestamp = std::int64_t;

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Timestamp t = 0;
  std::int8_t p = 1;  // -1 or +1

  friend bool operator==(const Event&, const Event&) = default;
};

// Repo-wide stream order: t, then y, then x, then p.
inline bool event_before(const Event& a, const Event& b) noexcept {
  return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

struct EventStream {
  std::vector<Event> events;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  Timestamp t_start = 0;
  Timestamp t_end = 0;

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

struct StreamViolation {
  // Index of the first offending event; npos for header-level problems.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t index = npos;
  std::string reason;
};

// Empty optional when every EventStream invariant holds.
std::optional<StreamViolation> validate_stream(const EventStream& stream);

// Events with a <= t < b, in order. When b equals the stream's t_end the
// window is closed on the right, so slicing [t_start, t_end] is the identity.
// Throws Error{kInvalidWindow} when a > b.
EventStream slice_by_time(const EventStream& stream, Timestamp a, Timestamp b);

}  // namespace evflow
