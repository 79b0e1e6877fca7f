#include "evflow/core/event.hpp"

#include <algorithm>

#include "evflow/core/error.hpp"

namespace evflow {

std::optional<StreamViolation> validate_stream(const EventStream& stream) {
  if (stream.t_start > stream.t_end) {
    return StreamViolation{StreamViolation::npos, "t_start > t_end"};
  }
  const auto& ev = stream.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const Event& e = ev[i];
    if (e.p != 1 && e.p != -1) return StreamViolation{i, "polarity not in {-1, +1}"};
    if (e.x >= stream.width || e.y >= stream.height) {
      return StreamViolation{i, "coordinates out of sensor bounds"};
    }
    if (e.t < stream.t_start || e.t > stream.t_end) {
      return StreamViolation{i, "timestamp outside [t_start, t_end]"};
    }
    if (i > 0 && event_before(e, ev[i - 1])) {
      return StreamViolation{i, "events not in (t, y, x, p) order"};
    }
  }
  return std::nullopt;
}

EventStream slice_by_time(const EventStream& stream, Timestamp a, Timestamp b) {
  if (a > b) {
    throw Error(ErrorCode::kInvalidWindow,
                "slice_by_time: window start " + std::to_string(a) + " > end " +
                    std::to_string(b));
  }
  const bool closed_right = (b == stream.t_end);
  const auto& ev = stream.events;
  auto first = std::lower_bound(ev.begin(), ev.end(), a,
                                [](const Event& e, Timestamp t) { return e.t < t; });
  auto last = closed_right
                  ? std::upper_bound(first, ev.end(), b,
                                     [](Timestamp t, const Event& e) { return t < e.t; })
                  : std::lower_bound(first, ev.end(), b,
                                     [](const Event& e, Timestamp t) { return e.t < t; });
  EventStream out;
  out.events.assign(first, last);
  out.width = stream.width;
  out.height = stream.height;
  out.t_start = a;
  out.t_end = b;
  return out;
}

}  // namespace evflow
