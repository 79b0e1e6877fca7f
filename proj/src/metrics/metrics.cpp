#include "evflow/metrics/metrics.hpp"

#include <cmath>
#include <string>

#include "evflow/core/error.hpp"

namespace evflow::metrics {
namespace {

void check_shapes(const FlowField& pred, const FlowField& gt, const Mask& mask) {
  if (!pred.u.same_shape(gt.u) || !pred.v.same_shape(gt.v) || !pred.u.same_shape(pred.v) ||
      !gt.u.same_shape(mask)) {
    throw Error(ErrorCode::kShape, "flow metrics: prediction, ground truth and mask sizes differ");
  }
}

double pixel_error(const FlowField& pred, const FlowField& gt, int x, int y) {
  const double du = static_cast<double>(pred.u(x, y)) - gt.u(x, y);
  const double dv = static_cast<double>(pred.v(x, y)) - gt.v(x, y);
  return std::sqrt(du * du + dv * dv);
}

struct Totals {
  double error_sum = 0.0;
  std::size_t outliers = 0;
  std::size_t count = 0;
};

Totals accumulate(const FlowField& pred, const FlowField& gt, const Mask& mask) {
  check_shapes(pred, gt, mask);
  Totals totals;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!mask(x, y)) continue;
      const double err = pixel_error(pred, gt, x, y);
      const double gu = gt.u(x, y);
      const double gv = gt.v(x, y);
      const double magnitude = std::sqrt(gu * gu + gv * gv);
      totals.error_sum += err;
      if (err > kOutlierAbsPx && err > kOutlierRel * magnitude) ++totals.outliers;
      ++totals.count;
    }
  }
  return totals;
}

}  // namespace

const char* to_string(EvalMode mode) { return mode == EvalMode::kDense ? "dense" : "sparse"; }

EvalMode parse_eval_mode(const std::string& text) {
  if (text == "dense") return EvalMode::kDense;
  if (text == "sparse") return EvalMode::kSparse;
  throw Error(ErrorCode::kConfig, "unknown evaluation mode '" + text + "'");
}

double epe(const FlowField& pred, const FlowField& gt, const Mask& mask) {
  const Totals t = accumulate(pred, gt, mask);
  return t.count == 0 ? 0.0 : t.error_sum / static_cast<double>(t.count);
}

double outlier_pct(const FlowField& pred, const FlowField& gt, const Mask& mask) {
  const Totals t = accumulate(pred, gt, mask);
  return t.count == 0 ? 0.0 : 100.0 * static_cast<double>(t.outliers) / static_cast<double>(t.count);
}

EvalReport evaluate(const FlowField& pred, const FlowField& gt, EvalMode mode,
                    const repr::VoxelGrid* events) {
  Mask mask = gt.valid;
  if (mode == EvalMode::kSparse) {
    if (events == nullptr) throw Error(ErrorCode::kConfig, "sparse evaluation requires events");
    if (events->width() != gt.width() || events->height() != gt.height()) {
      throw Error(ErrorCode::kShape, "event grid size differs from flow size");
    }
    const Mask active = repr::valid_mask(*events);
    auto m = mask.data();
    auto a = active.data();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = (m[i] && a[i]) ? 1 : 0;
  }
  const Totals t = accumulate(pred, gt, mask);
  EvalReport report;
  report.mode = mode;
  report.n_pixels = t.count;
  report.degenerate = t.count == 0;
  if (t.count > 0) {
    report.epe = t.error_sum / static_cast<double>(t.count);
    report.out_pct = 100.0 * static_cast<double>(t.outliers) / static_cast<double>(t.count);
  }
  return report;
}

}  // namespace evflow::metrics
