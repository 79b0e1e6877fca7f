#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "evflow/core/frame.hpp"
#include "evflow/repr/voxel.hpp"

namespace evflow::metrics {

enum class EvalMode { kDense, kSparse };

const char* to_string(EvalMode mode);
// Throws Error{kConfig} for anything but "dense" / "sparse".
EvalMode parse_eval_mode(const std::string& text);

struct EvalReport {
  double epe = 0.0;
  double out_pct = 0.0;
  std::size_t n_pixels = 0;
  EvalMode mode = EvalMode::kDense;
  // Set when the evaluation mask is empty; epe and out_pct are then 0.
  bool degenerate = false;
};

// A pixel is an outlier when its end-point error exceeds both 3 px and 5% of
// the ground-truth magnitude.
inline constexpr double kOutlierAbsPx = 3.0;
inline constexpr double kOutlierRel = 0.05;

// Mean end-point error over mask-true pixels; 0 for an empty mask.
// Throws Error{kShape} when pred, gt and mask sizes differ.
double epe(const FlowField& pred, const FlowField& gt, const Mask& mask);
// Outlier percentage in [0, 100] over mask-true pixels; 0 for an empty mask.
double outlier_pct(const FlowField& pred, const FlowField& gt, const Mask& mask);

// dense: mask = gt.valid; sparse: gt.valid ∧ valid_mask(*events).
// Throws Error{kConfig} for sparse mode without events, Error{kShape} when
// the event grid does not match the flow size.
EvalReport evaluate(const FlowField& pred, const FlowField& gt, EvalMode mode,
                    const repr::VoxelGrid* events = nullptr);

}  // namespace evflow::metrics
