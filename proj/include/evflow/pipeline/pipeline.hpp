#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evflow/core/trajectory.hpp"
#include "evflow/io/package.hpp"
#include "evflow/metrics/metrics.hpp"
#include "evflow/pipeline/config.hpp"
#include "evflow/sampler/schedule.hpp"
#include "evflow/scene/planar_scene.hpp"

namespace evflow::pipeline {

// 60 Hz (by default) label times t_0 .. t_{2·max dt}; samples are centred on
// t_{max dt}.
std::vector<Timestamp> label_times(const PipelineConfig& cfg);

// Scene, motion and events for one sample index, before packaging.
struct Sequence {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  scene::PlanarScene scene;
  scene::CameraIntrinsics intrinsics;
  Trajectory trajectory;
  std::vector<Timestamp> labels;
  sampler::SampleSchedule schedule;
  std::vector<std::pair<double, EventStream>> events;  // full sequence, per threshold
};

std::string sample_id(std::size_t index, int dt);

// Throws Error{kGenerationFailure} naming the sample when trajectory
// generation or scheduling fails.
Sequence build_sequence(const PipelineConfig& cfg, std::size_t index);
io::SampleParts sample_parts(const PipelineConfig& cfg, const Sequence& seq, int dt);

// Builds and packages every dt sample of one sequence under root.
std::vector<io::ManifestRecord> package_sequence(const PipelineConfig& cfg, std::size_t index,
                                                 const std::filesystem::path& root);

struct PipelineSummary {
  std::vector<io::ManifestRecord> records;
  std::vector<double> thresholds;
  std::vector<double> mean_density;  // per threshold, over both windows of every sample
  std::size_t frames_rendered = 0;
  double wall_seconds = 0.0;
};

// Generates cfg.samples sequences with a worker pool of cfg.jobs threads,
// packages them under root and writes the manifest plus the resolved config.
// Output bytes depend only on cfg, never on the worker count.
PipelineSummary run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& root);

// ----------------------------------------------------------------- eval

struct EvalOptions {
  std::filesystem::path predictions;
  std::filesystem::path dataset;
  metrics::EvalMode mode = metrics::EvalMode::kDense;
  std::optional<std::filesystem::path> events_dir;  // <dir>/<id>.evs for sparse masks
  std::optional<double> threshold;                  // dataset events used for sparse masks
};

struct SampleEval {
  std::string id;
  metrics::EvalReport dense;
  std::optional<metrics::EvalReport> sparse;
};

struct EvalSummary {
  std::vector<SampleEval> samples;
  std::vector<std::string> missing;
  metrics::EvalReport dense;  // pixel-weighted over all evaluated samples
  std::optional<metrics::EvalReport> sparse;
};

// Looks for <predictions>/<id>.flo, then <predictions>/samples/<id>/flow_fw.flo.
EvalSummary evaluate_dataset(const EvalOptions& options);

}  // namespace evflow::pipeline
