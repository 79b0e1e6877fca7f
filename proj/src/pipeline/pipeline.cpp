#include "evflow/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "evflow/core/error.hpp"
#include "evflow/core/parallel.hpp"
#include "evflow/core/rng.hpp"
#include "evflow/io/formats.hpp"
#include "evflow/repr/voxel.hpp"
#include "evflow/scene/generate.hpp"
#include "evflow/scene/render.hpp"
#include "evflow/simulator/simulator.hpp"

namespace evflow::pipeline {
namespace {

int max_dt(const PipelineConfig& cfg) { return *std::max_element(cfg.dt.begin(), cfg.dt.end()); }

Eigen::Vector3d random_direction(Rng& rng) {
  for (;;) {
    Eigen::Vector3d v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

}  // namespace

std::vector<Timestamp> label_times(const PipelineConfig& cfg) {
  const int count = 2 * max_dt(cfg) + 1;
  std::vector<Timestamp> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    out.push_back(static_cast<Timestamp>(std::llround(k * 1e6 / cfg.label_rate_hz)));
  }
  return out;
}

std::string sample_id(std::size_t index, int dt) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "s%06zu_dt%d", index, dt);
  return buf;
}

Sequence build_sequence(const PipelineConfig& cfg, std::size_t index) {
  Sequence seq;
  seq.index = index;
  seq.seed = mix_seed(cfg.seed, index);
  seq.labels = label_times(cfg);
  seq.intrinsics = scene::CameraIntrinsics::from_fov(cfg.width, cfg.height, cfg.fov_deg);

  const std::string name = "sample " + std::to_string(index);
  try {
    seq.scene = scene::gen_scene(cfg.scene, mix_seed(seq.seed, 1));

    Rng rng(mix_seed(seq.seed, 3));
    const auto& m = cfg.motion;
    scene::TrajectoryConfig tc;
    tc.duration_us = seq.labels.back();
    tc.start = Eigen::Vector3d(rng.uniform(-m.start_box, m.start_box),
                               rng.uniform(-m.start_box, m.start_box),
                               rng.uniform(-m.start_box, m.start_box));
    // The straight-line speed stays inside the middle half of the range so
    // waypoint jitter has room on both sides.
    const double speed =
        m.speed_min + (0.25 + 0.5 * rng.uniform()) * (m.speed_max - m.speed_min);
    tc.end = tc.start + random_direction(rng) * speed * (static_cast<double>(tc.duration_us) * 1e-6);
    tc.speed_min = m.speed_min;
    tc.speed_max = m.speed_max;
    tc.max_rotation_rate = m.max_rotation_rate;
    tc.max_rotation_deviation = m.max_rotation_deviation;
    tc.jitter = m.jitter;
    tc.waypoints_min = m.waypoints_min;
    tc.waypoints_max = m.waypoints_max;
    tc.clearance = m.clearance;
    seq.trajectory = scene::gen_trajectory(tc, mix_seed(seq.seed, 2), seq.scene);

    sampler::PlanOptions plan;
    plan.max_disp = cfg.max_disp;
    seq.schedule =
        sampler::plan_schedule_through(seq.scene, seq.trajectory, seq.intrinsics, seq.labels, plan);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kGenerationFailure, name + ": " + e.what());
  }

  const auto& times = seq.schedule.times;
  std::vector<LogFrame> frames(times.size());
  parallel_for(times.size(), [&](std::size_t i) {
    const Pose pose = seq.trajectory.pose_at(times[i]);
    frames[i] = simulator::log_transform(
        scene::render_frame(seq.scene, pose, seq.intrinsics, times[i]), cfg.simulator.log_floor);
  });
  seq.events = simulator::multi_density(frames, times, cfg.thresholds, cfg.simulator);
  return seq;
}

io::SampleParts sample_parts(const PipelineConfig& cfg, const Sequence& seq, int dt) {
  const int k = max_dt(cfg);
  if (dt < 1 || dt > k) throw Error(ErrorCode::kConfig, "dt out of range: " + std::to_string(dt));
  io::SampleParts parts;
  parts.id = sample_id(seq.index, dt);
  parts.dt = dt;
  parts.seed = seq.seed;
  parts.t_prev = seq.labels[static_cast<std::size_t>(k - dt)];
  parts.t_mid = seq.labels[static_cast<std::size_t>(k)];
  parts.t_next = seq.labels[static_cast<std::size_t>(k + dt)];
  parts.bins = cfg.bins;
  parts.debug_images = cfg.debug_images;

  for (const auto& [c, stream] : seq.events) {
    io::ThresholdWindows w;
    w.threshold = c;
    w.prev = slice_by_time(stream, parts.t_prev, parts.t_mid);
    w.next = slice_by_time(stream, parts.t_mid, parts.t_next);
    parts.events.push_back(std::move(w));
  }

  const Pose p0 = seq.trajectory.pose_at(parts.t_prev);
  const Pose p1 = seq.trajectory.pose_at(parts.t_mid);
  parts.flow_fw = scene::analytic_flow(seq.scene, p0, p1, seq.intrinsics);
  parts.flow_bw = scene::analytic_flow(seq.scene, p1, p0, seq.intrinsics);
  parts.key_frames.push_back({k - dt, scene::render_frame(seq.scene, p0, seq.intrinsics, parts.t_prev)});
  parts.key_frames.push_back({k, scene::render_frame(seq.scene, p1, seq.intrinsics, parts.t_mid)});
  return parts;
}

std::vector<io::ManifestRecord> package_sequence(const PipelineConfig& cfg, std::size_t index,
                                                 const std::filesystem::path& root) {
  const Sequence seq = build_sequence(cfg, index);
  std::vector<io::ManifestRecord> records;
  for (int dt : cfg.dt) records.push_back(io::package_sample(root, sample_parts(cfg, seq, dt)));
  return records;
}

PipelineSummary run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& root) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = static_cast<std::size_t>(cfg.samples);

  set_max_threads(static_cast<std::size_t>(cfg.jobs));
  std::vector<std::vector<io::ManifestRecord>> per_sequence(n);
  std::vector<std::size_t> frames(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const Sequence seq = build_sequence(cfg, i);
    frames[i] = seq.schedule.times.size();
    for (int dt : cfg.dt) per_sequence[i].push_back(io::package_sample(root, sample_parts(cfg, seq, dt)));
  });

  PipelineSummary summary;
  for (std::size_t f : frames) summary.frames_rendered += f;
  for (auto& recs : per_sequence) {
    for (auto& r : recs) summary.records.push_back(std::move(r));
  }
  io::write_manifest(root, summary.records);
  io::write_file(root / "config.resolved.json", to_json(cfg).dump(2) + "\n");

  summary.thresholds = cfg.thresholds;
  summary.mean_density.assign(cfg.thresholds.size(), 0.0);
  for (const auto& r : summary.records) {
    for (std::size_t c = 0; c < r.densities.size() && c < cfg.thresholds.size(); ++c) {
      summary.mean_density[c] += r.densities[c].prev + r.densities[c].next;
    }
  }
  if (!summary.records.empty()) {
    for (double& d : summary.mean_density) d /= 2.0 * static_cast<double>(summary.records.size());
  }
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

namespace {

void accumulate(metrics::EvalReport& total, const metrics::EvalReport& r) {
  total.epe += r.epe * static_cast<double>(r.n_pixels);
  total.out_pct += r.out_pct * static_cast<double>(r.n_pixels);
  total.n_pixels += r.n_pixels;
}

void finish(metrics::EvalReport& total) {
  if (total.n_pixels == 0) {
    total.epe = 0.0;
    total.out_pct = 0.0;
    total.degenerate = true;
    return;
  }
  total.epe /= static_cast<double>(total.n_pixels);
  total.out_pct /= static_cast<double>(total.n_pixels);
}

std::optional<std::filesystem::path> find_prediction(const std::filesystem::path& dir,
                                                     const std::string& id) {
  for (auto p : {dir / (id + ".flo"), dir / "samples" / id / "flow_fw.flo"}) {
    if (std::filesystem::exists(p)) return p;
  }
  return std::nullopt;
}

EventStream sparse_events(const EvalOptions& opts, const io::ManifestRecord& rec) {
  if (opts.events_dir) return io::read_events(*opts.events_dir / (rec.id + ".evs"));
  if (rec.event_files.empty()) throw Error(ErrorCode::kFormat, rec.id + ": no event files");
  const io::EventFiles* pick = &rec.event_files.front();
  if (opts.threshold) {
    pick = nullptr;
    for (const auto& f : rec.event_files) {
      if (std::abs(f.threshold - *opts.threshold) < 1e-12) pick = &f;
    }
    if (!pick) {
      throw Error(ErrorCode::kConfig,
                  rec.id + ": no events at threshold " + io::format_threshold(*opts.threshold));
    }
  }
  return io::read_events(opts.dataset / pick->prev);
}

}  // namespace

EvalSummary evaluate_dataset(const EvalOptions& opts) {
  EvalSummary out;
  out.dense.mode = metrics::EvalMode::kDense;
  const bool sparse = opts.mode == metrics::EvalMode::kSparse;
  if (sparse) {
    out.sparse.emplace();
    out.sparse->mode = metrics::EvalMode::kSparse;
  }

  for (const auto& rec : io::read_manifest(opts.dataset)) {
    const auto pred_path = find_prediction(opts.predictions, rec.id);
    if (!pred_path) {
      out.missing.push_back(rec.id);
      continue;
    }
    const FlowField pred = io::read_flow(*pred_path);
    const FlowField gt = io::read_flow(opts.dataset / rec.flow_fw);

    SampleEval s;
    s.id = rec.id;
    s.dense = metrics::evaluate(pred, gt, metrics::EvalMode::kDense);
    accumulate(out.dense, s.dense);
    if (sparse) {
      const EventStream events = sparse_events(opts, rec);
      const repr::VoxelGrid grid = repr::voxelize(events, rec.t_prev, rec.t_mid, rec.bins);
      s.sparse = metrics::evaluate(pred, gt, metrics::EvalMode::kSparse, &grid);
      accumulate(*out.sparse, *s.sparse);
    }
    out.samples.push_back(std::move(s));
  }
  finish(out.dense);
  if (out.sparse) finish(*out.sparse);
  return out;
}

}  // namespace evflow::pipeline
