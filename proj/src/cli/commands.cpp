#include "evflow/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evflow/core/error.hpp"
#include "evflow/core/parallel.hpp"
#include "evflow/io/formats.hpp"
#include "evflow/io/package.hpp"
#include "evflow/pipeline/config.hpp"
#include "evflow/pipeline/pipeline.hpp"
#include "evflow/repr/voxel.hpp"
#include "evflow/simulator/simulator.hpp"

namespace evflow::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Flags shared by the commands that build a PipelineConfig.
struct ConfigFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> thresholds;
  std::optional<int> bins;
  std::optional<double> max_disp;
  std::optional<int> jobs;
  std::optional<int> samples;
  bool debug_images = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--out", out, "Output directory");
    app->add_option("--thresholds", thresholds, "Contrast thresholds, e.g. 0.1,0.2,0.4");
    app->add_option("--bins", bins, "Voxel bins B");
    app->add_option("--max-disp", max_disp, "Largest per-interval displacement in pixels");
    app->add_option("--jobs", jobs, "Worker threads (0: all cores)");
    app->add_option("--samples", samples, "Number of sequences");
    app->add_flag("--debug-images", debug_images, "Write PGM event snapshots");
  }

  pipeline::PipelineConfig resolve() const {
    pipeline::PipelineConfig cfg = config.empty() ? pipeline::PipelineConfig{}
                                                  : pipeline::load_config(config);
    if (seed) cfg.seed = *seed;
    if (out) cfg.output = *out;
    if (thresholds) cfg.thresholds = pipeline::parse_threshold_list(*thresholds);
    if (bins) cfg.bins = *bins;
    if (max_disp) cfg.max_disp = *max_disp;
    if (jobs) cfg.jobs = *jobs;
    if (samples) cfg.samples = *samples;
    if (debug_images) cfg.debug_images = true;
    cfg.validate();
    return cfg;
  }
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ordered_json report_json(const metrics::EvalReport& r) {
  ordered_json j;
  j["mode"] = metrics::to_string(r.mode);
  j["epe"] = r.epe;
  j["out_pct"] = r.out_pct;
  j["n_pixels"] = r.n_pixels;
  j["degenerate"] = r.degenerate;
  return j;
}

int cmd_generate(const ConfigFlags& flags, std::ostream& out) {
  const auto cfg = flags.resolve();
  const auto summary = pipeline::run_pipeline(cfg, cfg.output);
  out << "samples " << cfg.samples << " (" << summary.records.size() << " packaged), "
      << summary.frames_rendered << " frames rendered\n";
  out << "threshold  mean_density\n";
  for (std::size_t i = 0; i < summary.thresholds.size(); ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "%-9s  %.6f\n",
                  io::format_threshold(summary.thresholds[i]).c_str(), summary.mean_density[i]);
    out << line;
  }
  out << "wall_time_s " << fixed(summary.wall_seconds, 2) << "\n";
  return kExitOk;
}

int cmd_package(const ConfigFlags& flags, std::size_t index, std::ostream& out) {
  const auto cfg = flags.resolve();
  const fs::path root = cfg.output;
  set_max_threads(static_cast<std::size_t>(cfg.jobs));
  const auto fresh = pipeline::package_sequence(cfg, index, root);

  std::map<std::string, io::ManifestRecord> merged;
  if (fs::exists(root / io::kManifestName)) {
    for (auto& r : io::read_manifest(root)) merged.emplace(r.id, std::move(r));
  }
  for (const auto& r : fresh) {
    merged.insert_or_assign(r.id, r);
    out << "packaged " << r.id << "\n";
  }
  std::vector<io::ManifestRecord> records;
  for (auto& [id, r] : merged) records.push_back(std::move(r));
  io::write_manifest(root, records);
  return kExitOk;
}

// Frames come from <dir>/frame_times.csv and <dir>/frame_<label>.pgm.
int cmd_simulate(const std::string& frame_dir, const ConfigFlags& flags, std::ostream& out) {
  const auto cfg = flags.resolve();
  const fs::path dir = frame_dir;
  const auto rows = io::read_frame_times(dir / "frame_times.csv");
  std::vector<LogFrame> frames;
  std::vector<Timestamp> times;
  for (const auto& [label, t] : rows) {
    Frame f{io::read_pgm(dir / ("frame_" + std::to_string(label) + ".pgm")), t};
    frames.push_back(simulator::log_transform(f, cfg.simulator.log_floor));
    times.push_back(t);
  }
  const auto streams = simulator::multi_density(frames, times, cfg.thresholds, cfg.simulator);
  for (const auto& [c, stream] : streams) {
    const fs::path path = fs::path(cfg.output) / ("events_C" + io::format_threshold(c) + ".evs");
    io::write_events(path, stream);
    out << path.generic_string() << " " << stream.events.size() << " events\n";
  }
  return kExitOk;
}

int cmd_voxelize(const std::string& events, const std::string& dest, int bins, std::ostream& out) {
  const EventStream stream = io::read_events(events);
  const auto grid = repr::voxelize(stream, stream.t_start, stream.t_end, bins);
  io::write_voxels(dest, grid);
  out << dest << " " << grid.bins() << "x" << grid.height() << "x" << grid.width()
      << " density " << fixed(repr::density(grid), 6) << "\n";
  return kExitOk;
}

int cmd_density(const std::vector<std::string>& files, int bins, std::ostream& out) {
  for (const auto& f : files) {
    const fs::path p = f;
    repr::VoxelGrid grid;
    if (p.extension() == ".vox") {
      grid = io::read_voxels(p);
    } else {
      const EventStream stream = io::read_events(p);
      grid = repr::voxelize(stream, stream.t_start, stream.t_end, bins);
    }
    out << f << " " << fixed(repr::density(grid), 6) << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::string& dataset, std::ostream& out) {
  const auto records = io::read_manifest(dataset);
  std::size_t findings = 0;
  for (const auto& rec : records) {
    for (const auto& f : io::validate_sample(dataset, rec)) {
      out << rec.id << ": " << f << "\n";
      ++findings;
    }
  }
  out << records.size() << " samples, " << findings << " findings\n";
  return findings == 0 ? kExitOk : kExitMismatch;
}

int cmd_eval(const pipeline::EvalOptions& opts, const std::string& report_path, std::ostream& out) {
  const auto summary = pipeline::evaluate_dataset(opts);
  std::string report;
  for (const auto& s : summary.samples) {
    ordered_json j;
    j["id"] = s.id;
    j["dense"] = report_json(s.dense);
    if (s.sparse) j["sparse"] = report_json(*s.sparse);
    report += j.dump() + "\n";
  }
  for (const auto& id : summary.missing) {
    ordered_json j;
    j["id"] = id;
    j["missing"] = true;
    report += j.dump() + "\n";
  }
  ordered_json agg;
  agg["aggregate"] = true;
  agg["samples"] = summary.samples.size();
  agg["missing"] = summary.missing.size();
  agg["dense"] = report_json(summary.dense);
  if (summary.sparse) agg["sparse"] = report_json(*summary.sparse);
  report += agg.dump() + "\n";

  out << report;
  const fs::path path = report_path.empty() ? opts.predictions / "eval_report.jsonl" : fs::path(report_path);
  io::write_file(path, report);
  return summary.missing.empty() ? kExitOk : kExitMismatch;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic event-camera optical flow dataset engine", "evflow"};
  app.require_subcommand(1);

  ConfigFlags gen_flags;
  auto* generate = app.add_subcommand("generate", "Run the full pipeline into --out");
  gen_flags.attach(generate);

  ConfigFlags pkg_flags;
  std::size_t pkg_index = 0;
  auto* package = app.add_subcommand("package", "Build and package one sequence into --out");
  pkg_flags.attach(package);
  package->add_option("--sample", pkg_index, "Sequence index")->required();

  ConfigFlags sim_flags;
  std::string frame_dir;
  auto* simulate = app.add_subcommand("simulate", "Events from PGM frames listed in frame_times.csv");
  sim_flags.attach(simulate);
  simulate->add_option("--frames", frame_dir, "Directory with frame_times.csv and frame_<k>.pgm")
      ->required();

  std::string vox_in;
  std::string vox_out;
  int vox_bins = repr::kDefaultBins;
  auto* voxelize = app.add_subcommand("voxelize", "Event file to .vox voxel grid");
  voxelize->add_option("events", vox_in, "Input .evs file")->required();
  voxelize->add_option("--out", vox_out, "Output .vox file")->required();
  voxelize->add_option("--bins", vox_bins, "Voxel bins B");

  std::vector<std::string> density_files;
  int density_bins = repr::kDefaultBins;
  auto* density = app.add_subcommand("density", "Event density of .evs or .vox files");
  density->add_option("files", density_files, "Input files")->required();
  density->add_option("--bins", density_bins, "Voxel bins B for .evs input");

  std::string dataset;
  auto* validate = app.add_subcommand("validate", "Re-check every sample of a dataset");
  validate->add_option("dataset", dataset, "Dataset root")->required();

  pipeline::EvalOptions eval_opts;
  std::string eval_mode = "dense";
  std::string events_dir;
  std::optional<double> eval_threshold;
  std::string report_path;
  auto* eval = app.add_subcommand("eval", "Score predicted flow against a dataset");
  eval->add_option("--pred", eval_opts.predictions, "Prediction directory")->required();
  eval->add_option("--gt", eval_opts.dataset, "Dataset root")->required();
  eval->add_option("--mode", eval_mode, "dense|sparse");
  eval->add_option("--events", events_dir, "Directory of <id>.evs files for sparse masks");
  eval->add_option("--threshold", eval_threshold, "Dataset threshold used for sparse masks");
  eval->add_option("--report", report_path, "Report file (default <pred>/eval_report.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(gen_flags, out);
    if (*package) return cmd_package(pkg_flags, pkg_index, out);
    if (*simulate) return cmd_simulate(frame_dir, sim_flags, out);
    if (*voxelize) return cmd_voxelize(vox_in, vox_out, vox_bins, out);
    if (*density) return cmd_density(density_files, density_bins, out);
    if (*validate) return cmd_validate(dataset, out);
    if (*eval) {
      eval_opts.mode = metrics::parse_eval_mode(eval_mode);
      if (!events_dir.empty()) eval_opts.events_dir = fs::path(events_dir);
      eval_opts.threshold = eval_threshold;
      return cmd_eval(eval_opts, report_path, out);
    }
  } catch (const Error& e) {
    err << "evflow: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kConfig:
        return kExitConfig;
      case ErrorCode::kGenerationFailure:
      case ErrorCode::kPathologicalMotion:
        return kExitGeneration;
      default:
        return kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "evflow: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace evflow::cli
