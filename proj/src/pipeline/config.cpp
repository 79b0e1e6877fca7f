#include "evflow/pipeline/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "evflow/core/error.hpp"
#include "evflow/io/formats.hpp"

namespace evflow::pipeline {
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads optional keys of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(ErrorCode::kConfig, where_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfig, where_ + "." + key + ": " + e.what());
    }
  }

  void read_vec3(const char* key, Eigen::Vector3d& out) {
    std::vector<double> v{out.x(), out.y(), out.z()};
    read(key, v);
    if (v.size() != 3) throw Error(ErrorCode::kConfig, where_ + "." + key + ": expected 3 numbers");
    out = Eigen::Vector3d(v[0], v[1], v[2]);
  }

  const json* object(const char* key) {
    known_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.contains(key)) {
        throw Error(ErrorCode::kConfig, where_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string, std::less<>> known_;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfig, "config: " + what);
}

}  // namespace

void PipelineConfig::validate() const {
  check(samples >= 1, "samples must be >= 1");
  check(width >= 8 && height >= 8 && width <= 4096 && height <= 4096,
        "width and height must lie in [8, 4096]");
  check(fov_deg > 1.0 && fov_deg < 170.0, "fov_deg must lie in (1, 170)");
  check(!thresholds.empty(), "thresholds must not be empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    check(thresholds[i] > 0.0, "thresholds must be > 0");
    for (std::size_t j = 0; j < i; ++j) check(thresholds[i] != thresholds[j], "thresholds must be distinct");
  }
  check(!dt.empty(), "dt must not be empty");
  for (int d : dt) check(d == 1 || d == 4, "dt values must be 1 or 4");
  check(bins >= 2, "bins must be >= 2");
  check(max_disp > 0.0, "max_disp must be > 0");
  check(label_rate_hz > 0.0, "label_rate_hz must be > 0");
  check(jobs >= 0, "jobs must be >= 0");
  check(scene.plane_count_min >= 1 && scene.plane_count_max <= 8 &&
            scene.plane_count_min <= scene.plane_count_max,
        "scene plane count range must be non-empty within [1, 8]");
  check(scene.depth_min > 0.0 && scene.depth_min <= scene.depth_max, "scene depth range invalid");
  check(scene.half_size_min > 0.0 && scene.half_size_min <= scene.half_size_max,
        "scene half size range invalid");
  check(scene.sinusoids_min >= 0 && scene.sinusoids_max <= 8 &&
            scene.sinusoids_min <= scene.sinusoids_max,
        "scene sinusoid count range must be non-empty within [0, 8]");
  check(scene.frequency_min > 0.0 && scene.frequency_min <= scene.frequency_max,
        "scene frequency range invalid");
  check(scene.lattice_size >= 0 && scene.lattice_spacing > 0.0, "scene lattice invalid");
  check(scene.background >= 0.0 && scene.background <= 1.0, "scene background must be in [0, 1]");
  check(motion.speed_min >= 0.0 && motion.speed_min <= motion.speed_max,
        "motion speed range invalid");
  check(motion.start_box >= 0.0 && motion.jitter >= 0.0 && motion.clearance >= 0.0,
        "motion distances must be >= 0");
  check(motion.max_rotation_rate >= 0.0 && motion.max_rotation_deviation >= 0.0,
        "motion rotation bounds must be >= 0");
  check(motion.waypoints_min >= 4 && motion.waypoints_max <= 12 &&
            motion.waypoints_min <= motion.waypoints_max,
        "motion waypoint range must be non-empty within [4, 12]");
  simulator.validate();
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  Fields top(j, "config");
  top.read("seed", cfg.seed);
  top.read("samples", cfg.samples);
  top.read("width", cfg.width);
  top.read("height", cfg.height);
  top.read("fov_deg", cfg.fov_deg);
  top.read("thresholds", cfg.thresholds);
  top.read("dt", cfg.dt);
  top.read("bins", cfg.bins);
  top.read("max_disp", cfg.max_disp);
  top.read("label_rate_hz", cfg.label_rate_hz);
  top.read("output", cfg.output);
  top.read("jobs", cfg.jobs);
  top.read("debug_images", cfg.debug_images);

  if (const json* s = top.object("scene")) {
    Fields f(*s, "config.scene");
    f.read("plane_count_min", cfg.scene.plane_count_min);
    f.read("plane_count_max", cfg.scene.plane_count_max);
    f.read("depth_min", cfg.scene.depth_min);
    f.read("depth_max", cfg.scene.depth_max);
    f.read("max_tilt_deg", cfg.scene.max_tilt_deg);
    f.read("half_size_min", cfg.scene.half_size_min);
    f.read("half_size_max", cfg.scene.half_size_max);
    f.read("sinusoids_min", cfg.scene.sinusoids_min);
    f.read("sinusoids_max", cfg.scene.sinusoids_max);
    f.read("frequency_min", cfg.scene.frequency_min);
    f.read("frequency_max", cfg.scene.frequency_max);
    f.read("lattice_size", cfg.scene.lattice_size);
    f.read("lattice_spacing", cfg.scene.lattice_spacing);
    f.read("background", cfg.scene.background);
    f.finish();
  }
  if (const json* m = top.object("motion")) {
    Fields f(*m, "config.motion");
    f.read("start_box", cfg.motion.start_box);
    f.read("speed_min", cfg.motion.speed_min);
    f.read("speed_max", cfg.motion.speed_max);
    f.read("max_rotation_rate", cfg.motion.max_rotation_rate);
    f.read("max_rotation_deviation", cfg.motion.max_rotation_deviation);
    f.read("jitter", cfg.motion.jitter);
    f.read("waypoints_min", cfg.motion.waypoints_min);
    f.read("waypoints_max", cfg.motion.waypoints_max);
    f.read("clearance", cfg.motion.clearance);
    f.finish();
  }
  if (const json* s = top.object("simulator")) {
    Fields f(*s, "config.simulator");
    f.read("log_floor", cfg.simulator.log_floor);
    f.read("symmetric", cfg.simulator.symmetric);
    f.read("threshold_off", cfg.simulator.threshold_off);
    f.read("refractory_us", cfg.simulator.refractory_us);
    f.read("threshold_sigma", cfg.simulator.threshold_sigma);
    f.read("shot_noise_rate_hz", cfg.simulator.shot_noise_rate_hz);
    f.read("noise_seed", cfg.simulator.noise_seed);
    f.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

ordered_json to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["width"] = cfg.width;
  j["height"] = cfg.height;
  j["fov_deg"] = cfg.fov_deg;
  j["thresholds"] = cfg.thresholds;
  j["dt"] = cfg.dt;
  j["bins"] = cfg.bins;
  j["max_disp"] = cfg.max_disp;
  j["label_rate_hz"] = cfg.label_rate_hz;
  j["debug_images"] = cfg.debug_images;
  j["scene"] = {
      {"plane_count_min", cfg.scene.plane_count_min},
      {"plane_count_max", cfg.scene.plane_count_max},
      {"depth_min", cfg.scene.depth_min},
      {"depth_max", cfg.scene.depth_max},
      {"max_tilt_deg", cfg.scene.max_tilt_deg},
      {"half_size_min", cfg.scene.half_size_min},
      {"half_size_max", cfg.scene.half_size_max},
      {"sinusoids_min", cfg.scene.sinusoids_min},
      {"sinusoids_max", cfg.scene.sinusoids_max},
      {"frequency_min", cfg.scene.frequency_min},
      {"frequency_max", cfg.scene.frequency_max},
      {"lattice_size", cfg.scene.lattice_size},
      {"lattice_spacing", cfg.scene.lattice_spacing},
      {"background", cfg.scene.background},
  };
  j["motion"] = {
      {"start_box", cfg.motion.start_box},
      {"speed_min", cfg.motion.speed_min},
      {"speed_max", cfg.motion.speed_max},
      {"max_rotation_rate", cfg.motion.max_rotation_rate},
      {"max_rotation_deviation", cfg.motion.max_rotation_deviation},
      {"jitter", cfg.motion.jitter},
      {"waypoints_min", cfg.motion.waypoints_min},
      {"waypoints_max", cfg.motion.waypoints_max},
      {"clearance", cfg.motion.clearance},
  };
  j["simulator"] = {
      {"log_floor", cfg.simulator.log_floor},
      {"symmetric", cfg.simulator.symmetric},
      {"threshold_off", cfg.simulator.threshold_off},
      {"refractory_us", cfg.simulator.refractory_us},
      {"threshold_sigma", cfg.simulator.threshold_sigma},
      {"shot_noise_rate_hz", cfg.simulator.shot_noise_rate_hz},
      {"noise_seed", cfg.simulator.noise_seed},
  };
  return j;
}

std::vector<double> parse_threshold_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "bad threshold '" + item + "' in --thresholds");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kConfig, "--thresholds is empty");
  return out;
}

}  // namespace evflow::pipeline
