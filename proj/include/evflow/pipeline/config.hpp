#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "evflow/scene/generate.hpp"
#include "evflow/simulator/simulator.hpp"

namespace evflow::pipeline {

// Per-sample camera motion. Each sample draws a start point in a box around
// the origin, a random travel direction and a line speed inside
// [speed_min, speed_max]; those bounds are also the hard limits enforced on
// the generated spline.
struct MotionConfig {
  double start_box = 0.3;
  double speed_min = 1.0;   // scene units / s
  double speed_max = 4.0;
  double max_rotation_rate = 3.0;  // rad / s
  double max_rotation_deviation = 0.3;
  double jitter = 0.01;
  int waypoints_min = 4;
  int waypoints_max = 12;
  double clearance = 0.2;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  int samples = 1;
  int width = 64;
  int height = 64;
  double fov_deg = 70.0;
  std::vector<double> thresholds = {0.1, 0.2, 0.4};
  std::vector<int> dt = {1, 4};
  int bins = 5;
  double max_disp = 1.0;
  double label_rate_hz = 60.0;
  std::string output = "dataset";
  int jobs = 0;  // 0: all hardware threads
  bool debug_images = false;
  scene::SceneConfig scene;
  MotionConfig motion;
  simulator::SimulatorConfig simulator;

  // Throws Error{kConfig} listing the first violated constraint.
  void validate() const;
};

// Every key is optional; unknown keys are rejected. Throws Error{kConfig}.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const PipelineConfig& cfg);

// Parses "0.1,0.2,0.4"; throws Error{kConfig}.
std::vector<double> parse_threshold_list(const std::string& text);

}  // namespace evflow::pipeline
