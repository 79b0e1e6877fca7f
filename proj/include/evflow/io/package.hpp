#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "evflow/core/event.hpp"
#include "evflow/core/frame.hpp"

namespace evflow::io {

// Event windows E(t_prev, t_mid) and E(t_mid, t_next) at one threshold.
struct ThresholdWindows {
  double threshold = 0.0;
  EventStream prev;
  EventStream next;
};

struct KeyFrame {
  int label = 0;  // index of the 60 Hz label time
  Frame frame;
};

// Everything needed to write one dataset sample.
struct SampleParts {
  std::string id;
  int dt = 1;
  std::uint64_t seed = 0;
  Timestamp t_prev = 0;
  Timestamp t_mid = 0;
  Timestamp t_next = 0;
  int bins = 5;
  std::vector<ThresholdWindows> events;
  FlowField flow_fw;  // t_prev -> t_mid
  FlowField flow_bw;  // t_mid -> t_prev
  std::vector<KeyFrame> key_frames;
  bool debug_images = false;
};

struct DensityEntry {
  double threshold = 0.0;
  double prev = 0.0;
  double next = 0.0;
};

struct EventFiles {
  double threshold = 0.0;
  std::string prev;
  std::string next;
};

// One manifest line. Paths are relative to the dataset root.
struct ManifestRecord {
  std::string id;
  int dt = 1;
  std::uint64_t seed = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bins = 5;
  Timestamp t_prev = 0;
  Timestamp t_mid = 0;
  Timestamp t_next = 0;
  std::vector<DensityEntry> densities;
  std::vector<EventFiles> event_files;
  std::string flow_fw;
  std::string flow_bw;
  std::vector<std::string> frames;
  std::string frame_times;
  std::string meta;
};

nlohmann::ordered_json to_json(const ManifestRecord& record);
// Throws Error{kFormat} on missing or mistyped fields.
ManifestRecord record_from_json(const nlohmann::json& j);

// Shortest round-trip decimal form, used in file names ("0.2" -> events_C0.2_prev.evs).
std::string format_threshold(double c);

inline constexpr const char* kManifestName = "manifest.jsonl";

// Writes samples/<id>/{events_C<val>_prev.evs, events_C<val>_next.evs,
// flow_fw.flo(+.mask), flow_bw.flo(+.mask), frame_<k>.pgm, frame_times.csv,
// meta.json} under root and returns the manifest record. Densities are
// density(voxelize(window)) per threshold and window.
// Throws Error{kPackaging} when a part is missing or windows are not contiguous.
ManifestRecord package_sample(const std::filesystem::path& root, const SampleParts& parts);

void write_manifest(const std::filesystem::path& root, const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& root);

// Re-checks every invariant of a packaged sample from its files alone.
// Returns human-readable findings; empty means the sample is valid.
std::vector<std::string> validate_sample(const std::filesystem::path& root,
                                         const ManifestRecord& record);

}  // namespace evflow::io
