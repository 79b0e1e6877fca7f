#include "evflow/io/package.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "evflow/core/error.hpp"
#include "evflow/io/formats.hpp"
#include "evflow/repr/voxel.hpp"

namespace evflow::io {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kDensityTolerance = 1e-6;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kPackaging, "package_sample: " + what);
}

double window_density(const EventStream& stream, Timestamp t0, Timestamp tN, int bins) {
  return repr::density(repr::voxelize(stream, t0, tN, bins));
}

void write_event_snapshot(const fs::path& path, const EventStream& stream) {
  Grid<int> sum(static_cast<int>(stream.width), static_cast<int>(stream.height), 0);
  for (const Event& e : stream.events) sum(e.x, e.y) += e.p;
  Grid<std::uint8_t> pixels(sum.width(), sum.height());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels.data()[i] = static_cast<std::uint8_t>(std::clamp(128 + 40 * sum.data()[i], 0, 255));
  }
  write_pgm_bytes(path, pixels);
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("manifest field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_threshold(double c) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), c);
  return std::string(buf, res.ptr);
}

ordered_json to_json(const ManifestRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["dt"] = r.dt;
  j["seed"] = r.seed;
  j["width"] = r.width;
  j["height"] = r.height;
  j["bins"] = r.bins;
  j["t_prev"] = r.t_prev;
  j["t_mid"] = r.t_mid;
  j["t_next"] = r.t_next;
  j["thresholds"] = ordered_json::array();
  for (const auto& d : r.densities) j["thresholds"].push_back(d.threshold);
  j["densities"] = ordered_json::array();
  for (const auto& d : r.densities) {
    j["densities"].push_back({{"C", d.threshold}, {"prev", d.prev}, {"next", d.next}});
  }
  j["events"] = ordered_json::array();
  for (const auto& e : r.event_files) {
    j["events"].push_back({{"C", e.threshold}, {"prev", e.prev}, {"next", e.next}});
  }
  j["flow_fw"] = r.flow_fw;
  j["flow_bw"] = r.flow_bw;
  j["frames"] = r.frames;
  j["frame_times"] = r.frame_times;
  j["meta"] = r.meta;
  return j;
}

ManifestRecord record_from_json(const json& j) {
  ManifestRecord r;
  r.id = get_field<std::string>(j, "id");
  r.dt = get_field<int>(j, "dt");
  r.seed = get_field<std::uint64_t>(j, "seed");
  r.width = get_field<std::uint32_t>(j, "width");
  r.height = get_field<std::uint32_t>(j, "height");
  r.bins = get_field<int>(j, "bins");
  r.t_prev = get_field<Timestamp>(j, "t_prev");
  r.t_mid = get_field<Timestamp>(j, "t_mid");
  r.t_next = get_field<Timestamp>(j, "t_next");
  for (const auto& d : get_field<json>(j, "densities")) {
    r.densities.push_back({get_field<double>(d, "C"), get_field<double>(d, "prev"),
                           get_field<double>(d, "next")});
  }
  for (const auto& e : get_field<json>(j, "events")) {
    r.event_files.push_back({get_field<double>(e, "C"), get_field<std::string>(e, "prev"),
                             get_field<std::string>(e, "next")});
  }
  r.flow_fw = get_field<std::string>(j, "flow_fw");
  r.flow_bw = get_field<std::string>(j, "flow_bw");
  r.frames = get_field<std::vector<std::string>>(j, "frames");
  r.frame_times = get_field<std::string>(j, "frame_times");
  r.meta = get_field<std::string>(j, "meta");
  return r;
}

ManifestRecord package_sample(const fs::path& root, const SampleParts& parts) {
  require(!parts.id.empty(), "sample id is empty");
  require(!parts.events.empty(), "no event windows");
  require(parts.flow_fw.width() > 0 && parts.flow_bw.width() > 0, "missing flow labels");
  require(parts.key_frames.size() == 2, "expected two key frames");
  require(parts.t_prev < parts.t_mid && parts.t_mid < parts.t_next, "window times not increasing");
  const std::uint32_t width = parts.events.front().prev.width;
  const std::uint32_t height = parts.events.front().prev.height;
  for (const auto& w : parts.events) {
    require(w.threshold > 0.0, "non-positive threshold");
    require(w.prev.t_start == parts.t_prev && w.prev.t_end == parts.t_mid &&
                w.next.t_start == parts.t_mid && w.next.t_end == parts.t_next,
            "event windows are not contiguous at C=" + format_threshold(w.threshold));
    require(w.prev.width == width && w.prev.height == height && w.next.width == width &&
                w.next.height == height,
            "event windows differ in sensor size");
  }
  require(parts.flow_fw.width() == static_cast<int>(width) &&
              parts.flow_fw.height() == static_cast<int>(height) &&
              parts.flow_bw.width() == static_cast<int>(width) &&
              parts.flow_bw.height() == static_cast<int>(height),
          "flow size differs from sensor size");

  const fs::path rel_dir = fs::path("samples") / parts.id;
  const fs::path dir = root / rel_dir;
  fs::create_directories(dir);

  ManifestRecord rec;
  rec.id = parts.id;
  rec.dt = parts.dt;
  rec.seed = parts.seed;
  rec.width = width;
  rec.height = height;
  rec.bins = parts.bins;
  rec.t_prev = parts.t_prev;
  rec.t_mid = parts.t_mid;
  rec.t_next = parts.t_next;

  for (const auto& w : parts.events) {
    const std::string stem = "events_C" + format_threshold(w.threshold);
    const fs::path prev = rel_dir / (stem + "_prev.evs");
    const fs::path next = rel_dir / (stem + "_next.evs");
    write_events(root / prev, w.prev);
    write_events(root / next, w.next);
    rec.event_files.push_back({w.threshold, prev.generic_string(), next.generic_string()});
    rec.densities.push_back({w.threshold,
                             window_density(w.prev, parts.t_prev, parts.t_mid, parts.bins),
                             window_density(w.next, parts.t_mid, parts.t_next, parts.bins)});
    if (parts.debug_images) {
      write_event_snapshot(dir / ("debug_C" + format_threshold(w.threshold) + "_prev.pgm"), w.prev);
      write_event_snapshot(dir / ("debug_C" + format_threshold(w.threshold) + "_next.pgm"), w.next);
    }
  }

  write_flow(root / rel_dir / "flow_fw.flo", parts.flow_fw);
  write_flow(root / rel_dir / "flow_bw.flo", parts.flow_bw);
  rec.flow_fw = (rel_dir / "flow_fw.flo").generic_string();
  rec.flow_bw = (rel_dir / "flow_bw.flo").generic_string();

  std::vector<std::pair<int, Timestamp>> times;
  for (const auto& kf : parts.key_frames) {
    const fs::path rel = rel_dir / ("frame_" + std::to_string(kf.label) + ".pgm");
    write_pgm(root / rel, kf.frame.intensity);
    rec.frames.push_back(rel.generic_string());
    times.emplace_back(kf.label, kf.frame.t);
  }
  rec.frame_times = (rel_dir / "frame_times.csv").generic_string();
  write_frame_times(root / rec.frame_times, times);

  rec.meta = (rel_dir / "meta.json").generic_string();
  write_file(root / rec.meta, to_json(rec).dump(2) + "\n");
  return rec;
}

void write_manifest(const fs::path& root, const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  write_file(root / kManifestName, out);
}

std::vector<ManifestRecord> read_manifest(const fs::path& root) {
  std::istringstream in(read_file(root / kManifestName));
  std::vector<ManifestRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, std::string("manifest: ") + e.what());
    }
    records.push_back(record_from_json(j));
  }
  return records;
}

std::vector<std::string> validate_sample(const fs::path& root, const ManifestRecord& rec) {
  std::vector<std::string> findings;
  auto note = [&](const std::string& what) { findings.push_back(rec.id + ": " + what); };
  auto guarded = [&](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      note(what + ": " + e.what());
    }
  };

  if (rec.dt != 1 && rec.dt != 4) note("dt must be 1 or 4, got " + std::to_string(rec.dt));
  if (!(rec.t_prev < rec.t_mid && rec.t_mid < rec.t_next)) note("window times not increasing");
  if (rec.densities.size() != rec.event_files.size()) note("density table and event list differ");

  for (std::size_t i = 0; i < rec.event_files.size(); ++i) {
    const EventFiles& files = rec.event_files[i];
    if (!(files.threshold > 0.0)) note("non-positive threshold");
    const DensityEntry* recorded = i < rec.densities.size() ? &rec.densities[i] : nullptr;
    if (recorded && recorded->threshold != files.threshold) note("density table order mismatch");
    auto check_window = [&](const std::string& rel, Timestamp t0, Timestamp tN, double expected) {
      guarded(rel, [&] {
        const EventStream s = read_events(root / rel);
        if (s.width != rec.width || s.height != rec.height) note(rel + ": sensor size mismatch");
        if (s.t_start != t0 || s.t_end != tN) note(rel + ": window bounds mismatch");
        const double d = window_density(s, t0, tN, rec.bins);
        if (std::abs(d - expected) > kDensityTolerance) {
          note(rel + ": density " + std::to_string(d) + " != recorded " + std::to_string(expected));
        }
      });
    };
    check_window(files.prev, rec.t_prev, rec.t_mid, recorded ? recorded->prev : -1.0);
    check_window(files.next, rec.t_mid, rec.t_next, recorded ? recorded->next : -1.0);
  }

  for (const std::string& rel : {rec.flow_fw, rec.flow_bw}) {
    guarded(rel, [&] {
      if (!fs::exists(mask_path(root / rel))) note(rel + ": missing validity sidecar");
      const FlowField flow = read_flow(root / rel);
      if (flow.width() != static_cast<int>(rec.width) ||
          flow.height() != static_cast<int>(rec.height)) {
        note(rel + ": size mismatch");
      }
      for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
          if (flow.valid(x, y) && !(std::isfinite(flow.u(x, y)) && std::isfinite(flow.v(x, y)))) {
            note(rel + ": non-finite flow at a valid pixel");
            return;
          }
        }
      }
    });
  }

  for (const std::string& rel : rec.frames) {
    guarded(rel, [&] {
      const Grid<double> img = read_pgm(root / rel);
      if (img.width() != static_cast<int>(rec.width) || img.height() != static_cast<int>(rec.height)) {
        note(rel + ": size mismatch");
      }
    });
  }
  guarded(rec.frame_times, [&] {
    const auto rows = read_frame_times(root / rec.frame_times);
    if (rows.size() != rec.frames.size()) note(rec.frame_times + ": row count mismatch");
  });
  if (!fs::exists(root / rec.meta)) note(rec.meta + ": missing");
  return findings;
}

}  // namespace evflow::io
