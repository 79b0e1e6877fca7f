#include "evflow/io/formats.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "evflow/core/error.hpp"

namespace evflow::io {
namespace {

// Fixed little-endian encoding, independent of host byte order.
class Writer {
 public:
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::string take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view data, const char* what) : data_(data), what_(what) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kCorruptFile, std::string(what_) + ": unexpected end of data");
    }
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string_view data_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------- events

std::string encode_events(const EventStream& stream) {
  if (auto violation = validate_stream(stream)) {
    throw Error(ErrorCode::kFormat, "refusing to write invalid event stream: " + violation->reason);
  }
  Writer w;
  w.reserve(4 + kEventHeaderBytes + kEventRecordBytes * stream.events.size());
  w.bytes(kEventMagic, 4);
  w.u32(kEventVersion);
  w.u32(stream.width);
  w.u32(stream.height);
  w.i64(stream.t_start);
  w.i64(stream.t_end);
  w.u64(stream.events.size());
  for (const Event& e : stream.events) {
    w.i64(e.t);
    w.u16(e.x);
    w.u16(e.y);
    w.u8(static_cast<std::uint8_t>(e.p));
    w.u8(0);
    w.u8(0);
    w.u8(0);
  }
  return w.take();
}

EventStream decode_events(std::string_view bytes) {
  Reader r(bytes, "event file");
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEventMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, "event file: bad magic");
  }
  r.bytes(4);
  if (r.remaining() < kEventHeaderBytes) {
    throw Error(ErrorCode::kCorruptFile, "event file: truncated header");
  }
  const std::uint32_t version = r.u32();
  if (version != kEventVersion) {
    throw Error(ErrorCode::kFormat, "event file: unsupported version " + std::to_string(version));
  }
  EventStream stream;
  stream.width = r.u32();
  stream.height = r.u32();
  stream.t_start = r.i64();
  stream.t_end = r.i64();
  const std::uint64_t count = r.u64();
  if (count > r.remaining() / kEventRecordBytes || r.remaining() != count * kEventRecordBytes) {
    throw Error(ErrorCode::kCorruptFile, "event file: record count does not match file size");
  }
  stream.events.resize(count);
  for (Event& e : stream.events) {
    e.t = r.i64();
    e.x = r.u16();
    e.y = r.u16();
    e.p = static_cast<std::int8_t>(r.u8());
    if (r.u8() != 0 || r.u8() != 0 || r.u8() != 0) {
      throw Error(ErrorCode::kCorruptFile, "event file: non-zero record padding");
    }
  }
  if (auto violation = validate_stream(stream)) {
    std::string where =
        violation->index == StreamViolation::npos ? "header" : "record " + std::to_string(violation->index);
    throw Error(ErrorCode::kCorruptFile, "event file: " + where + ": " + violation->reason);
  }
  return stream;
}

void write_events(const std::filesystem::path& path, const EventStream& stream) {
  write_file(path, encode_events(stream));
}

EventStream read_events(const std::filesystem::path& path) { return decode_events(read_file(path)); }

// ---------------------------------------------------------------- flow

std::filesystem::path mask_path(const std::filesystem::path& flow_path) {
  auto p = flow_path;
  p.replace_extension(".mask");
  return p;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  if (!flow.u.same_shape(flow.v) || !flow.u.same_shape(flow.valid)) {
    throw Error(ErrorCode::kShape, "write_flow: component sizes differ");
  }
  Writer w;
  w.reserve(12 + 8 * flow.u.size());
  w.f32(kFlowTag);
  w.i32(flow.width());
  w.i32(flow.height());
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      w.f32(flow.u(x, y));
      w.f32(flow.v(x, y));
    }
  }
  write_file(path, w.take());

  std::string mask(flow.valid.size(), '\0');
  auto valid = flow.valid.data();
  for (std::size_t i = 0; i < valid.size(); ++i) mask[i] = valid[i] ? 1 : 0;
  write_file(mask_path(path), mask);
}

FlowField read_flow(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Reader r(bytes, "flow file");
  if (r.remaining() < 4 || r.f32() != kFlowTag) {
    throw Error(ErrorCode::kFormat, "flow file: bad magic in " + path.string());
  }
  const std::int32_t width = r.i32();
  const std::int32_t height = r.i32();
  if (width < 0 || height < 0 ||
      r.remaining() != 8ull * static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height)) {
    throw Error(ErrorCode::kCorruptFile, "flow file: size does not match header in " + path.string());
  }
  FlowField flow(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      flow.u(x, y) = r.f32();
      flow.v(x, y) = r.f32();
    }
  }
  const auto sidecar = mask_path(path);
  if (std::filesystem::exists(sidecar)) {
    const std::string mask = read_file(sidecar);
    if (mask.size() != flow.valid.size()) {
      throw Error(ErrorCode::kCorruptFile, "flow mask size mismatch in " + sidecar.string());
    }
    auto valid = flow.valid.data();
    for (std::size_t i = 0; i < valid.size(); ++i) {
      if (mask[i] != 0 && mask[i] != 1) {
        throw Error(ErrorCode::kCorruptFile, "flow mask byte not 0/1 in " + sidecar.string());
      }
      valid[i] = static_cast<std::uint8_t>(mask[i]);
    }
  } else {
    for (auto& v : flow.valid.data()) v = 1;
  }
  return flow;
}

// ---------------------------------------------------------------- frames

void write_pgm_bytes(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels) {
  std::string out = "P5\n" + std::to_string(pixels.width()) + " " + std::to_string(pixels.height()) +
                    "\n255\n";
  const auto data = pixels.data();
  out.append(reinterpret_cast<const char*>(data.data()), data.size());
  write_file(path, out);
}

void write_pgm(const std::filesystem::path& path, const Grid<double>& intensity) {
  Grid<std::uint8_t> pixels(intensity.width(), intensity.height());
  auto src = intensity.data();
  auto dst = pixels.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::clamp(src[i], 0.0, 1.0);
    dst[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  write_pgm_bytes(path, pixels);
}

Grid<double> read_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P5") throw Error(ErrorCode::kFormat, "not a binary PGM: " + path.string());
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::kFormat, "malformed PGM header: " + path.string());
  }
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw Error(ErrorCode::kFormat, "unsupported PGM geometry or depth: " + path.string());
  }
  ++pos;  // single whitespace after maxval
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - std::min(pos, bytes.size()) != count) {
    throw Error(ErrorCode::kCorruptFile, "PGM pixel data size mismatch: " + path.string());
  }
  Grid<double> out(width, height);
  auto dst = out.data();
  for (std::size_t i = 0; i < count; ++i) {
    dst[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  }
  return out;
}

void write_frame_times(const std::filesystem::path& path,
                       const std::vector<std::pair<int, Timestamp>>& rows) {
  std::string out = "label,t_us\n";
  for (const auto& [label, t] : rows) out += std::to_string(label) + "," + std::to_string(t) + "\n";
  write_file(path, out);
}

std::vector<std::pair<int, Timestamp>> read_frame_times(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  if (line != "label,t_us") throw Error(ErrorCode::kFormat, "bad frame time header: " + path.string());
  std::vector<std::pair<int, Timestamp>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::kFormat, "bad frame time row: " + line);
    try {
      rows.emplace_back(std::stoi(line.substr(0, comma)), std::stoll(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, "bad frame time row: " + line);
    }
  }
  return rows;
}

// ---------------------------------------------------------------- voxels

std::string encode_voxels(const repr::VoxelGrid& grid) {
  Writer w;
  w.reserve(16 + 4 * grid.values().size());
  w.bytes(kVoxelMagic, 4);
  w.u32(static_cast<std::uint32_t>(grid.bins()));
  w.u32(static_cast<std::uint32_t>(grid.height()));
  w.u32(static_cast<std::uint32_t>(grid.width()));
  for (float v : grid.values()) w.f32(v);
  return w.take();
}

repr::VoxelGrid decode_voxels(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kVoxelMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, "voxel file: bad magic");
  }
  Reader r(bytes, "voxel file");
  r.bytes(4);
  const std::uint32_t bins = r.u32();
  const std::uint32_t height = r.u32();
  const std::uint32_t width = r.u32();
  const std::uint64_t cells = std::uint64_t{bins} * height * width;
  if (bins < 2 || height > (1u << 20) || width > (1u << 20) || r.remaining() != 4 * cells) {
    throw Error(ErrorCode::kCorruptFile, "voxel file: size does not match header");
  }
  repr::VoxelGrid grid(static_cast<int>(bins), static_cast<int>(height), static_cast<int>(width));
  for (float& v : grid.values()) v = r.f32();
  return grid;
}

void write_voxels(const std::filesystem::path& path, const repr::VoxelGrid& grid) {
  write_file(path, encode_voxels(grid));
}

repr::VoxelGrid read_voxels(const std::filesystem::path& path) {
  return decode_voxels(read_file(path));
}

}  // namespace evflow::io
