#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evflow/core/event.hpp"
#include "evflow/core/frame.hpp"
#include "evflow/repr/voxel.hpp"

namespace evflow::io {

// Event container: "EVS1", then little-endian u32 version (= 1), u32 width,
// u32 height, i64 t_start, i64 t_end, u64 count, followed by count 16-byte
// records {i64 t, u16 x, u16 y, i8 p, 3 zero bytes}.
inline constexpr char kEventMagic[4] = {'E', 'V', 'S', '1'};
inline constexpr std::uint32_t kEventVersion = 1;
inline constexpr std::size_t kEventHeaderBytes = 36;  // after the magic
inline constexpr std::size_t kEventRecordBytes = 16;

// Middlebury .flo tag.
inline constexpr float kFlowTag = 202021.25f;

inline constexpr char kVoxelMagic[4] = {'V', 'O', 'X', '1'};

// Byte-level codecs; the file functions below are thin wrappers.
// encode_events throws Error{kFormat} if the stream violates its invariants;
// decode_events throws Error{kFormat} on bad magic / version and
// Error{kCorruptFile} on truncation, bad padding, out-of-range coordinates or
// ordering violations.
std::string encode_events(const EventStream& stream);
EventStream decode_events(std::string_view bytes);

void write_events(const std::filesystem::path& path, const EventStream& stream);
EventStream read_events(const std::filesystem::path& path);

// Flow goes to `path` in Middlebury layout; validity to the sidecar at
// mask_path(path), one byte (0 / 1) per pixel. A missing sidecar reads back
// as all-valid so third-party .flo files can be loaded.
std::filesystem::path mask_path(const std::filesystem::path& flow_path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

// Binary 8-bit PGM (P5). Intensities are quantized to round(255 · I).
void write_pgm(const std::filesystem::path& path, const Grid<double>& intensity);
Grid<double> read_pgm(const std::filesystem::path& path);
void write_pgm_bytes(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels);

// "VOX1", u32 B, u32 H, u32 W, row-major little-endian float32 values.
// Window bounds are not stored; read_voxels returns t0 = tN = 0.
std::string encode_voxels(const repr::VoxelGrid& grid);
repr::VoxelGrid decode_voxels(std::string_view bytes);
void write_voxels(const std::filesystem::path& path, const repr::VoxelGrid& grid);
repr::VoxelGrid read_voxels(const std::filesystem::path& path);

// Whole-file helpers; throw Error{kIo}.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Frame timestamp table: "label,t_us" header then one row per frame.
void write_frame_times(const std::filesystem::path& path,
                       const std::vector<std::pair<int, Timestamp>>& rows);
std::vector<std::pair<int, Timestamp>> read_frame_times(const std::filesystem::path& path);

}  // namespace evflow::io
