#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "splatgen/geometry.hpp"
#include "splatgen/splat_model.hpp"

namespace splatgen {

/// Malformed, truncated or unsupported file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- .splat: chunk-quantized Gaussians (layout in docs/formats.md) ---------

inline constexpr std::size_t kSplatChunkSize = 256;
inline constexpr std::uint32_t kSplatVersion = 1;
inline constexpr std::size_t kSplatHeaderBytes = 16;
inline constexpr std::size_t kSplatChunkHeaderBytes = 4 + 12 * 4;
inline constexpr std::size_t kSplatRecordBytes = 17;

struct SplatChunkBounds {
  Eigen::Vector3f position_min;
  Eigen::Vector3f position_max;
  Eigen::Vector3f log_scale_min;
  Eigen::Vector3f log_scale_max;
};

struct SplatFileInfo {
  std::uint32_t version = 0;
  std::uint32_t count = 0;
  std::uint32_t chunk_count = 0;
  std::vector<std::uint32_t> chunk_counts;
  std::vector<SplatChunkBounds> bounds;
};

std::size_t splat_chunk_count(std::size_t gaussians);

std::vector<std::uint8_t> encode_splat(const GaussianScene& scene);
GaussianScene decode_splat(std::span<const std::uint8_t> bytes,
                           SplatFileInfo* info = nullptr);

void export_splat(const GaussianScene& scene, const std::filesystem::path& path);
GaussianScene import_splat(const std::filesystem::path& path,
                           SplatFileInfo* info = nullptr);

// --- .ply: binary little-endian, float32 per attribute --------------------

std::vector<std::uint8_t> encode_ply(const GaussianScene& scene);
GaussianScene decode_ply(std::span<const std::uint8_t> bytes);
void export_ply(const GaussianScene& scene, const std::filesystem::path& path);
GaussianScene import_ply(const std::filesystem::path& path);

// --- .pointmap: float32 points plus a validity bitmap ---------------------

std::vector<std::uint8_t> encode_pointmap(const Pointmap& pointmap);
Pointmap decode_pointmap(std::span<const std::uint8_t> bytes);
void write_pointmap(const std::filesystem::path& path, const Pointmap& pointmap);
Pointmap read_pointmap(const std::filesystem::path& path);

// --- helpers ---------------------------------------------------------------

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace splatgen
