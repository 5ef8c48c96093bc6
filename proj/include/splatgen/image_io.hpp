#pragma once

#include <filesystem>

#include "splatgen/grid.hpp"

namespace splatgen {

/// 8-bit PNG; values are clamped to [0, 1]. 1- and 3-channel images.
void write_png(const std::filesystem::path& path, const Image& image);
/// Reads any PNG as 8-bit RGB scaled to [0, 1].
Image read_png(const std::filesystem::path& path);

/// Little-endian float32 PFM ("PF" for 3 channels, "Pf" for 1).
void write_pfm(const std::filesystem::path& path, const Image& image);
Image read_pfm(const std::filesystem::path& path);

}  // namespace splatgen
