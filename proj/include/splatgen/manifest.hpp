#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "splatgen/geometry.hpp"
#include "splatgen/renderer.hpp"

namespace splatgen {

inline constexpr int kManifestVersion = 1;

struct ViewRecord {
  Camera camera;
  /// Paths relative to the manifest directory; empty when absent.
  std::string image;
  std::string pointmap;
  std::string depth;
  /// "source" views feed reconstruction; "heldout" views are for evaluation.
  std::string role = "source";
};

struct PathParameters {
  std::string kind = "circular";
  int num_views = 16;
};

struct SceneManifest {
  int format_version = kManifestVersion;
  std::uint64_t seed = 0;
  Vec3 up = Vec3::UnitY();
  Vec3 background = Vec3::Zero();
  SceneNormalization normalization;
  std::vector<ViewRecord> views;
  std::string splat_asset;
  PathParameters path;
  std::optional<SyntheticScene> scene;
};

/// Writes `manifest` as pretty-printed JSON.
void write_manifest(const std::filesystem::path& path, const SceneManifest& manifest);

/// Parses and validates a manifest. Throws FormatError on unknown versions,
/// malformed fields or referenced files that do not exist.
SceneManifest read_manifest(const std::filesystem::path& path);

}  // namespace splatgen
