#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "splatgen/geometry.hpp"
#include "splatgen/renderer.hpp"

namespace splatgen {

/// Procedural lambertian scene inside roughly [-1.5, 1.5]^3, y up.
/// complexity 0 gives a single sphere; higher values add a floor slab and
/// `complexity` further spheres/boxes in front of it.
SyntheticScene generate_scene(std::uint64_t seed, int complexity);

/// Reference viewpoint used for scene generation: looks at the origin from
/// (0, 0.8, -3) with +y up.
CameraPose default_camera_pose();
inline constexpr double kDefaultHfovDeg = 60.0;

/// `count` poses on a horizontal arc of radius `radius` around the origin at
/// height `height`, starting at the default camera and spanning `arc_deg`.
std::vector<CameraPose> orbit_poses(int count, double radius, double height,
                                    double arc_deg);

enum class PathKind { kCircular, kForwardFacing, kSpline };

PathKind parse_path_kind(std::string_view name);
std::string_view to_string(PathKind kind);

inline constexpr int kDefaultPathViews = 16;

struct PathOptions {
  Vec3 up = Vec3::UnitY();
  /// Look-at point and circle center.
  Vec3 center = Vec3(0.0, 0.0, 1.0);
  /// Forward-facing: lateral / vertical / depth offset amplitudes.
  double forward_offset = 0.1;
};

struct CameraPath {
  PathKind kind = PathKind::kCircular;
  std::vector<CameraPose> poses;
};

/// Circular: one circle about the axis through `center` along `up`, at the
/// median radius and median height of the input cameras, starting at the
/// angle of the first input camera. Forward-facing: spiral offsets around
/// the first camera, orientation kept. Spline: centripetal Catmull-Rom
/// through the input centers with slerped orientations.
CameraPath sample_camera_path(PathKind kind, std::span<const CameraPose> inputs,
                              int num_views = kDefaultPathViews,
                              const PathOptions& options = {});

}  // namespace splatgen
