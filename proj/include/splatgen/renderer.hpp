#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "splatgen/geometry.hpp"
#include "splatgen/grid.hpp"
#include "splatgen/splat_model.hpp"

namespace splatgen {

struct RenderedImage {
  Image rgb;    ///< 3 channels
  Image alpha;  ///< 1 channel, accumulated opacity
  Image depth;  ///< 1 channel, alpha-normalized expected camera-frame depth
  /// Gaussians dropped because their projected covariance was degenerate.
  std::size_t skipped_degenerate = 0;
};

struct RenderOptions {
  Vec3 background = Vec3::Zero();
  /// Added to the diagonal of every projected 2x2 covariance (pixels^2).
  double dilation = 0.3;
  /// Contributions below this alpha are skipped.
  double min_alpha = 1.0 / 255.0;
  /// Projected covariances with a larger condition number are skipped.
  double max_condition = 1e12;
  /// Gaussians closer than this camera-frame depth are culled.
  double near_plane = 1e-6;
  /// Worker threads for the tiled path; 0 picks hardware concurrency.
  unsigned threads = 0;
};

/// Exhaustive splatting: every Gaussian is evaluated at every pixel after a
/// global depth sort. This is the correctness oracle.
RenderedImage render_reference(const GaussianScene& scene,
                               const CameraIntrinsics& intrinsics,
                               const CameraPose& pose,
                               const RenderOptions& options = {});

/// Same compositing as render_reference, with Gaussians binned to square
/// tiles by a conservative screen-space radius.
RenderedImage render_tiled(const GaussianScene& scene,
                           const CameraIntrinsics& intrinsics,
                           const CameraPose& pose, int tile_size,
                           const RenderOptions& options = {});

// --- Ray-traced ground truth ----------------------------------------------

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Infinite plane through `point` with normal `normal`.
struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitY();
};

/// Axis-aligned box.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_size = Vec3::Ones();
};

using Shape = std::variant<Sphere, Plane, Box>;

struct Primitive {
  Shape shape;
  Vec3 albedo = Vec3::Constant(0.8);
};

struct SyntheticScene {
  std::vector<Primitive> primitives;
  Vec3 background = Vec3(0.1, 0.1, 0.12);
  /// Unit direction towards a distant light, fixed in the world. Defaults to
  /// the direction of the reference camera of generate_scene.
  Vec3 light_direction = Vec3(-0.5, 1.0, -0.7).normalized();

  /// Throws on non-positive radii or sizes or a zero light direction.
  void validate() const;
};

struct RayHit {
  double t = 0.0;
  Vec3 normal = Vec3::Zero();
};

/// Nearest hit with t > t_min along origin + t * dir (dir need not be unit).
std::optional<RayHit> intersect(const Shape& shape, const Vec3& origin,
                                const Vec3& dir, double t_min = 1e-9);

struct TracedView {
  RenderedImage image;
  DepthMap depth;
};

/// Lambertian shading under the scene's fixed directional light plus a small
/// ambient term, so colors do not depend on the viewpoint. Misses get the
/// background color and invalid depth.
TracedView raytrace_synthetic(const SyntheticScene& scene,
                              const CameraIntrinsics& intrinsics,
                              const CameraPose& pose);

}  // namespace splatgen
