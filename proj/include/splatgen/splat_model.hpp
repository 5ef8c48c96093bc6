#pragma once

#include <span>
#include <vector>

#include "splatgen/geometry.hpp"
#include "splatgen/grid.hpp"

namespace splatgen {

/// One colored 3D Gaussian. Quaternions serialize as (w, x, y, z).
struct Gaussian3D {
  Vec3 mean = Vec3::Zero();
  double opacity = 1.0;
  Vec3 scale = Vec3::Ones();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 color = Vec3::Zero();

  /// R diag(s^2) R^T
  Mat3 covariance() const;
  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

struct SplatterImage {
  Camera camera;
  Grid<Gaussian3D> gaussians;
  Mask valid;

  std::size_t valid_count() const;
};

struct Provenance {
  int view = -1;
  int u = -1;
  int v = -1;
};

struct GaussianScene {
  std::vector<Gaussian3D> gaussians;
  /// Parallel to `gaussians`; view -1 marks unknown origin (e.g. imports).
  std::vector<Provenance> source;

  std::size_t size() const { return gaussians.size(); }
  bool empty() const { return gaussians.empty(); }
  void push_back(const Gaussian3D& g, Provenance p = {}) {
    gaussians.push_back(g);
    source.push_back(p);
  }
};

/// Moves each valid point onto its pixel ray, keeping camera-frame z.
/// Pixels with camera-frame z <= 0 become invalid.
Pointmap calibrate_pointmap(const Pointmap& pointmap,
                            const CameraIntrinsics& intrinsics,
                            const CameraPose& pose);

/// Parameters of the analytic stand-in for a learned Gaussian head.
struct HeadParams {
  double opacity_logit = 5.0;
  /// Multiplies the z-scaled pixel footprint through exp().
  double log_scale = -2.0;
};

/// Emits one Gaussian per valid pixel: the mean is the (calibrated) point,
/// opacity = sigmoid(opacity_logit), scale = exp(log_scale) * z * (1/fx,
/// 1/fy, 1/sqrt(fx fy)), with the local z axis along the pixel ray.
std::vector<SplatterImage> analytic_gaussian_head(
    std::span<const Image> images, std::span<const Pointmap> pointmaps,
    std::span<const Camera> cameras, const HeadParams& params = {});

GaussianScene merge_splatter_images(std::span<const SplatterImage> images);

/// Keeps Gaussians with opacity >= threshold, in order.
GaussianScene cull_transparent(const GaussianScene& scene, double threshold);

}  // namespace splatgen
