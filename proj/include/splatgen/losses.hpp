#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "splatgen/geometry.hpp"
#include "splatgen/grid.hpp"

namespace splatgen {

/// A pointmap and the raymap of the camera that sees it.
struct GeometryMaps {
  Pointmap pointmap;
  Raymap raymap;
};

/// Gradient of a scalar loss with respect to the predicted GeometryMaps.
struct GeometryGrad {
  Grid<Vec3> points;
  Grid<Vec3> origins;
  Grid<Vec3> directions;

  static GeometryGrad zeros(int width, int height);
};

/// Per-dimension latent Gaussian parameters (variances, not std devs).
struct LatentStats {
  std::vector<double> mu;
  std::vector<double> var;
};

struct LatentGrad {
  std::vector<double> mu;
  std::vector<double> var;
};

struct LossWeights {
  double lambda1 = 3e-9;   ///< KL
  double lambda2 = 0.033;  ///< pointmap gradient loss
};

/// Mean over the valid pixels of gt of
///   weight * |pred.P - gt.P|^2 + |pred.r - gt.r|^2,
/// with r the 6-vector (origin, direction).
double loss_rec(const GeometryMaps& pred, const GeometryMaps& gt,
                const Grid<double>& weights, GeometryGrad* grad = nullptr);

/// -1/2 sum_k (1 + log var_k - mu_k^2 - var_k). Sums over k, no mean.
double loss_kl(const LatentStats& stats, LatentGrad* grad = nullptr);

/// Squared error between forward differences of pred and gt along u and v,
/// averaged over the neighbour pairs where both gt pixels are valid.
/// Returns 0 when there is no such pair.
double loss_grad(const Pointmap& pred, const Pointmap& gt,
                 Grid<Vec3>* grad = nullptr);

struct LossBreakdown {
  double rec = 0.0;
  double kl = 0.0;
  double grad = 0.0;
  double total = 0.0;
};

/// loss_rec + lambda1 * loss_kl + lambda2 * loss_grad. Gradients include the
/// lambda factors.
LossBreakdown loss_total(const GeometryMaps& pred, const GeometryMaps& gt,
                         const Grid<double>& weights, const LatentStats& stats,
                         const LossWeights& lambdas = {},
                         GeometryGrad* geometry_grad = nullptr,
                         LatentGrad* latent_grad = nullptr);

/// Mean squared error over every pixel and channel.
double loss_photometric_l2(const Image& rendered, const Image& target);

struct LossInfo {
  std::string_view name;
  bool available;
  std::string_view note;
};

/// Every loss term known to the system, including ones this build cannot
/// evaluate.
std::span<const LossInfo> loss_registry();

}  // namespace splatgen
