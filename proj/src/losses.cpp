#include "splatgen/losses.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace splatgen {

GeometryGrad GeometryGrad::zeros(int width, int height) {
  return {Grid<Vec3>(width, height, Vec3::Zero()),
          Grid<Vec3>(width, height, Vec3::Zero()),
          Grid<Vec3>(width, height, Vec3::Zero())};
}

namespace {

void check_geometry_shapes(const GeometryMaps& pred, const GeometryMaps& gt) {
  const auto& p = pred.pointmap.points;
  const auto& g = gt.pointmap.points;
  if (!p.same_shape(g) || !g.same_shape(gt.pointmap.valid) ||
      !pred.raymap.origins.same_shape(g) || !pred.raymap.directions.same_shape(g) ||
      !gt.raymap.origins.same_shape(g) || !gt.raymap.directions.same_shape(g)) {
    throw std::invalid_argument("loss: prediction and target shapes differ");
  }
}

}  // namespace

double loss_rec(const GeometryMaps& pred, const GeometryMaps& gt,
                const Grid<double>& weights, GeometryGrad* grad) {
  check_geometry_shapes(pred, gt);
  if (!weights.same_shape(gt.pointmap.points)) {
    throw std::invalid_argument("loss_rec: weight map shape differs");
  }
  const std::size_t n_valid = gt.pointmap.valid_count();
  if (grad) {
    *grad = GeometryGrad::zeros(gt.pointmap.width(), gt.pointmap.height());
  }
  if (n_valid == 0) return 0.0;

  const double inv_n = 1.0 / static_cast<double>(n_valid);
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!gt.pointmap.valid[i]) continue;
    const Vec3 dp = pred.pointmap.points[i] - gt.pointmap.points[i];
    const Vec3 dor = pred.raymap.origins[i] - gt.raymap.origins[i];
    const Vec3 ddir = pred.raymap.directions[i] - gt.raymap.directions[i];
    sum += weights[i] * dp.squaredNorm() + dor.squaredNorm() + ddir.squaredNorm();
    if (grad) {
      grad->points[i] = 2.0 * weights[i] * inv_n * dp;
      grad->origins[i] = 2.0 * inv_n * dor;
      grad->directions[i] = 2.0 * inv_n * ddir;
    }
  }
  return sum * inv_n;
}

double loss_kl(const LatentStats& stats, LatentGrad* grad) {
  if (stats.mu.size() != stats.var.size()) {
    throw std::invalid_argument("loss_kl: mu and var differ in length");
  }
  if (grad) {
    grad->mu.assign(stats.mu.size(), 0.0);
    grad->var.assign(stats.var.size(), 0.0);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < stats.mu.size(); ++k) {
    const double mu = stats.mu[k];
    const double var = stats.var[k];
    if (!(var > 0.0)) throw std::invalid_argument("loss_kl: non-positive variance");
    sum += 1.0 + std::log(var) - mu * mu - var;
    if (grad) {
      grad->mu[k] = mu;
      grad->var[k] = -0.5 * (1.0 / var - 1.0);
    }
  }
  return -0.5 * sum;
}

double loss_grad(const Pointmap& pred, const Pointmap& gt, Grid<Vec3>* grad) {
  if (!pred.points.same_shape(gt.points) || !gt.points.same_shape(gt.valid)) {
    throw std::invalid_argument("loss_grad: prediction and target shapes differ");
  }
  const int w = gt.width();
  const int h = gt.height();
  if (grad) *grad = Grid<Vec3>(w, h, Vec3::Zero());

  // Pass 1 counts pairs so gradients can be scaled in a single pass 2.
  std::size_t pairs = 0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!gt.valid(u, v)) continue;
      if (u + 1 < w && gt.valid(u + 1, v)) ++pairs;
      if (v + 1 < h && gt.valid(u, v + 1)) ++pairs;
    }
  }
  if (pairs == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(pairs);

  double sum = 0.0;
  auto accumulate = [&](int u0, int v0, int u1, int v1) {
    const Vec3 diff = (pred.points(u1, v1) - pred.points(u0, v0)) -
                      (gt.points(u1, v1) - gt.points(u0, v0));
    sum += diff.squaredNorm();
    if (grad) {
      const Vec3 g = 2.0 * inv_n * diff;
      (*grad)(u1, v1) += g;
      (*grad)(u0, v0) -= g;
    }
  };
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!gt.valid(u, v)) continue;
      if (u + 1 < w && gt.valid(u + 1, v)) accumulate(u, v, u + 1, v);
      if (v + 1 < h && gt.valid(u, v + 1)) accumulate(u, v, u, v + 1);
    }
  }
  return sum * inv_n;
}

LossBreakdown loss_total(const GeometryMaps& pred, const GeometryMaps& gt,
                         const Grid<double>& weights, const LatentStats& stats,
                         const LossWeights& lambdas, GeometryGrad* geometry_grad,
                         LatentGrad* latent_grad) {
  if (!(lambdas.lambda1 >= 0.0) || !(lambdas.lambda2 >= 0.0)) {
    throw std::invalid_argument("loss_total: loss weights must be >= 0");
  }
  LossBreakdown out;
  out.rec = loss_rec(pred, gt, weights, geometry_grad);
  out.kl = loss_kl(stats, latent_grad);
  Grid<Vec3> grad_points;
  out.grad = loss_grad(pred.pointmap, gt.pointmap,
                       geometry_grad ? &grad_points : nullptr);
  out.total = out.rec + lambdas.lambda1 * out.kl + lambdas.lambda2 * out.grad;

  if (geometry_grad) {
    for (std::size_t i = 0; i < grad_points.size(); ++i) {
      geometry_grad->points[i] += lambdas.lambda2 * grad_points[i];
    }
  }
  if (latent_grad) {
    for (auto& g : latent_grad->mu) g *= lambdas.lambda1;
    for (auto& g : latent_grad->var) g *= lambdas.lambda1;
  }
  return out;
}

double loss_photometric_l2(const Image& rendered, const Image& target) {
  require_same_shape(rendered, target, "loss_photometric_l2");
  if (rendered.data().empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < rendered.data().size(); ++i) {
    const double d = rendered.data()[i] - target.data()[i];
    sum += d * d;
  }
  return sum / static_cast<double>(rendered.data().size());
}

std::span<const LossInfo> loss_registry() {
  static constexpr std::array<LossInfo, 5> kRegistry{{
      {"rec", true, "distance-weighted pointmap + raymap L2"},
      {"kl", true, "KL divergence of the latent to a standard normal"},
      {"grad", true, "L2 on horizontal/vertical pointmap differences"},
      {"photometric_l2", true, "mean squared RGB error"},
      {"perceptual", false,
       "LPIPS needs pretrained network weights; not available in this build"},
  }};
  return kRegistry;
}

}  // namespace splatgen
