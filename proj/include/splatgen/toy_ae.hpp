#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "splatgen/gradcheck.hpp"
#include "splatgen/losses.hpp"

namespace splatgen {

/// A pointmap + raymap tile with its reconstruction weights.
struct TileSample {
  GeometryMaps gt;
  Grid<double> weights;
};

/// `count` tiles of size `tile_size`^2. Each tile is the second view of a
/// ray-traced two-view scene, normalized by the first view.
std::vector<TileSample> make_tile_dataset(std::uint64_t seed, int count,
                                          int tile_size = 16);

/// Pointmap, origins and directions of every pixel, 9 values per pixel in
/// that order. Invalid points are stored as zeros.
Eigen::VectorXd flatten_tile(const GeometryMaps& maps);
/// Inverse of flatten_tile; every pixel of the result is marked valid.
GeometryMaps unflatten_tile(const Eigen::VectorXd& values, int width, int height);

/// Linear VAE: mu = E_mu x + b_mu, log var = E_lv x + b_lv,
/// x_hat = D z + b_d with z = mu + sqrt(var) * eps.
struct ToyAeModel {
  Eigen::MatrixXd enc_mu;
  Eigen::VectorXd b_mu;
  Eigen::MatrixXd enc_logvar;
  Eigen::VectorXd b_logvar;
  Eigen::MatrixXd dec;
  Eigen::VectorXd b_dec;

  static ToyAeModel random(int input_dim, int latent_dim, std::uint64_t seed,
                           double init_scale = 1e-2);

  int input_dim() const { return static_cast<int>(enc_mu.cols()); }
  int latent_dim() const { return static_cast<int>(enc_mu.rows()); }
  std::size_t parameter_count() const;

  std::vector<double> pack() const;
  /// Overwrites the parameters from a packed vector of matching size.
  void unpack(std::span<const double> params);

  LatentStats encode(const Eigen::VectorXd& x) const;
};

/// Mean loss_total over `dataset` as a function of the packed parameters of
/// a model shaped like `shape`. `noise` holds one latent draw per sample
/// (latent_dim x dataset.size()) and is kept fixed, so the function is
/// deterministic and differentiable. `dataset` must outlive the result.
GradientFunction toy_ae_objective(const std::vector<TileSample>& dataset,
                                  const ToyAeModel& shape,
                                  const Eigen::MatrixXd& noise,
                                  const LossWeights& lambdas);

struct ToyAeConfig {
  int latent_dim = 16;
  int steps = 300;
  double learning_rate = 1e-2;
  std::uint64_t seed = 1;
  LossWeights lambdas;
};

struct ToyAeTrainingStep {
  double total = 0.0;
  double rec = 0.0;
  double kl = 0.0;
  double grad = 0.0;
};

struct ToyAeResult {
  ToyAeModel model;
  /// Latent statistics averaged over the dataset after training.
  LatentStats head;
  /// Losses before every update and once after the last one.
  std::vector<ToyAeTrainingStep> curve;
};

/// Adam on the full batch with a fresh reparameterization draw per step.
/// Throws std::runtime_error if the loss becomes non-finite.
ToyAeResult train_toy_linear_ae(const std::vector<TileSample>& dataset,
                                const ToyAeConfig& config);

}  // namespace splatgen
