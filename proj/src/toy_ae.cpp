#include "splatgen/toy_ae.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "splatgen/renderer.hpp"
#include "splatgen/scene_synth.hpp"

namespace splatgen {

namespace {

Eigen::VectorXd flatten_grids(const Grid<Vec3>& points, const Grid<Vec3>& origins,
                              const Grid<Vec3>& directions, const Mask* valid) {
  const std::size_t n = points.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(9 * n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto base = static_cast<Eigen::Index>(9 * i);
    if (!valid || (*valid)[i]) out.segment<3>(base) = points[i];
    out.segment<3>(base + 3) = origins[i];
    out.segment<3>(base + 6) = directions[i];
  }
  return out;
}

struct Evaluation {
  ToyAeTrainingStep loss;
  std::vector<double> grad;
};

Evaluation evaluate(const ToyAeModel& m, const std::vector<TileSample>& dataset,
                    const std::vector<Eigen::VectorXd>& inputs,
                    const Eigen::MatrixXd& noise, const LossWeights& lambdas,
                    bool with_grad) {
  const int latent = m.latent_dim();
  ToyAeModel g;
  if (with_grad) {
    g.enc_mu = Eigen::MatrixXd::Zero(m.enc_mu.rows(), m.enc_mu.cols());
    g.b_mu = Eigen::VectorXd::Zero(latent);
    g.enc_logvar = Eigen::MatrixXd::Zero(m.enc_logvar.rows(), m.enc_logvar.cols());
    g.b_logvar = Eigen::VectorXd::Zero(latent);
    g.dec = Eigen::MatrixXd::Zero(m.dec.rows(), m.dec.cols());
    g.b_dec = Eigen::VectorXd::Zero(m.b_dec.size());
  }

  Evaluation out;
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    const TileSample& s = dataset[n];
    const Eigen::VectorXd& x = inputs[n];
    const Eigen::VectorXd mu = m.enc_mu * x + m.b_mu;
    const Eigen::VectorXd logvar = m.enc_logvar * x + m.b_logvar;
    const Eigen::VectorXd var = logvar.array().exp();
    const Eigen::VectorXd sd = (0.5 * logvar.array()).exp();
    const Eigen::VectorXd eps = noise.col(static_cast<Eigen::Index>(n));
    const Eigen::VectorXd z = mu + sd.cwiseProduct(eps);
    const Eigen::VectorXd y = m.dec * z + m.b_dec;

    const GeometryMaps pred =
        unflatten_tile(y, s.gt.pointmap.width(), s.gt.pointmap.height());
    LatentStats stats{{mu.data(), mu.data() + latent}, {var.data(), var.data() + latent}};
    GeometryGrad gg;
    LatentGrad lg;
    const LossBreakdown b = loss_total(pred, s.gt, s.weights, stats, lambdas,
                                       with_grad ? &gg : nullptr,
                                       with_grad ? &lg : nullptr);
    out.loss.total += inv_n * b.total;
    out.loss.rec += inv_n * b.rec;
    out.loss.kl += inv_n * b.kl;
    out.loss.grad += inv_n * b.grad;
    if (!with_grad) continue;

    const Eigen::VectorXd dy = flatten_grids(gg.points, gg.origins, gg.directions, nullptr);
    const Eigen::VectorXd dz = m.dec.transpose() * dy;
    const Eigen::VectorXd dmu =
        dz + Eigen::Map<const Eigen::VectorXd>(lg.mu.data(), latent);
    // d/dlogvar through z = mu + exp(logvar / 2) eps and through the KL term.
    const Eigen::VectorXd dlogvar =
        0.5 * dz.cwiseProduct(eps).cwiseProduct(sd) +
        Eigen::Map<const Eigen::VectorXd>(lg.var.data(), latent).cwiseProduct(var);

    g.dec.noalias() += inv_n * dy * z.transpose();
    g.b_dec += inv_n * dy;
    g.enc_mu.noalias() += inv_n * dmu * x.transpose();
    g.b_mu += inv_n * dmu;
    g.enc_logvar.noalias() += inv_n * dlogvar * x.transpose();
    g.b_logvar += inv_n * dlogvar;
  }
  if (with_grad) out.grad = g.pack();
  return out;
}

std::vector<Eigen::VectorXd> flatten_inputs(const std::vector<TileSample>& dataset) {
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(dataset.size());
  for (const auto& s : dataset) inputs.push_back(flatten_tile(s.gt));
  return inputs;
}

void check_dataset(const std::vector<TileSample>& dataset, const ToyAeModel& model) {
  if (dataset.empty()) throw std::invalid_argument("toy AE: empty dataset");
  for (const auto& s : dataset) {
    if (9 * static_cast<int>(s.gt.pointmap.points.size()) != model.input_dim()) {
      throw std::invalid_argument("toy AE: tile size does not match the model");
    }
  }
}

Eigen::MatrixXd draw_noise(std::mt19937_64& rng, int rows, std::size_t cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd e(rows, static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    for (Eigen::Index i = 0; i < e.rows(); ++i) e(i, j) = normal(rng);
  }
  return e;
}

}  // namespace

std::vector<TileSample> make_tile_dataset(std::uint64_t seed, int count, int tile_size) {
  if (count < 1 || tile_size < 2) {
    throw std::invalid_argument("make_tile_dataset: need count >= 1 and tile_size >= 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> arc(10.0, 60.0);
  std::uniform_real_distribution<double> radius(2.6, 3.4);
  const auto intr = CameraIntrinsics::from_hfov(tile_size, tile_size, kDefaultHfovDeg);

  std::vector<TileSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const SyntheticScene scene = generate_scene(rng(), 1 + i % 3);
    const auto poses = orbit_poses(2, radius(rng), 0.8, arc(rng));
    std::vector<Pointmap> pms;
    for (const auto& pose : poses) {
      pms.push_back(unproject_depth(intr, pose, raytrace_synthetic(scene, intr, pose).depth));
    }
    const NormalizedScene norm = normalize_scene(poses, pms);
    TileSample s;
    s.gt.pointmap = norm.pointmaps[1];
    s.gt.raymap = compute_raymap(intr, norm.poses[1]);
    s.weights = rec_weights(s.gt.pointmap, norm.poses[1]);
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::VectorXd flatten_tile(const GeometryMaps& maps) {
  return flatten_grids(maps.pointmap.points, maps.raymap.origins, maps.raymap.directions,
                       &maps.pointmap.valid);
}

GeometryMaps unflatten_tile(const Eigen::VectorXd& values, int width, int height) {
  const auto n = static_cast<Eigen::Index>(width) * height;
  if (values.size() != 9 * n) throw std::invalid_argument("unflatten_tile: size mismatch");
  GeometryMaps m;
  m.pointmap = Pointmap(width, height);
  m.raymap.origins = Grid<Vec3>(width, height, Vec3::Zero());
  m.raymap.directions = Grid<Vec3>(width, height, Vec3::Zero());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    m.pointmap.points[k] = values.segment<3>(9 * i);
    m.pointmap.valid[k] = 1;
    m.raymap.origins[k] = values.segment<3>(9 * i + 3);
    m.raymap.directions[k] = values.segment<3>(9 * i + 6);
  }
  return m;
}

ToyAeModel ToyAeModel::random(int input_dim, int latent_dim, std::uint64_t seed,
                              double init_scale) {
  if (input_dim < 1 || latent_dim < 1) {
    throw std::invalid_argument("ToyAeModel: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_scale);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd a(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) a(i, j) = normal(rng);
    }
    return a;
  };
  ToyAeModel m;
  m.enc_mu = fill(latent_dim, input_dim);
  m.b_mu = Eigen::VectorXd::Zero(latent_dim);
  m.enc_logvar = fill(latent_dim, input_dim);
  m.b_logvar = Eigen::VectorXd::Zero(latent_dim);
  m.dec = fill(input_dim, latent_dim);
  m.b_dec = Eigen::VectorXd::Zero(input_dim);
  return m;
}

std::size_t ToyAeModel::parameter_count() const {
  return static_cast<std::size_t>(enc_mu.size() + b_mu.size() + enc_logvar.size() +
                                  b_logvar.size() + dec.size() + b_dec.size());
}

std::vector<double> ToyAeModel::pack() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  auto append = [&](const auto& a) { p.insert(p.end(), a.data(), a.data() + a.size()); };
  append(enc_mu);
  append(b_mu);
  append(enc_logvar);
  append(b_logvar);
  append(dec);
  append(b_dec);
  return p;
}

void ToyAeModel::unpack(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw std::invalid_argument("ToyAeModel::unpack: expected " +
                                std::to_string(parameter_count()) + " values");
  }
  std::size_t offset = 0;
  auto take = [&](auto& a) {
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), a.size(), a.data());
    offset += static_cast<std::size_t>(a.size());
  };
  take(enc_mu);
  take(b_mu);
  take(enc_logvar);
  take(b_logvar);
  take(dec);
  take(b_dec);
}

LatentStats ToyAeModel::encode(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd mu = enc_mu * x + b_mu;
  const Eigen::VectorXd var = (enc_logvar * x + b_logvar).array().exp();
  return {{mu.data(), mu.data() + mu.size()}, {var.data(), var.data() + var.size()}};
}

GradientFunction toy_ae_objective(const std::vector<TileSample>& dataset,
                                  const ToyAeModel& shape, const Eigen::MatrixXd& noise,
                                  const LossWeights& lambdas) {
  check_dataset(dataset, shape);
  if (noise.rows() != shape.latent_dim() ||
      noise.cols() != static_cast<Eigen::Index>(dataset.size())) {
    throw std::invalid_argument("toy_ae_objective: noise must be latent_dim x samples");
  }
  auto inputs = flatten_inputs(dataset);
  return [&dataset, model = shape, inputs = std::move(inputs), noise, lambdas](
             std::span<const double> x, std::span<double> grad) mutable {
    model.unpack(x);
    Evaluation e = evaluate(model, dataset, inputs, noise, lambdas, !grad.empty());
    if (!grad.empty()) std::copy(e.grad.begin(), e.grad.end(), grad.begin());
    return e.loss.total;
  };
}

ToyAeResult train_toy_linear_ae(const std::vector<TileSample>& dataset,
                                const ToyAeConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("train_toy_linear_ae: empty dataset");
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("train_toy_linear_ae: learning rate must be > 0");
  }
  if (config.steps < 0) throw std::invalid_argument("train_toy_linear_ae: negative steps");

  const int input_dim = 9 * static_cast<int>(dataset.front().gt.pointmap.points.size());
  ToyAeResult result;
  result.model = ToyAeModel::random(input_dim, config.latent_dim, config.seed);
  check_dataset(dataset, result.model);
  const auto inputs = flatten_inputs(dataset);

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<double> params = result.model.pack();
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  auto check_finite = [](const ToyAeTrainingStep& s, int step) {
    if (!std::isfinite(s.total)) {
      throw std::runtime_error("train_toy_linear_ae: loss diverged at step " +
                               std::to_string(step));
    }
  };

  for (int step = 0; step < config.steps; ++step) {
    const Eigen::MatrixXd noise = draw_noise(rng, config.latent_dim, dataset.size());
    Evaluation e = evaluate(result.model, dataset, inputs, noise, config.lambdas, true);
    check_finite(e.loss, step);
    result.curve.push_back(e.loss);

    const double c1 = 1.0 - std::pow(beta1, step + 1);
    const double c2 = 1.0 - std::pow(beta2, step + 1);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m1[i] = beta1 * m1[i] + (1.0 - beta1) * e.grad[i];
      m2[i] = beta2 * m2[i] + (1.0 - beta2) * e.grad[i] * e.grad[i];
      params[i] -= config.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + adam_eps);
    }
    result.model.unpack(params);
  }
  const Eigen::MatrixXd noise = draw_noise(rng, config.latent_dim, dataset.size());
  const Evaluation last = evaluate(result.model, dataset, inputs, noise, config.lambdas, false);
  check_finite(last.loss, config.steps);
  result.curve.push_back(last.loss);

  const int latent = config.latent_dim;
  result.head.mu.assign(static_cast<std::size_t>(latent), 0.0);
  result.head.var.assign(static_cast<std::size_t>(latent), 0.0);
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  for (const auto& x : inputs) {
    const LatentStats s = result.model.encode(x);
    for (int k = 0; k < latent; ++k) {
      result.head.mu[static_cast<std::size_t>(k)] += inv_n * s.mu[static_cast<std::size_t>(k)];
      result.head.var[static_cast<std::size_t>(k)] += inv_n * s.var[static_cast<std::size_t>(k)];
    }
  }
  return result;
}

}  // namespace splatgen
