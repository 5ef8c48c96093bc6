#include "splatgen/diffusion.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace splatgen {

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "linear-beta") return ScheduleKind::kLinearBeta;
  if (name == "cosine") return ScheduleKind::kCosine;
  throw std::invalid_argument("unknown schedule kind: " + std::string(name));
}

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kCosine ? "cosine" : "linear-beta";
}

NoiseSchedule::NoiseSchedule(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  if (alphas_.size() < 2) {
    throw std::invalid_argument("NoiseSchedule: need at least one step");
  }
  if (alphas_.front() != 1.0) {
    throw std::invalid_argument("NoiseSchedule: alpha_0 must be exactly 1");
  }
  for (std::size_t t = 0; t < alphas_.size(); ++t) {
    const double a = alphas_[t];
    if (!(a >= 0.0 && a <= 1.0)) {
      throw std::invalid_argument("NoiseSchedule: alpha outside [0, 1]");
    }
    if (t > 0 && a > alphas_[t - 1]) {
      throw std::invalid_argument("NoiseSchedule: alpha must be non-increasing");
    }
  }
  sigmas_.resize(alphas_.size());
  for (std::size_t t = 0; t < alphas_.size(); ++t) {
    sigmas_[t] = std::sqrt(std::max(0.0, 1.0 - alphas_[t] * alphas_[t]));
  }
}

std::size_t NoiseSchedule::check(int t) const {
  if (t < 0 || t > steps()) {
    throw std::out_of_range("NoiseSchedule: timestep " + std::to_string(t) +
                            " outside [0, " + std::to_string(steps()) + "]");
  }
  return static_cast<std::size_t>(t);
}

double NoiseSchedule::snr(int t) const {
  const double s = sigma(t);
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return alpha(t) * alpha(t) / (s * s);
}

NoiseSchedule make_schedule(ScheduleKind kind, int steps) {
  if (steps < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
  std::vector<double> alphas(static_cast<std::size_t>(steps) + 1);
  alphas[0] = 1.0;
  if (kind == ScheduleKind::kLinearBeta) {
    const double scale = 1000.0 / steps;
    const double beta_start = std::min(0.999, 1e-4 * scale);
    const double beta_end = std::min(0.999, 2e-2 * scale);
    double alpha_bar = 1.0;
    for (int t = 1; t <= steps; ++t) {
      const double frac = steps == 1 ? 1.0 : static_cast<double>(t - 1) / (steps - 1);
      const double beta = beta_start + frac * (beta_end - beta_start);
      alpha_bar *= 1.0 - beta;
      alphas[t] = std::sqrt(alpha_bar);
    }
  } else {
    constexpr double kOffset = 0.008;
    auto f = [&](int t) {
      const double x = (static_cast<double>(t) / steps + kOffset) / (1.0 + kOffset);
      return std::cos(x * std::numbers::pi / 2.0);
    };
    const double f0 = f(0);
    for (int t = 1; t <= steps; ++t) alphas[t] = std::clamp(f(t) / f0, 0.0, 1.0);
  }
  return NoiseSchedule(std::move(alphas));
}

NoiseSchedule rescale_zero_terminal_snr(const NoiseSchedule& schedule) {
  const auto& a = schedule.alphas();
  const double a0 = a.front();
  const double a_end = a.back();
  if (!(a0 - a_end > 0.0)) {
    throw std::invalid_argument("rescale_zero_terminal_snr: flat schedule");
  }
  std::vector<double> out(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    out[t] = (a[t] - a_end) / (a0 - a_end) * a0;
  }
  out.front() = 1.0;
  out.back() = 0.0;
  return NoiseSchedule(std::move(out));
}

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b,
                       const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": size mismatch");
  }
}

// out = ca * a + cb * b
std::vector<double> axpby(double ca, std::span<const double> a, double cb,
                          std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ca * a[i] + cb * b[i];
  return out;
}

}  // namespace

std::vector<double> forward_diffuse(std::span<const double> x0, int t,
                                    std::span<const double> eps,
                                    const NoiseSchedule& schedule) {
  require_same_size(x0, eps, "forward_diffuse");
  return axpby(schedule.alpha(t), x0, schedule.sigma(t), eps);
}

std::vector<double> v_from(std::span<const double> x0, std::span<const double> eps,
                           int t, const NoiseSchedule& schedule) {
  require_same_size(x0, eps, "v_from");
  return axpby(schedule.alpha(t), eps, -schedule.sigma(t), x0);
}

std::vector<double> x0_from_v(std::span<const double> x_t, std::span<const double> v,
                              int t, const NoiseSchedule& schedule) {
  require_same_size(x_t, v, "x0_from_v");
  return axpby(schedule.alpha(t), x_t, -schedule.sigma(t), v);
}

std::vector<double> eps_from_v(std::span<const double> x_t, std::span<const double> v,
                               int t, const NoiseSchedule& schedule) {
  require_same_size(x_t, v, "eps_from_v");
  return axpby(schedule.sigma(t), x_t, schedule.alpha(t), v);
}

std::vector<double> ddim_step(std::span<const double> x_t,
                              std::span<const double> v_hat, int t, int s,
                              double eta, const NoiseSchedule& schedule,
                              std::span<const double> noise) {
  if (!(0 <= s && s < t && t <= schedule.steps())) {
    throw std::invalid_argument("ddim_step: need 0 <= s < t <= T");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("ddim_step: eta outside [0, 1]");
  }
  require_same_size(x_t, v_hat, "ddim_step");
  if (eta > 0.0) require_same_size(x_t, noise, "ddim_step noise");

  const auto x0 = x0_from_v(x_t, v_hat, t, schedule);
  const auto eps = eps_from_v(x_t, v_hat, t, schedule);
  const double a_t = schedule.alpha(t);
  const double a_s = schedule.alpha(s);
  const double s_t = schedule.sigma(t);
  const double s_s = schedule.sigma(s);

  // Standard DDIM stochasticity: tau^2 = (sigma_s^2 / sigma_t^2) (1 - alpha_t^2 / alpha_s^2).
  double tau = 0.0;
  if (s_t > 0.0 && a_s > 0.0) {
    const double ratio = a_t / a_s;
    tau = (s_s / s_t) * std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  }
  const double stoch = eta * tau;
  const double dir = std::sqrt(std::max(0.0, s_s * s_s - stoch * stoch));

  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a_s * x0[i] + dir * eps[i] + (stoch > 0.0 ? stoch * noise[i] : 0.0);
  }
  return out;
}

DeltaDenoiser::DeltaDenoiser(std::vector<double> target) : target_(std::move(target)) {
  if (target_.empty()) throw std::invalid_argument("DeltaDenoiser: empty target");
}

std::vector<double> DeltaDenoiser::predict_v(std::span<const double> x_t, int dim,
                                             int t, const NoiseSchedule& schedule) const {
  if (dim != static_cast<int>(target_.size()) || x_t.size() % target_.size() != 0) {
    throw std::invalid_argument("DeltaDenoiser: dimension mismatch");
  }
  const double a = schedule.alpha(t);
  const double s = schedule.sigma(t);
  if (s == 0.0) throw std::domain_error("DeltaDenoiser: v undefined at sigma = 0");
  std::vector<double> v(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    v[i] = (a * x_t[i] - target_[i % target_.size()]) / s;
  }
  return v;
}

Eigen::VectorXd gm_posterior_x0(const Eigen::VectorXd& x_t, int t,
                                std::span<const MixtureComponent> mixture,
                                const NoiseSchedule& schedule) {
  if (mixture.empty()) throw std::invalid_argument("gm_posterior: empty mixture");
  const double a = schedule.alpha(t);
  const double s = schedule.sigma(t);
  const Eigen::Index d = x_t.size();

  std::vector<double> log_resp(mixture.size());
  std::vector<Eigen::VectorXd> means(mixture.size());
  for (std::size_t k = 0; k < mixture.size(); ++k) {
    const auto& comp = mixture[k];
    if (comp.mean.size() != d || comp.covariance.rows() != d ||
        comp.covariance.cols() != d) {
      throw std::invalid_argument("gm_posterior: component dimension mismatch");
    }
    if (!(comp.weight > 0.0)) {
      log_resp[k] = -std::numeric_limits<double>::infinity();
      means[k] = comp.mean;
      continue;
    }
    // x_t | k ~ N(a m, a^2 C + s^2 I)
    const Eigen::MatrixXd marginal =
        a * a * comp.covariance + s * s * Eigen::MatrixXd::Identity(d, d);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(marginal);
    const Eigen::VectorXd resid = x_t - a * comp.mean;
    const auto diag = ldlt.vectorD();
    if (diag.minCoeff() <= 0.0) {
      // Degenerate marginal (delta data at sigma = 0): match only on the mean.
      log_resp[k] = resid.squaredNorm() == 0.0 ? std::log(comp.weight)
                                               : -std::numeric_limits<double>::infinity();
      means[k] = comp.mean;
      continue;
    }
    const Eigen::VectorXd solved = ldlt.solve(resid);
    const double log_det = diag.array().log().sum();
    log_resp[k] = std::log(comp.weight) -
                  0.5 * (resid.dot(solved) + log_det +
                         static_cast<double>(d) * std::log(2.0 * std::numbers::pi));
    means[k] = comp.mean + a * comp.covariance * solved;
  }

  const double max_log = *std::max_element(log_resp.begin(), log_resp.end());
  if (!std::isfinite(max_log)) {
    throw std::domain_error("gm_posterior: x_t has zero likelihood under the mixture");
  }
  double norm = 0.0;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < mixture.size(); ++k) {
    const double r = std::exp(log_resp[k] - max_log);
    norm += r;
    x0 += r * means[k];
  }
  return x0 / norm;
}

Eigen::VectorXd gm_posterior_v(const Eigen::VectorXd& x_t, int t,
                               std::span<const MixtureComponent> mixture,
                               const NoiseSchedule& schedule) {
  const double s = schedule.sigma(t);
  if (s == 0.0) throw std::domain_error("gm_posterior_v: v undefined at sigma = 0");
  const Eigen::VectorXd x0 = gm_posterior_x0(x_t, t, mixture, schedule);
  return (schedule.alpha(t) * x_t - x0) / s;
}

GaussianMixtureDenoiser::GaussianMixtureDenoiser(std::vector<MixtureComponent> mixture)
    : mixture_(std::move(mixture)) {
  if (mixture_.empty()) throw std::invalid_argument("GaussianMixtureDenoiser: empty");
  double total = 0.0;
  for (const auto& c : mixture_) total += c.weight;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("GaussianMixtureDenoiser: weights must sum to 1");
  }
}

std::vector<double> GaussianMixtureDenoiser::predict_v(std::span<const double> x_t,
                                                       int dim, int t,
                                                       const NoiseSchedule& schedule) const {
  if (dim < 1 || x_t.size() % static_cast<std::size_t>(dim) != 0) {
    throw std::invalid_argument("GaussianMixtureDenoiser: bad dimension");
  }
  std::vector<double> v(x_t.size());
  const std::size_t rows = x_t.size() / dim;
  for (std::size_t r = 0; r < rows; ++r) {
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(x_t.data() + r * dim, dim);
    const Eigen::VectorXd out = gm_posterior_v(x, t, mixture_, schedule);
    std::copy(out.data(), out.data() + dim, v.begin() + r * dim);
  }
  return v;
}

std::vector<int> ddim_timesteps(int total_steps, int num_steps) {
  if (num_steps < 1 || num_steps > total_steps) {
    throw std::invalid_argument("ddim_timesteps: need 1 <= steps <= T");
  }
  std::vector<int> ts(static_cast<std::size_t>(num_steps) + 1);
  for (int i = 0; i <= num_steps; ++i) {
    ts[i] = static_cast<int>(static_cast<std::int64_t>(i) * total_steps / num_steps);
  }
  return ts;
}

std::vector<double> sample(const Denoiser& denoiser, const NoiseSchedule& schedule,
                           int num_steps, double eta, std::uint64_t seed,
                           SampleShape shape,
                           std::vector<std::vector<double>>* trajectory) {
  if (shape.rows < 1 || shape.dim < 1) {
    throw std::invalid_argument("sample: shape must be positive");
  }
  const auto ts = ddim_timesteps(schedule.steps(), num_steps);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = static_cast<std::size_t>(shape.rows) * shape.dim;

  std::vector<double> x(n);
  for (auto& xi : x) xi = normal(rng);
  if (trajectory) trajectory->assign(1, x);

  std::vector<double> noise;
  for (int i = num_steps; i >= 1; --i) {
    const int t = ts[i];
    const int s = ts[i - 1];
    const auto v = denoiser.predict_v(x, shape.dim, t, schedule);
    noise.clear();
    if (eta > 0.0) {
      noise.resize(n);
      for (auto& e : noise) e = normal(rng);
    }
    x = ddim_step(x, v, t, s, eta, schedule, noise);
    if (trajectory) trajectory->push_back(x);
  }
  return x;
}

}  // namespace splatgen
