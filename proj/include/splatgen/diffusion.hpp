#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace splatgen {

enum class ScheduleKind { kLinearBeta, kCosine };

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

/// Variance-preserving schedule: x_t = alpha_t x_0 + sigma_t eps with
/// alpha_t^2 + sigma_t^2 = 1, indexed t = 0..T.
class NoiseSchedule {
 public:
  NoiseSchedule(std::vector<double> alphas);

  int steps() const { return static_cast<int>(alphas_.size()) - 1; }
  double alpha(int t) const { return alphas_.at(check(t)); }
  double sigma(int t) const { return sigmas_.at(check(t)); }
  double snr(int t) const;
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<double>& sigmas() const { return sigmas_; }

 private:
  std::size_t check(int t) const;

  std::vector<double> alphas_;
  std::vector<double> sigmas_;
};

/// Linear-beta: beta linear in [1e-4, 2e-2] * 1000 / T, alpha_t =
/// sqrt(prod(1 - beta)). Cosine: alpha_t = cos((t/T + s)/(1 + s) pi/2)
/// normalized to alpha_0 = 1, s = 0.008.
NoiseSchedule make_schedule(ScheduleKind kind, int steps);

/// Affine rescale of alpha so that alpha_0 = 1 and alpha_T = 0 exactly.
NoiseSchedule rescale_zero_terminal_snr(const NoiseSchedule& schedule);

std::vector<double> forward_diffuse(std::span<const double> x0, int t,
                                    std::span<const double> eps,
                                    const NoiseSchedule& schedule);

/// v = alpha_t eps - sigma_t x0
std::vector<double> v_from(std::span<const double> x0, std::span<const double> eps,
                           int t, const NoiseSchedule& schedule);
/// x0 = alpha_t x_t - sigma_t v
std::vector<double> x0_from_v(std::span<const double> x_t, std::span<const double> v,
                              int t, const NoiseSchedule& schedule);
/// eps = sigma_t x_t + alpha_t v
std::vector<double> eps_from_v(std::span<const double> x_t, std::span<const double> v,
                               int t, const NoiseSchedule& schedule);

/// One DDIM update from t to s < t. eta = 0 is deterministic; eta = 1
/// matches ancestral sampling. `noise` may be empty when eta = 0.
std::vector<double> ddim_step(std::span<const double> x_t,
                              std::span<const double> v_hat, int t, int s,
                              double eta, const NoiseSchedule& schedule,
                              std::span<const double> noise);

/// Maps a noisy batch to a v prediction. The flat input holds `rows`
/// samples of `dim` values each, row-major.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual std::vector<double> predict_v(std::span<const double> x_t, int dim,
                                        int t, const NoiseSchedule& schedule) const = 0;
};

/// Exact denoiser for data concentrated at a single point.
class DeltaDenoiser final : public Denoiser {
 public:
  explicit DeltaDenoiser(std::vector<double> target);
  std::vector<double> predict_v(std::span<const double> x_t, int dim, int t,
                                const NoiseSchedule& schedule) const override;
  const std::vector<double>& target() const { return target_; }

 private:
  std::vector<double> target_;
};

struct MixtureComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Posterior mean E[x0 | x_t] for data drawn from a Gaussian mixture.
Eigen::VectorXd gm_posterior_x0(const Eigen::VectorXd& x_t, int t,
                                std::span<const MixtureComponent> mixture,
                                const NoiseSchedule& schedule);

/// gm_posterior_x0 expressed as a v prediction.
Eigen::VectorXd gm_posterior_v(const Eigen::VectorXd& x_t, int t,
                               std::span<const MixtureComponent> mixture,
                               const NoiseSchedule& schedule);

class GaussianMixtureDenoiser final : public Denoiser {
 public:
  explicit GaussianMixtureDenoiser(std::vector<MixtureComponent> mixture);
  std::vector<double> predict_v(std::span<const double> x_t, int dim, int t,
                                const NoiseSchedule& schedule) const override;

 private:
  std::vector<MixtureComponent> mixture_;
};

/// Uniformly strided timesteps T = t_K > ... > t_0 = 0.
std::vector<int> ddim_timesteps(int total_steps, int num_steps);

struct SampleShape {
  int rows = 1;
  int dim = 1;
};

/// DDIM sampling from unit Gaussian noise at t = T. When `trajectory` is
/// non-null it receives the state after every step, starting with x_T.
std::vector<double> sample(const Denoiser& denoiser, const NoiseSchedule& schedule,
                           int num_steps, double eta, std::uint64_t seed,
                           SampleShape shape,
                           std::vector<std::vector<double>>* trajectory = nullptr);

}  // namespace splatgen
