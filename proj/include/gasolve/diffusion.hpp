#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gasolve {

using Vec = std::vector<double>;

enum class ScheduleKind { VarianceExploding };

/// Forward-noising schedule x_t = alpha_t x_0 + sigma_t eps on [delta, T].
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::VarianceExploding;
  double T = 10.0;
  double delta = 1e-3;

  static NoiseSchedule variance_exploding(double T = 10.0, double delta = 1e-3);

  // Unchecked coefficient evaluations; callers that accept user times go
  // through alpha_sigma()/log_snr() which validate the range.
  double alpha(double t) const noexcept;
  double sigma(double t) const noexcept;
  double alpha_dot(double t) const noexcept;
  double sigma_dot(double t) const noexcept;

  /// Drift f(t) and squared diffusion g^2(t) of the forward SDE.
  double drift(double t) const noexcept;
  double diffusion_sq(double t) const noexcept;

  bool contains(double t) const noexcept { return t >= delta && t <= T; }
  void require(double t) const;
};

struct AlphaSigma {
  double alpha;
  double sigma;
};

AlphaSigma alpha_sigma(const NoiseSchedule& schedule, double t);

/// lambda_t = log(alpha_t / sigma_t); increases as t decreases.
double log_snr(const NoiseSchedule& schedule, double t);

struct MixtureComponent {
  double weight = 1.0;
  Vec mean;
  double var = 1.0;  // isotropic variance s_k^2
};

/// Isotropic Gaussian mixture describing p_data.
class MixtureModel {
 public:
  MixtureModel() = default;
  explicit MixtureModel(std::vector<MixtureComponent> components);

  static MixtureModel single(Vec mean, double var);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<MixtureComponent>& components() const noexcept {
    return components_;
  }

 private:
  std::vector<MixtureComponent> components_;
  std::size_t dim_ = 0;
};

struct State {
  Vec x;
  double t = 0.0;
};

Vec score(const MixtureModel& model, const NoiseSchedule& schedule,
          const State& state);

/// Posterior mean E[x_0 | x_t] via Tweedie's formula.
Vec data_prediction(const MixtureModel& model, const NoiseSchedule& schedule,
                    const State& state);

/// Probability-flow ODE velocity f(t) x - g^2(t)/2 * score.
Vec velocity(const MixtureModel& model, const NoiseSchedule& schedule,
             const State& state);

/// w^T (d score / d x) using the closed-form mixture Hessian.
Vec score_vjp(const MixtureModel& model, const NoiseSchedule& schedule,
              const State& state, std::span<const double> w);

/// d score / d t at fixed x.
Vec score_time_derivative(const MixtureModel& model,
                          const NoiseSchedule& schedule, const State& state);

/// w^T (d x0_hat / d x).
Vec data_prediction_vjp(const MixtureModel& model,
                        const NoiseSchedule& schedule, const State& state,
                        std::span<const double> w);

/// d x0_hat / d t at fixed x.
Vec data_prediction_time_derivative(const MixtureModel& model,
                                    const NoiseSchedule& schedule,
                                    const State& state);

/// Exact PF-ODE flow of a single isotropic Gaussian under the VE schedule.
Vec exact_gaussian_path(const MixtureModel& model,
                        const NoiseSchedule& schedule, const State& from,
                        double to_t);

}  // namespace gasolve
