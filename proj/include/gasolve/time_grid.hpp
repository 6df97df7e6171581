#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gasolve/diffusion.hpp"

namespace gasolve {

/// Timesteps stored high-noise first: t_0 = T > t_1 > ... > t_N.
struct TimeGrid {
  std::vector<double> t;

  std::size_t steps() const noexcept { return t.empty() ? 0 : t.size() - 1; }
  double operator[](std::size_t i) const { return t[i]; }
};

/// Final stick-breaking portion used when initializing from a grid that
/// ends exactly at delta (the parameterization cannot reach delta).
inline constexpr double kFinalPortion = 0.1;

double sigmoid(double z) noexcept;
double logit(double p) noexcept;

/// t_i = (i/N)^rho (T - delta) + delta, returned decreasing.
TimeGrid polynomial_grid(std::size_t N, double rho, double T, double delta);

/// Uniform spacing in log-SNR between T and delta.
TimeGrid logsnr_grid(std::size_t N, const NoiseSchedule& schedule, double T,
                     double delta);

/// t_n = (T - delta) * prod_{j<=n} sigmoid(theta_j) + delta.
TimeGrid stickbreak_grid(std::span<const double> theta, double T, double delta);

/// Logits reproducing `grid` under stickbreak_grid; every t_n must exceed delta.
std::vector<double> stickbreak_inverse(const TimeGrid& grid, double delta);

/// Time-uniform logits for t_1..t_{N-1} with the last portion set to
/// kFinalPortion.
std::vector<double> time_uniform_logits(std::size_t N, double T, double delta);

}  // namespace gasolve
