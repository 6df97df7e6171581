#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gasolve/diffusion.hpp"

namespace gasolve {

/// Mean Euclidean distance between paired samples.
double endpoint_error(std::span<const Vec> student, std::span<const Vec> reference);

/// 2-Wasserstein distance between Gaussians with diagonal covariances.
double w2_gaussian(std::span<const double> mean1, std::span<const double> var1,
                   std::span<const double> mean2, std::span<const double> var2);

/// V-statistic energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| (self-pairs included).
double energy_distance(std::span<const Vec> X, std::span<const Vec> Y);

struct OrderEstimate {
  std::vector<std::size_t> steps;
  std::vector<double> errors;
  double order = 0.0;     // least-squares slope of log(error) on log(1/N)
  double residual = 0.0;  // RMS residual of that fit
};

OrderEstimate fit_order(std::span<const std::size_t> steps, std::span<const double> errors);

enum class OrderSolver { Euler, Dpmpp3m, Rk4 };

/// Empirical global order on the log-SNR grid against the exact flow of a
/// single Gaussian (or a fine RK4 reference for mixtures).
OrderEstimate convergence_order(OrderSolver solver, const MixtureModel& model,
                                const NoiseSchedule& schedule, const Vec& x_T,
                                std::span<const std::size_t> steps);

struct DiagGaussian {
  Vec mean;
  Vec var;
};

/// Per-coordinate sample mean and (population) variance.
DiagGaussian fit_diag_gaussian(std::span<const Vec> samples);

}  // namespace gasolve
