#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gasolve/diffusion.hpp"
#include "gasolve/solvers.hpp"
#include "gasolve/tape.hpp"

namespace gasolve {

/// Closed-form number of trainable scalars of an N-step solver.
std::size_t param_count(std::size_t N);

/// Index arithmetic for the correction arrays of an N-step solver.
struct GsLayout {
  std::size_t N = 0;

  std::size_t a_off_size() const noexcept { return N * (N - 1) / 2; }
  std::size_t c_recent_size() const noexcept { return N >= 2 ? 3 * N - 3 : 1; }
  std::size_t c_old_size() const noexcept { return N >= 3 ? (N - 3) * (N - 2) / 2 : 0; }

  /// Recent-derivative corrections available at step n (1, 2 or 3).
  static std::size_t recent_width(std::size_t n) noexcept { return n < 2 ? n + 1 : 3; }

  /// a_hat_{j,n} for 0 <= j < n.
  std::size_t a_off_index(std::size_t j, std::size_t n) const noexcept {
    return n * (n - 1) / 2 + j;
  }
  /// Correction k of step n: 0 on the psi_1 term, 1 on D1, 2 on D2.
  std::size_t c_recent_index(std::size_t n, std::size_t k) const noexcept {
    return (n < 2 ? n * (n + 1) / 2 : 3 * n - 3) + k;
  }
  /// c_hat_{j,n} for velocities older than the 3-step window, j <= n - 3.
  std::size_t c_old_index(std::size_t j, std::size_t n) const noexcept {
    return (n - 3) * (n - 2) / 2 + j;
  }
};

/// Trainable parameters (theta, xi, phi) of the generalized solver.
struct GsParams {
  std::size_t N = 0;
  Vec theta;     // stick-breaking logits, N
  Vec xi;        // evaluation-time offsets, N
  Vec a_diag;    // a_hat_{n,n}, N
  Vec a_off;     // a_hat_{j,n}, N(N-1)/2
  Vec c_recent;  // corrections on the base psi-terms
  Vec c_old;     // c_hat_{j,n} for j <= n-3

  GsLayout layout() const noexcept { return GsLayout{N}; }

  /// Canonical flat order: theta, xi, a_diag, a_off, c_recent, c_old.
  Vec flat() const;
  static GsParams from_flat(std::size_t N, std::span<const double> flat);
  std::size_t size() const noexcept;
  void validate() const;
};

/// Zero corrections and time-uniform stick-breaking logits.
GsParams init_params(std::size_t N, const NoiseSchedule& schedule);

/// The parameter groups registered as tape leaves (in canonical order).
struct GsLeaves {
  Var theta, xi, a_diag, a_off, c_recent, c_old;
};

GsLeaves add_leaves(Tape& tape, const GsParams& params);
GsLeaves add_constants(Tape& tape, const GsParams& params);

/// Rollout record on a tape.
struct GsTrace {
  std::vector<Var> grid;        // t_0..t_N
  std::vector<Var> eval_times;  // clamp(t_j + xi_j, delta, T)
  std::vector<Var> points;      // x_0..x_N
  std::vector<Var> evals;       // data predictions at the evaluation times
  Var endpoint;
};

/// One generalized-solver step producing x_{n+1} from trace history 0..n.
Var gs_step(Tape& tape, const NoiseSchedule& schedule, const GsLeaves& params,
            std::size_t N, const GsTrace& trace, std::size_t n);

GsTrace gs_rollout(Tape& tape, const MixtureModel& model,
                   const NoiseSchedule& schedule, const GsLeaves& params,
                   std::size_t N, Var x_T);

/// Value-only rollout.
Vec gs_rollout(const MixtureModel& model, const NoiseSchedule& schedule,
               const GsParams& params, const Vec& x_T);

/// Value-only step on an externally supplied history. traj.times are the
/// evaluation times the stored evals were computed at.
Vec gs_step(const NoiseSchedule& schedule, const Trajectory& traj,
            const GsParams& params, std::size_t n);

/// The timestep schedule encoded by params.theta.
TimeGrid gs_grid(const GsParams& params, const NoiseSchedule& schedule);

}  // namespace gasolve
