#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gasolve/diffusion.hpp"

namespace gasolve {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  Vec m;
  Vec v;
  std::uint64_t step = 0;

  static AdamState zeros(std::size_t n) { return AdamState{Vec(n, 0.0), Vec(n, 0.0), 0}; }
};

/// Bias-corrected Adam update in place. Weight decay is added to the
/// gradient (L2 form).
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const AdamConfig& cfg);

struct EmaState {
  Vec shadow;
};

/// shadow' = decay * shadow + (1 - decay) * params
void ema_update(EmaState& ema, std::span<const double> params, double decay);

/// Rescales grads to norm max_norm when their global L2 norm exceeds it.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<double> grads, double max_norm);

double l2_norm(std::span<const double> v);

}  // namespace gasolve
