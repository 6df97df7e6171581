#include "gasolve/optim.hpp"

#include <algorithm>
#include <cmath>

#include "gasolve/error.hpp"

namespace gasolve {

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    fail(ErrorKind::Argument, "adam: parameter, gradient and state lengths differ");
  }
  state.step += 1;
  const double k = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, k);
  const double bc2 = 1.0 - std::pow(cfg.beta2, k);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + cfg.weight_decay * params[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void ema_update(EmaState& ema, std::span<const double> params, double decay) {
  if (ema.shadow.size() != params.size()) {
    fail(ErrorKind::Argument, "ema: shadow and parameter lengths differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    ema.shadow[i] = decay * ema.shadow[i] + (1.0 - decay) * params[i];
  }
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  if (!(max_norm > 0.0)) fail(ErrorKind::Argument, "clip norm must be positive");
  const double norm = l2_norm(grads);
  if (norm > max_norm) {
    double scale = max_norm / norm;
    Vec scaled(grads.begin(), grads.end());
    for (;;) {
      for (std::size_t i = 0; i < grads.size(); ++i) scaled[i] = grads[i] * scale;
      // Rounding can leave the result an ulp above the bound.
      if (l2_norm(scaled) <= max_norm) break;
      scale = std::nextafter(scale, 0.0);
    }
    std::copy(scaled.begin(), scaled.end(), grads.begin());
  }
  return norm;
}

}  // namespace gasolve
