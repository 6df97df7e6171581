#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "gasolve/diffusion.hpp"
#include "gasolve/tape.hpp"

namespace gasolve {

/// Activation used by the discriminator. Recorded in checkpoints.
inline constexpr std::string_view kActivationName = "softplus";

/// Two hidden softplus layers on raw sample vectors: d -> 64 -> 64 -> 1.
/// Flat weight layout: W1 (64 x d), b1, W2 (64 x 64), b2, w3 (64), b3.
class Discriminator {
 public:
  static constexpr std::size_t kHidden = 64;

  Discriminator() = default;
  Discriminator(std::size_t dim, Vec weights);

  static std::size_t weight_count(std::size_t dim) noexcept {
    return (dim + 1) * kHidden + (kHidden + 1) * kHidden + kHidden + 1;
  }
  static Discriminator zeros(std::size_t dim);
  /// N(0, 1/fan_in) weights, zero biases.
  static Discriminator random(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  const Vec& weights() const noexcept { return weights_; }
  Vec& weights() noexcept { return weights_; }

  double operator()(std::span<const double> x) const;
  /// Closed-form input gradient.
  Vec input_gradient(std::span<const double> x) const;

 private:
  std::size_t dim_ = 0;
  Vec weights_;
};

struct DiscNodes {
  Var w1, b1, w2, b2, w3, b3;
  std::size_t dim = 0;
};

DiscNodes add_leaves(Tape& tape, const Discriminator& disc);
DiscNodes add_constants(Tape& tape, const Discriminator& disc);

Var disc_forward(Tape& tape, const DiscNodes& disc, Var x);

/// The derivative network W1^T (s(z1) * W2^T (s(z2) * w3)) built from tape
/// primitives, so penalties on it are differentiable in the weights.
Var disc_input_gradient(Tape& tape, const DiscNodes& disc, Var x);

}  // namespace gasolve
