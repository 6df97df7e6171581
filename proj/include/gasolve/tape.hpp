#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gasolve/diffusion.hpp"

namespace gasolve {

class Tape;

/// Handle to a node on a Tape. Values are vectors; scalars have size 1.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Vec& value() const;
  double scalar() const;
  std::size_t size() const;
};

/// Append-only reverse-mode record. Nodes are created in topological order
/// and backward() visits them once, newest first.
class Tape {
 public:
  using Pullback = std::function<void(std::span<const double> out_adjoint, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable input. Gradients are reported for leaves in creation order.
  Var leaf(Vec value);
  Var constant(Vec value);
  Var constant(double value) { return constant(Vec{value}); }

  const Vec& value(Var v) const { return nodes_[v.id].value; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return leaves_.size(); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double c);
  Var shift(Var a, double c);

  Var exp(Var a);
  Var expm1(Var a);
  Var log(Var a);
  Var abs(Var a);
  Var sigmoid(Var a);
  Var softplus(Var a);
  /// log(sigmoid(a)) = -log(1 + e^{-a}), overflow-safe.
  Var log_sigmoid(Var a);
  /// Saturating clamp; the derivative is zero outside [lo, hi].
  Var clamp(Var a, double lo, double hi);

  Var sum(Var a);
  Var dot(Var a, Var b);
  Var element(Var a, std::size_t i);
  Var concat(std::span<const Var> parts);

  /// W x for a row-major rows x cols matrix W.
  Var matvec(Var W, Var x, std::size_t rows, std::size_t cols);
  /// W^T u for a row-major rows x cols matrix W.
  Var matvec_t(Var W, Var u, std::size_t rows, std::size_t cols);

  /// Escape hatch for primitives with analytic VJPs (e.g. model calls).
  Var custom(std::vector<std::uint32_t> inputs, Vec value, Pullback pullback);

  /// Reverse sweep from a scalar node. Returns the gradient of every leaf,
  /// concatenated in leaf creation order; unreached leaves get zeros.
  Vec backward(Var loss);

  /// Adjoint of any node after the most recent backward().
  Vec adjoint(Var v) const;

  void accumulate(std::uint32_t id, std::span<const double> g);
  void accumulate(std::uint32_t id, std::size_t index, double g);

 private:
  struct Node {
    Vec value;
    Pullback pullback;
  };

  Var push(Vec value, Pullback pullback);
  Var unary(Var a, Vec value, std::function<double(double x, double y)> dydx);
  Var binary(Var a, Var b, std::size_t n, Vec value,
             std::function<void(std::size_t, double, double&, double&)> partials);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> leaves_;
  std::vector<Vec> adjoints_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator*(double c, Var a);
Var operator+(Var a, double c);
Var operator-(Var a, double c);

/// Data prediction as a tape primitive with analytic VJPs in x and t.
Var data_prediction(Tape& tape, const MixtureModel& model,
                    const NoiseSchedule& schedule, Var x, Var t);

/// Gradient of `scalar` with respect to the vector leaf/node `input`.
Vec grad_of_input(Tape& tape, Var scalar, Var input);

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h per coordinate.
Vec finite_diff(const std::function<double(std::span<const double>)>& loss,
                std::span<const double> params, double h);

}  // namespace gasolve
