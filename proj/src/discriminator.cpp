#include "gasolve/discriminator.hpp"

#include <cmath>
#include <random>

#include "gasolve/error.hpp"
#include "gasolve/rng.hpp"
#include "gasolve/time_grid.hpp"

namespace gasolve {

namespace {

constexpr std::size_t H = Discriminator::kHidden;

struct Offsets {
  std::size_t w1, b1, w2, b2, w3, b3;
};

Offsets offsets(std::size_t d) {
  Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + H * d;
  o.w2 = o.b1 + H;
  o.b2 = o.w2 + H * H;
  o.w3 = o.b2 + H;
  o.b3 = o.w3 + H;
  return o;
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Vec slice(const Vec& v, std::size_t off, std::size_t n) {
  return Vec(v.begin() + static_cast<std::ptrdiff_t>(off),
             v.begin() + static_cast<std::ptrdiff_t>(off + n));
}

template <class Make>
DiscNodes make_nodes(const Discriminator& disc, Make make) {
  const auto& w = disc.weights();
  const auto o = offsets(disc.dim());
  DiscNodes n;
  n.dim = disc.dim();
  n.w1 = make(slice(w, o.w1, H * disc.dim()));
  n.b1 = make(slice(w, o.b1, H));
  n.w2 = make(slice(w, o.w2, H * H));
  n.b2 = make(slice(w, o.b2, H));
  n.w3 = make(slice(w, o.w3, H));
  n.b3 = make(slice(w, o.b3, 1));
  return n;
}

}  // namespace

Discriminator::Discriminator(std::size_t dim, Vec weights)
    : dim_(dim), weights_(std::move(weights)) {
  if (dim_ == 0) fail(ErrorKind::Argument, "discriminator dimension must be positive");
  if (weights_.size() != weight_count(dim_)) {
    fail(ErrorKind::Length, "discriminator has " + std::to_string(weights_.size()) +
                                " weights, expected " + std::to_string(weight_count(dim_)));
  }
}

Discriminator Discriminator::zeros(std::size_t dim) {
  return Discriminator(dim, Vec(weight_count(dim), 0.0));
}

Discriminator Discriminator::random(std::size_t dim, std::uint64_t seed) {
  Vec w(weight_count(dim), 0.0);
  const auto o = offsets(dim);
  auto rng = stream_rng(seed, Stream::DiscInit, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](std::size_t off, std::size_t n, double fan_in) {
    const double scale = 1.0 / std::sqrt(fan_in);
    for (std::size_t i = 0; i < n; ++i) w[off + i] = scale * normal(rng);
  };
  fill(o.w1, H * dim, static_cast<double>(dim));
  fill(o.w2, H * H, static_cast<double>(H));
  fill(o.w3, H, static_cast<double>(H));
  return Discriminator(dim, std::move(w));
}

double Discriminator::operator()(std::span<const double> x) const {
  if (x.size() != dim_) fail(ErrorKind::Argument, "discriminator input dimension mismatch");
  const auto o = offsets(dim_);
  Vec a1(H);
  for (std::size_t r = 0; r < H; ++r) {
    double z = weights_[o.b1 + r];
    for (std::size_t c = 0; c < dim_; ++c) z += weights_[o.w1 + r * dim_ + c] * x[c];
    a1[r] = softplus(z);
  }
  double out = weights_[o.b3];
  for (std::size_t r = 0; r < H; ++r) {
    double z = weights_[o.b2 + r];
    for (std::size_t c = 0; c < H; ++c) z += weights_[o.w2 + r * H + c] * a1[c];
    out += weights_[o.w3 + r] * softplus(z);
  }
  return out;
}

Vec Discriminator::input_gradient(std::span<const double> x) const {
  if (x.size() != dim_) fail(ErrorKind::Argument, "discriminator input dimension mismatch");
  const auto o = offsets(dim_);
  Vec z1(H);
  Vec a1(H);
  for (std::size_t r = 0; r < H; ++r) {
    double z = weights_[o.b1 + r];
    for (std::size_t c = 0; c < dim_; ++c) z += weights_[o.w1 + r * dim_ + c] * x[c];
    z1[r] = z;
    a1[r] = softplus(z);
  }
  Vec u2(H);
  for (std::size_t r = 0; r < H; ++r) {
    double z = weights_[o.b2 + r];
    for (std::size_t c = 0; c < H; ++c) z += weights_[o.w2 + r * H + c] * a1[c];
    u2[r] = sigmoid(z) * weights_[o.w3 + r];
  }
  Vec u1(H, 0.0);
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < H; ++c) u1[c] += weights_[o.w2 + r * H + c] * u2[r];
  }
  Vec g(dim_, 0.0);
  for (std::size_t r = 0; r < H; ++r) {
    const double s = sigmoid(z1[r]) * u1[r];
    for (std::size_t c = 0; c < dim_; ++c) g[c] += weights_[o.w1 + r * dim_ + c] * s;
  }
  return g;
}

DiscNodes add_leaves(Tape& tape, const Discriminator& disc) {
  return make_nodes(disc, [&](Vec v) { return tape.leaf(std::move(v)); });
}

DiscNodes add_constants(Tape& tape, const Discriminator& disc) {
  return make_nodes(disc, [&](Vec v) { return tape.constant(std::move(v)); });
}

Var disc_forward(Tape& tape, const DiscNodes& d, Var x) {
  const Var z1 = tape.matvec(d.w1, x, H, d.dim) + d.b1;
  const Var z2 = tape.matvec(d.w2, tape.softplus(z1), H, H) + d.b2;
  return tape.dot(d.w3, tape.softplus(z2)) + d.b3;
}

Var disc_input_gradient(Tape& tape, const DiscNodes& d, Var x) {
  const Var z1 = tape.matvec(d.w1, x, H, d.dim) + d.b1;
  const Var z2 = tape.matvec(d.w2, tape.softplus(z1), H, H) + d.b2;
  const Var u2 = tape.sigmoid(z2) * d.w3;
  const Var u1 = tape.sigmoid(z1) * tape.matvec_t(d.w2, u2, H, H);
  return tape.matvec_t(d.w1, u1, H, d.dim);
}

}  // namespace gasolve
