#include "gasolve/tape.hpp"

#include <algorithm>
#include <cmath>

#include "gasolve/error.hpp"
#include "gasolve/time_grid.hpp"

namespace gasolve {

const Vec& Var::value() const { return tape->value(*this); }

double Var::scalar() const {
  const auto& v = tape->value(*this);
  if (v.size() != 1) fail(ErrorKind::Argument, "node is not a scalar");
  return v[0];
}

std::size_t Var::size() const { return tape->value(*this).size(); }

Var Tape::push(Vec value, Pullback pullback) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{std::move(value), std::move(pullback)});
  return Var{this, id};
}

Var Tape::leaf(Vec value) {
  auto v = push(std::move(value), nullptr);
  leaves_.push_back(v.id);
  return v;
}

Var Tape::constant(Vec value) { return push(std::move(value), nullptr); }

void Tape::accumulate(std::uint32_t id, std::span<const double> g) {
  auto& adj = adjoints_[id];
  if (adj.empty()) adj.assign(nodes_[id].value.size(), 0.0);
  if (g.size() == adj.size()) {
    for (std::size_t i = 0; i < g.size(); ++i) adj[i] += g[i];
  } else if (adj.size() == 1) {
    double s = 0.0;
    for (double x : g) s += x;
    adj[0] += s;
  } else {
    fail(ErrorKind::State, "adjoint shape mismatch");
  }
}

void Tape::accumulate(std::uint32_t id, std::size_t index, double g) {
  auto& adj = adjoints_[id];
  if (adj.empty()) adj.assign(nodes_[id].value.size(), 0.0);
  adj[index] += g;
}

namespace {

std::size_t broadcast_size(std::size_t a, std::size_t b) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  fail(ErrorKind::Argument, "operand sizes " + std::to_string(a) + " and " +
                                std::to_string(b) + " do not broadcast");
}

inline std::size_t at(std::size_t size, std::size_t i) { return size == 1 ? 0 : i; }

}  // namespace

Var Tape::binary(Var a, Var b, std::size_t n, Vec value,
                 std::function<void(std::size_t, double, double&, double&)> partials) {
  const auto ia = a.id;
  const auto ib = b.id;
  return push(std::move(value), [ia, ib, n, partials = std::move(partials)](
                                    std::span<const double> g, Tape& tape) {
    const std::size_t sa = tape.nodes_[ia].value.size();
    const std::size_t sb = tape.nodes_[ib].value.size();
    Vec ga(sa, 0.0);
    Vec gb(sb, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double da = 0.0;
      double db = 0.0;
      partials(i, g[i], da, db);
      ga[at(sa, i)] += da;
      gb[at(sb, i)] += db;
    }
    tape.accumulate(ia, ga);
    tape.accumulate(ib, gb);
  });
}

Var Tape::add(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  const std::size_t n = broadcast_size(x.size(), y.size());
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[at(x.size(), i)] + y[at(y.size(), i)];
  return binary(a, b, n, std::move(out), [](std::size_t, double g, double& da, double& db) {
    da = g;
    db = g;
  });
}

Var Tape::sub(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  const std::size_t n = broadcast_size(x.size(), y.size());
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[at(x.size(), i)] - y[at(y.size(), i)];
  return binary(a, b, n, std::move(out), [](std::size_t, double g, double& da, double& db) {
    da = g;
    db = -g;
  });
}

Var Tape::mul(Var a, Var b) {
  const Vec x = value(a);
  const Vec y = value(b);
  const std::size_t n = broadcast_size(x.size(), y.size());
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[at(x.size(), i)] * y[at(y.size(), i)];
  return binary(a, b, n, std::move(out),
                [x, y](std::size_t i, double g, double& da, double& db) {
                  da = g * y[at(y.size(), i)];
                  db = g * x[at(x.size(), i)];
                });
}

Var Tape::div(Var a, Var b) {
  const Vec x = value(a);
  const Vec y = value(b);
  const std::size_t n = broadcast_size(x.size(), y.size());
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[at(x.size(), i)] / y[at(y.size(), i)];
  return binary(a, b, n, std::move(out),
                [x, y](std::size_t i, double g, double& da, double& db) {
                  const double yi = y[at(y.size(), i)];
                  da = g / yi;
                  db = -g * x[at(x.size(), i)] / (yi * yi);
                });
}

Var Tape::unary(Var a, Vec value, std::function<double(double x, double y)> dydx) {
  const auto ia = a.id;
  const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
  return push(std::move(value), [ia, self, dydx = std::move(dydx)](
                                    std::span<const double> g, Tape& tape) {
    const auto& x = tape.nodes_[ia].value;
    const auto& y = tape.nodes_[self].value;
    Vec ga(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] = g[i] * dydx(x[i], y[i]);
    tape.accumulate(ia, ga);
  });
}

template <class F>
static Vec map_values(const Vec& x, F f) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

Var Tape::neg(Var a) {
  return unary(a, map_values(value(a), [](double x) { return -x; }),
               [](double, double) { return -1.0; });
}

Var Tape::scale(Var a, double c) {
  return unary(a, map_values(value(a), [c](double x) { return c * x; }),
               [c](double, double) { return c; });
}

Var Tape::shift(Var a, double c) {
  return unary(a, map_values(value(a), [c](double x) { return x + c; }),
               [](double, double) { return 1.0; });
}

Var Tape::exp(Var a) {
  return unary(a, map_values(value(a), [](double x) { return std::exp(x); }),
               [](double, double y) { return y; });
}

Var Tape::expm1(Var a) {
  return unary(a, map_values(value(a), [](double x) { return std::expm1(x); }),
               [](double, double y) { return y + 1.0; });
}

Var Tape::log(Var a) {
  return unary(a, map_values(value(a), [](double x) { return std::log(x); }),
               [](double x, double) { return 1.0 / x; });
}

Var Tape::abs(Var a) {
  return unary(a, map_values(value(a), [](double x) { return std::abs(x); }),
               [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var Tape::sigmoid(Var a) {
  return unary(a, map_values(value(a), [](double x) { return gasolve::sigmoid(x); }),
               [](double, double y) { return y * (1.0 - y); });
}

namespace {

double softplus_value(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

Var Tape::softplus(Var a) {
  return unary(a, map_values(value(a), softplus_value),
               [](double x, double) { return gasolve::sigmoid(x); });
}

Var Tape::log_sigmoid(Var a) {
  return unary(a, map_values(value(a), [](double x) { return -softplus_value(-x); }),
               [](double x, double) { return gasolve::sigmoid(-x); });
}

Var Tape::clamp(Var a, double lo, double hi) {
  return unary(a, map_values(value(a), [lo, hi](double x) { return std::clamp(x, lo, hi); }),
               [lo, hi](double x, double) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

Var Tape::sum(Var a) {
  double s = 0.0;
  for (double x : value(a)) s += x;
  const auto ia = a.id;
  return push(Vec{s}, [ia](std::span<const double> g, Tape& tape) {
    Vec ga(tape.nodes_[ia].value.size(), g[0]);
    tape.accumulate(ia, ga);
  });
}

Var Tape::dot(Var a, Var b) {
  const auto& x = value(a);
  const auto& y = value(b);
  if (x.size() != y.size()) fail(ErrorKind::Argument, "dot of mismatched sizes");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  const auto ia = a.id;
  const auto ib = b.id;
  return push(Vec{s}, [ia, ib](std::span<const double> g, Tape& tape) {
    const auto& xv = tape.nodes_[ia].value;
    const auto& yv = tape.nodes_[ib].value;
    Vec ga(xv.size());
    Vec gb(yv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
      ga[i] = g[0] * yv[i];
      gb[i] = g[0] * xv[i];
    }
    tape.accumulate(ia, ga);
    tape.accumulate(ib, gb);
  });
}

Var Tape::element(Var a, std::size_t i) {
  const auto& x = value(a);
  if (i >= x.size()) fail(ErrorKind::Range, "element index out of range");
  const auto ia = a.id;
  return push(Vec{x[i]}, [ia, i](std::span<const double> g, Tape& tape) {
    tape.accumulate(ia, i, g[0]);
  });
}

Var Tape::concat(std::span<const Var> parts) {
  Vec out;
  std::vector<std::uint32_t> ids;
  for (const auto& p : parts) {
    const auto& v = value(p);
    out.insert(out.end(), v.begin(), v.end());
    ids.push_back(p.id);
  }
  return push(std::move(out), [ids](std::span<const double> g, Tape& tape) {
    std::size_t off = 0;
    for (auto id : ids) {
      const std::size_t n = tape.nodes_[id].value.size();
      tape.accumulate(id, g.subspan(off, n));
      off += n;
    }
  });
}

Var Tape::matvec(Var W, Var x, std::size_t rows, std::size_t cols) {
  const auto& w = value(W);
  const auto& xv = value(x);
  if (w.size() != rows * cols || xv.size() != cols) {
    fail(ErrorKind::Argument, "matvec shape mismatch");
  }
  Vec out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += w[r * cols + c] * xv[c];
    out[r] = s;
  }
  const auto iw = W.id;
  const auto ix = x.id;
  return push(std::move(out), [iw, ix, rows, cols](std::span<const double> g, Tape& tape) {
    const auto& wv = tape.nodes_[iw].value;
    const auto& xs = tape.nodes_[ix].value;
    Vec gw(rows * cols);
    Vec gx(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        gw[r * cols + c] = g[r] * xs[c];
        gx[c] += wv[r * cols + c] * g[r];
      }
    }
    tape.accumulate(iw, gw);
    tape.accumulate(ix, gx);
  });
}

Var Tape::matvec_t(Var W, Var u, std::size_t rows, std::size_t cols) {
  const auto& w = value(W);
  const auto& uv = value(u);
  if (w.size() != rows * cols || uv.size() != rows) {
    fail(ErrorKind::Argument, "matvec_t shape mismatch");
  }
  Vec out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += w[r * cols + c] * uv[r];
  }
  const auto iw = W.id;
  const auto iu = u.id;
  return push(std::move(out), [iw, iu, rows, cols](std::span<const double> g, Tape& tape) {
    const auto& wv = tape.nodes_[iw].value;
    const auto& us = tape.nodes_[iu].value;
    Vec gw(rows * cols);
    Vec gu(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        gw[r * cols + c] = us[r] * g[c];
        gu[r] += wv[r * cols + c] * g[c];
      }
    }
    tape.accumulate(iw, gw);
    tape.accumulate(iu, gu);
  });
}

Var Tape::custom(std::vector<std::uint32_t> inputs, Vec value, Pullback pullback) {
  for (auto id : inputs) {
    if (id >= nodes_.size()) fail(ErrorKind::Argument, "custom node input not on tape");
  }
  return push(std::move(value), std::move(pullback));
}

Vec Tape::backward(Var loss) {
  if (loss.tape != this) fail(ErrorKind::Argument, "loss node belongs to another tape");
  if (value(loss).size() != 1) fail(ErrorKind::Argument, "backward needs a scalar loss");
  adjoints_.assign(nodes_.size(), Vec{});
  adjoints_[loss.id] = Vec{1.0};
  for (std::size_t k = loss.id + 1; k-- > 0;) {
    auto& node = nodes_[k];
    if (!node.pullback || adjoints_[k].empty()) continue;
    const Vec g = adjoints_[k];
    node.pullback(g, *this);
  }
  Vec grads;
  for (auto id : leaves_) {
    const auto& adj = adjoints_[id];
    if (adj.empty()) {
      grads.insert(grads.end(), nodes_[id].value.size(), 0.0);
    } else {
      grads.insert(grads.end(), adj.begin(), adj.end());
    }
  }
  return grads;
}

Vec Tape::adjoint(Var v) const {
  if (v.id >= adjoints_.size() || adjoints_[v.id].empty()) {
    return Vec(value(v).size(), 0.0);
  }
  return adjoints_[v.id];
}

Var operator+(Var a, Var b) { return a.tape->add(a, b); }
Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
Var operator/(Var a, Var b) { return a.tape->div(a, b); }
Var operator-(Var a) { return a.tape->neg(a); }
Var operator*(double c, Var a) { return a.tape->scale(a, c); }
Var operator+(Var a, double c) { return a.tape->shift(a, c); }
Var operator-(Var a, double c) { return a.tape->shift(a, -c); }

Var data_prediction(Tape& tape, const MixtureModel& model,
                    const NoiseSchedule& schedule, Var x, Var t) {
  const State state{x.value(), t.scalar()};
  auto out = gasolve::data_prediction(model, schedule, state);
  const auto ix = x.id;
  const auto it = t.id;
  return tape.custom({ix, it}, std::move(out),
                     [&model, &schedule, state, ix, it](std::span<const double> g,
                                                        Tape& tp) {
                       tp.accumulate(ix, data_prediction_vjp(model, schedule, state, g));
                       const auto dt = data_prediction_time_derivative(model, schedule, state);
                       double s = 0.0;
                       for (std::size_t i = 0; i < dt.size(); ++i) s += g[i] * dt[i];
                       tp.accumulate(it, 0, s);
                     });
}

Vec grad_of_input(Tape& tape, Var scalar, Var input) {
  tape.backward(scalar);
  return tape.adjoint(input);
}

Vec finite_diff(const std::function<double(std::span<const double>)>& loss,
                std::span<const double> params, double h) {
  if (!(h > 0.0)) fail(ErrorKind::Argument, "finite-difference step must be positive");
  Vec p(params.begin(), params.end());
  Vec g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double fp = loss(p);
    p[i] = orig - h;
    const double fm = loss(p);
    p[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace gasolve
