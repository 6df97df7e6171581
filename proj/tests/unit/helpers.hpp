#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <random>
#include <vector>

#include "gasolve/diffusion.hpp"
#include "gasolve/error.hpp"
#include "gasolve/rng.hpp"

namespace testing {

using gasolve::MixtureComponent;
using gasolve::MixtureModel;
using gasolve::Vec;

inline std::mt19937_64 rng_for(std::uint64_t counter) {
  return gasolve::stream_rng(12345, gasolve::Stream::Test, counter);
}

/// Random isotropic mixture with K in [1, max_k] components in dimension d.
inline MixtureModel random_mixture(std::mt19937_64& rng, std::size_t d, std::size_t max_k = 4) {
  std::uniform_int_distribution<std::size_t> kdist(1, max_k);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::normal_distribution<double> n(0.0, 1.5);
  const std::size_t K = kdist(rng);
  std::vector<double> w(K);
  double total = 0.0;
  for (auto& v : w) total += (v = u(rng));
  std::vector<MixtureComponent> comps;
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    MixtureComponent c;
    // Keep the weights summing to one exactly.
    c.weight = k + 1 == K ? 1.0 - acc : w[k] / total;
    acc += c.weight;
    c.mean.resize(d);
    for (auto& m : c.mean) m = n(rng);
    c.var = 0.05 + u(rng);
    comps.push_back(c);
  }
  return MixtureModel(comps);
}

inline Vec random_vec(std::mt19937_64& rng, std::size_t d, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Vec v(d);
  for (auto& x : v) x = n(rng);
  return v;
}

/// |a - b| <= rel * max(|a|, |b|), with an absolute floor.
inline bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
  const double diff = std::abs(a - b);
  return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

/// Kind and message of the gasolve::Error thrown by f, if any.
struct Caught {
  gasolve::ErrorKind kind;
  std::string message;
};

template <class F>
std::optional<Caught> catch_error(F&& f) {
  try {
    f();
  } catch (const gasolve::Error& e) {
    return Caught{e.kind(), e.what()};
  }
  return std::nullopt;
}

}  // namespace testing
