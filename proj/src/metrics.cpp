#include "gasolve/metrics.hpp"

#include <cmath>

#include "gasolve/error.hpp"
#include "gasolve/solvers.hpp"
#include "gasolve/time_grid.hpp"

namespace gasolve {

namespace {

double distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double mean_pairwise(std::span<const Vec> X, std::span<const Vec> Y) {
  double total = 0.0;
  for (const auto& x : X) {
    double row = 0.0;
    for (const auto& y : Y) row += distance(x, y);
    total += row;
  }
  return total / (static_cast<double>(X.size()) * static_cast<double>(Y.size()));
}

}  // namespace

double endpoint_error(std::span<const Vec> student, std::span<const Vec> reference) {
  if (student.size() != reference.size()) {
    fail(ErrorKind::Argument, "endpoint error: sample counts differ");
  }
  if (student.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    if (student[i].size() != reference[i].size()) {
      fail(ErrorKind::Argument, "endpoint error: sample dimensions differ");
    }
    total += distance(student[i], reference[i]);
  }
  return total / static_cast<double>(student.size());
}

double w2_gaussian(std::span<const double> mean1, std::span<const double> var1,
                   std::span<const double> mean2, std::span<const double> var2) {
  if (mean1.size() != mean2.size() || var1.size() != mean1.size() ||
      var2.size() != mean2.size()) {
    fail(ErrorKind::Argument, "w2: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < mean1.size(); ++i) {
    if (!(var1[i] > 0.0) || !(var2[i] > 0.0)) {
      fail(ErrorKind::Argument, "w2: variances must be positive");
    }
    const double dm = mean1[i] - mean2[i];
    const double ds = std::sqrt(var1[i]) - std::sqrt(var2[i]);
    s += dm * dm + ds * ds;
  }
  return std::sqrt(s);
}

double energy_distance(std::span<const Vec> X, std::span<const Vec> Y) {
  if (X.empty() || Y.empty()) fail(ErrorKind::Argument, "energy distance needs samples");
  const double value = 2.0 * mean_pairwise(X, Y) - mean_pairwise(X, X) - mean_pairwise(Y, Y);
  // The V-statistic is non-negative; clear rounding noise around zero.
  return value < 0.0 ? 0.0 : value;
}

OrderEstimate fit_order(std::span<const std::size_t> steps, std::span<const double> errors) {
  if (steps.size() < 3 || steps.size() != errors.size()) {
    fail(ErrorKind::Argument, "order fit needs at least three (N, error) pairs");
  }
  OrderEstimate est;
  est.steps.assign(steps.begin(), steps.end());
  est.errors.assign(errors.begin(), errors.end());
  const std::size_t n = steps.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      fail(ErrorKind::Degenerate, "order fit needs positive finite errors");
    }
    xs[i] = -std::log(static_cast<double>(steps[i]));
    ys[i] = std::log(errors[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::Degenerate, "order fit needs distinct step counts");
  est.order = sxy / sxx;
  const double intercept = my - est.order * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (intercept + est.order * xs[i]);
    rss += r * r;
  }
  est.residual = std::sqrt(rss / static_cast<double>(n));
  return est;
}

OrderEstimate convergence_order(OrderSolver solver, const MixtureModel& model,
                                const NoiseSchedule& schedule, const Vec& x_T,
                                std::span<const std::size_t> steps) {
  const Vec exact = model.size() == 1
                        ? exact_gaussian_path(model, schedule, State{x_T, schedule.T},
                                              schedule.delta)
                        : rk4_solve(model, schedule, x_T, 20000);
  std::vector<double> errors;
  for (std::size_t N : steps) {
    const auto grid = logsnr_grid(N, schedule, schedule.T, schedule.delta);
    Vec out;
    switch (solver) {
      case OrderSolver::Euler: out = euler_solve(model, schedule, grid, x_T); break;
      case OrderSolver::Dpmpp3m: out = dpmpp3m_solve(model, schedule, grid, x_T); break;
      case OrderSolver::Rk4: out = rk4_solve(model, schedule, grid, x_T); break;
    }
    errors.push_back(distance(out, exact));
  }
  return fit_order(steps, errors);
}

DiagGaussian fit_diag_gaussian(std::span<const Vec> samples) {
  if (samples.empty()) fail(ErrorKind::Argument, "cannot fit a Gaussian to no samples");
  const std::size_t d = samples.front().size();
  DiagGaussian g{Vec(d, 0.0), Vec(d, 0.0)};
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < d; ++i) g.mean[i] += s[i];
  }
  for (double& m : g.mean) m /= static_cast<double>(samples.size());
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < d; ++i) g.var[i] += (s[i] - g.mean[i]) * (s[i] - g.mean[i]);
  }
  for (double& v : g.var) v /= static_cast<double>(samples.size());
  return g;
}

}  // namespace gasolve
