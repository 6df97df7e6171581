#include "gasolve/time_grid.hpp"

#include <cmath>
#include <sstream>

#include "gasolve/error.hpp"

namespace gasolve {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

namespace {

void check_common(std::size_t N, double T, double delta) {
  if (N < 1) fail(ErrorKind::Argument, "grid needs at least one step");
  if (!(delta < T)) fail(ErrorKind::Argument, "grid requires delta < T");
}

}  // namespace

TimeGrid polynomial_grid(std::size_t N, double rho, double T, double delta) {
  check_common(N, T, delta);
  if (!(rho > 0.0)) fail(ErrorKind::Argument, "polynomial grid requires rho > 0");
  TimeGrid grid;
  grid.t.resize(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    const double frac = static_cast<double>(N - k) / static_cast<double>(N);
    grid.t[k] = std::pow(frac, rho) * (T - delta) + delta;
  }
  grid.t.front() = T;
  grid.t.back() = delta;
  return grid;
}

TimeGrid logsnr_grid(std::size_t N, const NoiseSchedule& schedule, double T,
                     double delta) {
  check_common(N, T, delta);
  if (!(delta > 0.0)) fail(ErrorKind::Argument, "log-SNR grid requires delta > 0");
  if (schedule.kind != ScheduleKind::VarianceExploding) {
    fail(ErrorKind::Unsupported, "log-SNR grid only implemented for VE");
  }
  // sigma_t = t, so equal lambda gaps are a geometric sequence in t.
  TimeGrid grid;
  grid.t.resize(N + 1);
  const double ratio = delta / T;
  for (std::size_t k = 0; k <= N; ++k) {
    grid.t[k] = T * std::pow(ratio, static_cast<double>(k) / static_cast<double>(N));
  }
  grid.t.front() = T;
  grid.t.back() = delta;
  return grid;
}

TimeGrid stickbreak_grid(std::span<const double> theta, double T, double delta) {
  if (!(delta < T)) fail(ErrorKind::Argument, "grid requires delta < T");
  TimeGrid grid;
  grid.t.reserve(theta.size() + 1);
  grid.t.push_back(T);
  double prod = 1.0;
  for (double th : theta) {
    if (!std::isfinite(th)) fail(ErrorKind::NotFinite, "stick-breaking logit is not finite");
    prod *= sigmoid(th);
    grid.t.push_back((T - delta) * prod + delta);
  }
  return grid;
}

std::vector<double> stickbreak_inverse(const TimeGrid& grid, double delta) {
  if (grid.t.size() < 2) fail(ErrorKind::Argument, "grid needs at least one step");
  std::vector<double> theta(grid.steps());
  for (std::size_t n = 1; n < grid.t.size(); ++n) {
    const double cur = grid.t[n] - delta;
    const double prev = grid.t[n - 1] - delta;
    if (!(cur > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "grid point t_" << n << " = " << grid.t[n]
         << " is not above delta; stick-breaking cannot represent it";
      fail(ErrorKind::Infeasible, os.str());
    }
    if (!(cur < prev)) fail(ErrorKind::Argument, "grid is not strictly decreasing");
    theta[n - 1] = logit(cur / prev);
  }
  return theta;
}

std::vector<double> time_uniform_logits(std::size_t N, double T, double delta) {
  auto grid = polynomial_grid(N, 1.0, T, delta);
  const double last = grid.t[N - 1];
  grid.t[N] = delta + kFinalPortion * (last - delta);
  return stickbreak_inverse(grid, delta);
}

}  // namespace gasolve
