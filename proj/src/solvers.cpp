#include "gasolve/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "gasolve/error.hpp"

namespace gasolve {

State euler_step(const MixtureModel& model, const NoiseSchedule& schedule,
                 const State& state, double t_next) {
  if (t_next > state.t) fail(ErrorKind::Argument, "Euler step must not increase time");
  State next{state.x, t_next};
  if (t_next == state.t) return next;
  const auto v = velocity(model, schedule, state);
  const double dt = t_next - state.t;
  for (std::size_t i = 0; i < v.size(); ++i) next.x[i] += dt * v[i];
  return next;
}

Vec euler_solve(const MixtureModel& model, const NoiseSchedule& schedule,
                const TimeGrid& grid, const Vec& x_T) {
  State s{x_T, grid[0]};
  for (std::size_t n = 0; n < grid.steps(); ++n) {
    s = euler_step(model, schedule, s, grid[n + 1]);
  }
  return s.x;
}

Vec dpmpp3m_step(const NoiseSchedule& schedule, const Trajectory& traj,
                 const TimeGrid& grid, std::size_t n) {
  if (traj.points.size() < n + 1 || traj.evals.size() < n + 1) {
    fail(ErrorKind::State, "trajectory history incomplete for step " + std::to_string(n));
  }
  if (grid.t.size() < n + 2) fail(ErrorKind::State, "grid too short for step " + std::to_string(n));

  auto lambda = [&](std::size_t i) {
    return std::log(schedule.alpha(grid[i]) / schedule.sigma(grid[i]));
  };
  auto step_h = [&](std::size_t i) { return lambda(i + 1) - lambda(i); };

  const double h = step_h(n);
  const double alpha_next = schedule.alpha(grid[n + 1]);
  const double ratio = schedule.sigma(grid[n + 1]) / schedule.sigma(grid[n]);
  const double psi1 = std::expm1(-h);

  const Vec& x = traj.points[n];
  const Vec& e0 = traj.evals[n];
  const std::size_t d = x.size();
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = ratio * x[i] - alpha_next * psi1 * e0[i];

  if (n == 1) {
    const double r0 = step_h(0) / h;
    const Vec& e1 = traj.evals[0];
    for (std::size_t i = 0; i < d; ++i) {
      const double d10 = (e0[i] - e1[i]) / r0;
      out[i] -= 0.5 * alpha_next * psi1 * d10;
    }
  } else if (n >= 2) {
    const double r0 = step_h(n - 1) / h;
    const double r1 = step_h(n - 2) / h;
    const double psi2 = psi1 / h + 1.0;
    const double psi3 = psi2 / h - 0.5;
    const Vec& e1 = traj.evals[n - 1];
    const Vec& e2 = traj.evals[n - 2];
    for (std::size_t i = 0; i < d; ++i) {
      const double d10 = (e0[i] - e1[i]) / r0;
      const double d11 = (e1[i] - e2[i]) / r1;
      const double d1 = d10 + r0 / (r0 + r1) * (d10 - d11);
      const double d2 = (d10 - d11) / (r0 + r1);
      out[i] = out[i] + alpha_next * psi2 * d1 - alpha_next * psi3 * d2;
    }
  }
  return out;
}

Vec dpmpp3m_solve(const MixtureModel& model, const NoiseSchedule& schedule,
                  const TimeGrid& grid, const Vec& x_T) {
  Trajectory traj;
  traj.points.push_back(x_T);
  for (std::size_t n = 0; n < grid.steps(); ++n) {
    traj.times.push_back(grid[n]);
    traj.evals.push_back(data_prediction(model, schedule, State{traj.points[n], grid[n]}));
    traj.points.push_back(dpmpp3m_step(schedule, traj, grid, n));
  }
  return traj.points.back();
}

Vec rk4_solve(const MixtureModel& model, const NoiseSchedule& schedule,
              const TimeGrid& grid, const Vec& x_T) {
  Vec x = x_T;
  const std::size_t d = x.size();
  Vec tmp(d);
  auto vel = [&](const Vec& at, double t) {
    // Stage times stay inside [delta, T] up to rounding of the midpoint.
    return velocity(model, schedule, State{at, std::clamp(t, schedule.delta, schedule.T)});
  };
  for (std::size_t n = 0; n < grid.steps(); ++n) {
    const double t = grid[n];
    const double h = grid[n + 1] - t;
    const auto k1 = vel(x, t);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const auto k2 = vel(tmp, t + 0.5 * h);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const auto k3 = vel(tmp, t + 0.5 * h);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + h * k3[i];
    const auto k4 = vel(tmp, grid[n + 1]);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return x;
}

Vec rk4_solve(const MixtureModel& model, const NoiseSchedule& schedule,
              const Vec& x_T, std::size_t substeps) {
  if (substeps < 1) fail(ErrorKind::Argument, "RK4 needs at least one substep");
  return rk4_solve(model, schedule,
                   logsnr_grid(substeps, schedule, schedule.T, schedule.delta), x_T);
}

TimeGrid make_grid(GridKind kind, std::size_t N, double rho,
                   const NoiseSchedule& schedule) {
  switch (kind) {
    case GridKind::LogSnr: return logsnr_grid(N, schedule, schedule.T, schedule.delta);
    case GridKind::Polynomial: return polynomial_grid(N, rho, schedule.T, schedule.delta);
  }
  fail(ErrorKind::Argument, "unknown grid kind");
}

Vec teacher_rollout(const MixtureModel& model, const NoiseSchedule& schedule,
                    const TeacherConfig& cfg, const Vec& x_T) {
  if (cfg.nfe < 1) fail(ErrorKind::Argument, "teacher NFE must be at least 1");
  for (double v : x_T) {
    if (!std::isfinite(v)) fail(ErrorKind::NotFinite, "teacher input is not finite");
  }
  const auto grid = make_grid(cfg.grid, cfg.nfe, cfg.rho, schedule);
  switch (cfg.kind) {
    case TeacherKind::Dpmpp3m: return dpmpp3m_solve(model, schedule, grid, x_T);
    case TeacherKind::Rk4Oracle: return rk4_solve(model, schedule, grid, x_T);
  }
  fail(ErrorKind::Argument, "unknown teacher kind");
}

TeacherKind parse_teacher_kind(const std::string& s) {
  if (s == "dpmpp3m") return TeacherKind::Dpmpp3m;
  if (s == "rk4" || s == "rk4-oracle") return TeacherKind::Rk4Oracle;
  fail(ErrorKind::Config, "unknown teacher kind '" + s + "'");
}

GridKind parse_grid_kind(const std::string& s) {
  if (s == "logsnr") return GridKind::LogSnr;
  if (s == "polynomial") return GridKind::Polynomial;
  fail(ErrorKind::Config, "unknown grid kind '" + s + "'");
}

std::string to_string(TeacherKind kind) {
  return kind == TeacherKind::Dpmpp3m ? "dpmpp3m" : "rk4-oracle";
}

std::string to_string(GridKind kind) {
  return kind == GridKind::LogSnr ? "logsnr" : "polynomial";
}

}  // namespace gasolve
