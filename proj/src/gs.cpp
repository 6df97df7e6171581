#include "gasolve/gs.hpp"

#include <cmath>

#include "gasolve/error.hpp"
#include "gasolve/time_grid.hpp"

namespace gasolve {

std::size_t param_count(std::size_t N) {
  if (N < 1) fail(ErrorKind::Argument, "solver needs at least one step");
  const GsLayout l{N};
  return 3 * N + l.a_off_size() + l.c_recent_size() + l.c_old_size();
}

std::size_t GsParams::size() const noexcept {
  return theta.size() + xi.size() + a_diag.size() + a_off.size() + c_recent.size() +
         c_old.size();
}

Vec GsParams::flat() const {
  Vec out;
  out.reserve(size());
  for (const Vec* v : {&theta, &xi, &a_diag, &a_off, &c_recent, &c_old}) {
    out.insert(out.end(), v->begin(), v->end());
  }
  return out;
}

GsParams GsParams::from_flat(std::size_t N, std::span<const double> flat) {
  if (flat.size() != param_count(N)) {
    fail(ErrorKind::Length, "flat parameter vector has " + std::to_string(flat.size()) +
                                " entries, expected " + std::to_string(param_count(N)));
  }
  const GsLayout l{N};
  GsParams p;
  p.N = N;
  std::size_t off = 0;
  auto take = [&](std::size_t n) {
    Vec v(flat.begin() + static_cast<std::ptrdiff_t>(off),
          flat.begin() + static_cast<std::ptrdiff_t>(off + n));
    off += n;
    return v;
  };
  p.theta = take(N);
  p.xi = take(N);
  p.a_diag = take(N);
  p.a_off = take(l.a_off_size());
  p.c_recent = take(l.c_recent_size());
  p.c_old = take(l.c_old_size());
  return p;
}

void GsParams::validate() const {
  if (N < 1) fail(ErrorKind::Argument, "solver needs at least one step");
  const GsLayout l{N};
  auto check = [](const Vec& v, std::size_t want, const char* name) {
    if (v.size() != want) {
      fail(ErrorKind::Length, std::string("parameter array '") + name + "' has length " +
                                  std::to_string(v.size()) + ", expected " +
                                  std::to_string(want));
    }
    for (double x : v) {
      if (!std::isfinite(x)) {
        fail(ErrorKind::NotFinite, std::string("parameter array '") + name + "' is not finite");
      }
    }
  };
  check(theta, N, "theta");
  check(xi, N, "xi");
  check(a_diag, N, "a_diag");
  check(a_off, l.a_off_size(), "a_off");
  check(c_recent, l.c_recent_size(), "c_recent");
  check(c_old, l.c_old_size(), "c_old");
}

GsParams init_params(std::size_t N, const NoiseSchedule& schedule) {
  if (N < 1) fail(ErrorKind::Argument, "solver needs at least one step");
  const GsLayout l{N};
  GsParams p;
  p.N = N;
  p.theta = time_uniform_logits(N, schedule.T, schedule.delta);
  p.xi.assign(N, 0.0);
  p.a_diag.assign(N, 0.0);
  p.a_off.assign(l.a_off_size(), 0.0);
  p.c_recent.assign(l.c_recent_size(), 0.0);
  p.c_old.assign(l.c_old_size(), 0.0);
  return p;
}

GsLeaves add_leaves(Tape& tape, const GsParams& p) {
  GsLeaves leaves;
  leaves.theta = tape.leaf(p.theta);
  leaves.xi = tape.leaf(p.xi);
  leaves.a_diag = tape.leaf(p.a_diag);
  leaves.a_off = tape.leaf(p.a_off);
  leaves.c_recent = tape.leaf(p.c_recent);
  leaves.c_old = tape.leaf(p.c_old);
  return leaves;
}

GsLeaves add_constants(Tape& tape, const GsParams& p) {
  return GsLeaves{tape.constant(p.theta),    tape.constant(p.xi),
                  tape.constant(p.a_diag),   tape.constant(p.a_off),
                  tape.constant(p.c_recent), tape.constant(p.c_old)};
}

namespace {

void require_ve(const NoiseSchedule& schedule) {
  if (schedule.kind != ScheduleKind::VarianceExploding) {
    fail(ErrorKind::Unsupported, "generalized solver only implemented for VE");
  }
}

// Under VE alpha = 1 and sigma = t.
Var sigma_node(Var t) { return t; }
Var alpha_node(Tape& tape, Var) { return tape.constant(1.0); }
Var lambda_node(Tape& tape, Var t) {
  return tape.log(tape.div(alpha_node(tape, t), sigma_node(t)));
}

std::vector<Var> grid_nodes(Tape& tape, const NoiseSchedule& schedule, Var theta,
                            std::size_t N) {
  std::vector<Var> grid;
  grid.reserve(N + 1);
  grid.push_back(tape.constant(schedule.T));
  Var prod = tape.constant(1.0);
  const double span = schedule.T - schedule.delta;
  for (std::size_t n = 0; n < N; ++n) {
    prod = prod * tape.sigmoid(tape.element(theta, n));
    grid.push_back(tape.shift(tape.scale(prod, span), schedule.delta));
  }
  return grid;
}

}  // namespace

Var gs_step(Tape& tape, const NoiseSchedule& schedule, const GsLeaves& params,
            std::size_t N, const GsTrace& trace, std::size_t n) {
  require_ve(schedule);
  if (n >= N) fail(ErrorKind::State, "step index beyond the solver length");
  if (trace.points.size() < n + 1 || trace.evals.size() < n + 1) {
    fail(ErrorKind::State, "trajectory history incomplete for step " + std::to_string(n));
  }
  if (trace.grid.size() < n + 2) fail(ErrorKind::State, "grid too short");
  const GsLayout layout{N};

  auto step_h = [&](std::size_t i) {
    return lambda_node(tape, trace.grid[i + 1]) - lambda_node(tape, trace.grid[i]);
  };
  auto c_hat = [&](std::size_t k) {
    return tape.element(params.c_recent, layout.c_recent_index(n, k));
  };

  const Var h = step_h(n);
  const Var alpha_next = alpha_node(tape, trace.grid[n + 1]);
  const Var ratio = sigma_node(trace.grid[n + 1]) / sigma_node(trace.grid[n]);
  const Var psi1 = tape.expm1(tape.neg(h));

  const Var a_coef = ratio + tape.element(params.a_diag, n);
  const Var c_coef = alpha_next * psi1 + c_hat(0);
  Var x = a_coef * trace.points[n] - c_coef * trace.evals[n];

  if (n == 1) {
    const Var r0 = step_h(0) / h;
    const Var d10 = (trace.evals[1] - trace.evals[0]) / r0;
    x = x - (0.5 * (alpha_next * psi1) + c_hat(1)) * d10;
  } else if (n >= 2) {
    const Var r0 = step_h(n - 1) / h;
    const Var r1 = step_h(n - 2) / h;
    const Var psi2 = psi1 / h + 1.0;
    const Var psi3 = psi2 / h - 0.5;
    const Var d10 = (trace.evals[n] - trace.evals[n - 1]) / r0;
    const Var d11 = (trace.evals[n - 1] - trace.evals[n - 2]) / r1;
    const Var diff = d10 - d11;
    const Var d1 = d10 + (r0 / (r0 + r1)) * diff;
    const Var d2 = diff / (r0 + r1);
    x = x + (alpha_next * psi2 + c_hat(1)) * d1 - (alpha_next * psi3 + c_hat(2)) * d2;
  }

  for (std::size_t j = 0; j < n; ++j) {
    x = x + tape.element(params.a_off, layout.a_off_index(j, n)) * trace.points[j];
  }
  for (std::size_t j = 0; j + 3 <= n; ++j) {
    x = x + tape.element(params.c_old, layout.c_old_index(j, n)) * trace.evals[j];
  }
  return x;
}

GsTrace gs_rollout(Tape& tape, const MixtureModel& model,
                   const NoiseSchedule& schedule, const GsLeaves& params,
                   std::size_t N, Var x_T) {
  require_ve(schedule);
  if (params.theta.size() != N || params.xi.size() != N) {
    fail(ErrorKind::Length, "parameter leaves do not match the step count");
  }
  GsTrace trace;
  trace.grid = grid_nodes(tape, schedule, params.theta, N);
  trace.points.push_back(x_T);
  for (std::size_t n = 0; n < N; ++n) {
    const Var shifted = trace.grid[n] + tape.element(params.xi, n);
    const Var t_eval = tape.clamp(shifted, schedule.delta, schedule.T);
    trace.eval_times.push_back(t_eval);
    trace.evals.push_back(data_prediction(tape, model, schedule, trace.points[n], t_eval));
    trace.points.push_back(gs_step(tape, schedule, params, N, trace, n));
  }
  trace.endpoint = trace.points.back();
  return trace;
}

Vec gs_rollout(const MixtureModel& model, const NoiseSchedule& schedule,
               const GsParams& params, const Vec& x_T) {
  params.validate();
  Tape tape;
  const auto leaves = add_constants(tape, params);
  const auto trace = gs_rollout(tape, model, schedule, leaves, params.N, tape.constant(x_T));
  return trace.endpoint.value();
}

Vec gs_step(const NoiseSchedule& schedule, const Trajectory& traj,
            const GsParams& params, std::size_t n) {
  params.validate();
  Tape tape;
  const auto leaves = add_constants(tape, params);
  GsTrace trace;
  trace.grid = grid_nodes(tape, schedule, leaves.theta, params.N);
  if (traj.points.size() < n + 1 || traj.evals.size() < n + 1) {
    fail(ErrorKind::State, "trajectory history incomplete for step " + std::to_string(n));
  }
  for (std::size_t j = 0; j <= n; ++j) {
    trace.points.push_back(tape.constant(traj.points[j]));
    trace.evals.push_back(tape.constant(traj.evals[j]));
  }
  return gs_step(tape, schedule, leaves, params.N, trace, n).value();
}

TimeGrid gs_grid(const GsParams& params, const NoiseSchedule& schedule) {
  return stickbreak_grid(params.theta, schedule.T, schedule.delta);
}

}  // namespace gasolve
