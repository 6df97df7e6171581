#include <cmath>

#include "doctest.h"
#include "gasolve/error.hpp"
#include "gasolve/metrics.hpp"
#include "gasolve/solvers.hpp"
#include "helpers.hpp"

using namespace gasolve;
using doctest::Approx;

namespace {

const NoiseSchedule kVe = NoiseSchedule::variance_exploding();
const MixtureModel kStd = MixtureModel::single({0.0}, 1.0);

double exact_from_T(const MixtureModel& m, const NoiseSchedule& s, double x) {
  return exact_gaussian_path(m, s, State{{x}, s.T}, s.delta)[0];
}

}  // namespace

TEST_SUITE("base-solver") {

TEST_CASE("Euler step") {
  const auto s = euler_step(kStd, kVe, State{{2.0}, 1.0}, 0.5);
  CHECK(s.x[0] == 1.5);
  CHECK(s.t == 0.5);
  const auto m = MixtureModel::single({2.0}, 1.0);
  CHECK(euler_step(m, kVe, State{{2.0}, 1.0}, 0.5).x[0] == 2.0);
  CHECK(euler_step(kStd, kVe, State{{2.0}, 1.0}, 1.0).x[0] == 2.0);
  try {
    euler_step(kStd, kVe, State{{2.0}, 1.0}, 1.5);
    FAIL("expected an argument error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Argument);
  }
}

TEST_CASE("first DPM-Solver++(3M) step") {
  const auto s = NoiseSchedule::variance_exploding(2.0, 1e-3);
  const TimeGrid grid{{2.0, 1.0}};
  Trajectory traj;
  traj.points = {{2.0}};
  traj.evals = {data_prediction(kStd, s, State{{2.0}, 2.0})};
  traj.times = {2.0};
  // 0.5 * 2 - 1 * (-0.5) * 0.4, tests/oracles/gen_oracles.py
  CHECK(dpmpp3m_step(s, traj, grid, 0)[0] == Approx(1.2).epsilon(1e-15));
}

TEST_CASE("a zero data field leaves only the linear term") {
  const TimeGrid grid{{3.0, 1.7, 0.4}};
  Trajectory traj;
  traj.points = {{2.5, -1.0}};
  traj.evals = {{0.0, 0.0}};
  traj.times = {3.0};
  const auto x1 = dpmpp3m_step(kVe, traj, grid, 0);
  CHECK(x1[0] == (1.7 / 3.0) * 2.5);
  CHECK(x1[1] == (1.7 / 3.0) * -1.0);
  traj.points.push_back(x1);
  traj.evals.push_back({0.0, 0.0});
  const auto x2 = dpmpp3m_step(kVe, traj, grid, 1);
  CHECK(x2[0] == (0.4 / 1.7) * x1[0]);
}

TEST_CASE("insufficient history is a state error") {
  Trajectory traj;
  traj.points = {{1.0}};
  traj.evals = {{0.5}};
  const TimeGrid grid{{3.0, 2.0, 1.0}};
  try {
    dpmpp3m_step(kVe, traj, grid, 1);
    FAIL("expected a state error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::State);
  }
  CHECK_THROWS_AS(dpmpp3m_step(kVe, traj, TimeGrid{{3.0}}, 0), Error);
}

TEST_CASE("one-step rollout equals the closed-form exponential-integrator update") {
  for (int c = 0; c < 100; ++c) {
    auto rng = testing::rng_for(20000 + c);
    const auto m = testing::random_mixture(rng, 2);
    const auto x = testing::random_vec(rng, 2, 10.0);
    const TimeGrid grid{{kVe.T, kVe.delta}};
    const auto out = dpmpp3m_solve(m, kVe, grid, x);
    const auto x0 = data_prediction(m, kVe, State{x, kVe.T});
    const double h = std::log(kVe.T / kVe.delta);
    for (std::size_t i = 0; i < 2; ++i) {
      const double ref = kVe.delta / kVe.T * x[i] - std::expm1(-h) * x0[i];
      CHECK(out[i] == Approx(ref).epsilon(1e-15).scale(1.0));
    }
  }
}

TEST_CASE("rollouts on fixed grids match the straight-line reference") {
  // tests/oracles/gen_oracles.py: the DPM-Solver++(3M) recursion.
  const auto geo = logsnr_grid(3, kVe, kVe.T, kVe.delta);
  CHECK(dpmpp3m_solve(kStd, kVe, geo, {3.0})[0] == Approx(0.2004999401803523).epsilon(1e-13));

  const TimeGrid uni{{10.0, 7.500249999999999, 5.0005, 2.50075, 0.250975}};
  CHECK(dpmpp3m_solve(kStd, kVe, uni, {3.0})[0] == Approx(0.3411658109724005).epsilon(1e-13));
  CHECK(dpmpp3m_solve(kStd, kVe, uni, {-7.5})[0] == Approx(-0.8529145274310015).epsilon(1e-13));
  CHECK(dpmpp3m_solve(kStd, kVe, uni, {12.0})[0] == Approx(1.364663243889602).epsilon(1e-13));
}

TEST_CASE("three-step log-SNR rollout against the RK4 oracle") {
  const auto geo = logsnr_grid(3, kVe, kVe.T, kVe.delta);
  const double got = dpmpp3m_solve(kStd, kVe, geo, {3.0})[0];
  const double oracle = rk4_solve(kStd, kVe, Vec{3.0}, 10000)[0];
  CHECK(oracle == Approx(exact_from_T(kStd, kVe, 3.0)).epsilon(1e-10));
  // Measured error at N = 3 is 0.098; bounded by a few multiples of h^2
  // (h = log(1e4)/3) times |x|.
  CHECK(std::abs(got - oracle) < 0.1);
  CHECK(std::abs(got - oracle) > 0.0);
}

TEST_CASE("RK4 oracle") {
  const auto s2 = NoiseSchedule::variance_exploding(2.0, 1e-3);
  CHECK(std::abs(rk4_solve(kStd, s2, Vec{3.0}, 10000)[0] - exact_from_T(kStd, s2, 3.0)) < 1e-8);
  const auto m = MixtureModel::single({0.75, -0.25}, 0.5);
  const auto fixed = rk4_solve(m, kVe, Vec{0.75, -0.25}, 7);
  CHECK(fixed[0] == 0.75);
  CHECK(fixed[1] == -0.25);
  CHECK_THROWS_AS(rk4_solve(kStd, kVe, Vec{1.0}, 0), Error);
}

TEST_CASE("RK4 halving the step divides the error by about 16") {
  // In the asymptotic range (N = 16 -> 32 on T = 10) the ratio is 15.996.
  const double exact = exact_from_T(kStd, kVe, 3.0);
  const double e16 = std::abs(rk4_solve(kStd, kVe, Vec{3.0}, 16)[0] - exact);
  const double e32 = std::abs(rk4_solve(kStd, kVe, Vec{3.0}, 32)[0] - exact);
  CHECK(e16 / e32 == Approx(16.0).epsilon(0.05));
}

TEST_CASE("teacher rollouts") {
  TeacherConfig rk{TeacherKind::Rk4Oracle, 10000, GridKind::LogSnr, 1.0};
  TeacherConfig dpm{TeacherKind::Dpmpp3m, 20, GridKind::LogSnr, 1.0};
  for (double x : {-10.0, 3.0, 7.0}) {
    CHECK(std::abs(teacher_rollout(kStd, kVe, rk, {x})[0] - exact_from_T(kStd, kVe, x)) < 1e-8);
  }
  // The 3M third-order correction carries half the second-derivative
  // weight of the exact integral, so the rollout converges at second order:
  // the NFE=20 error at x_T = 3 measures 1.38e-3.
  const double err = std::abs(teacher_rollout(kStd, kVe, dpm, {3.0})[0] - exact_from_T(kStd, kVe, 3.0));
  CHECK(err < 1.5e-3);

  const auto m = MixtureModel::single({1.25}, 0.3);
  CHECK(teacher_rollout(m, kVe, rk, {1.25})[0] == 1.25);
  CHECK(teacher_rollout(m, kVe, dpm, {1.25})[0] == Approx(1.25).epsilon(1e-15));

  auto rng = testing::rng_for(7);
  const auto mix = testing::random_mixture(rng, 3);
  const auto x = testing::random_vec(rng, 3, 10.0);
  CHECK(teacher_rollout(mix, kVe, dpm, x) == teacher_rollout(mix, kVe, dpm, x));
  TeacherConfig poly{TeacherKind::Dpmpp3m, 30, GridKind::Polynomial, 2.0};
  CHECK(teacher_rollout(mix, kVe, poly, x) == teacher_rollout(mix, kVe, poly, x));
}

TEST_CASE("Euler and RK4 convergence orders") {
  const std::vector<std::size_t> steps{10, 20, 40, 80};
  const auto eu = convergence_order(OrderSolver::Euler, kStd, kVe, {3.0}, steps);
  const auto rk = convergence_order(OrderSolver::Rk4, kStd, kVe, {3.0}, steps);
  CHECK(std::abs(eu.order - 1.0) <= 0.15);
  CHECK(std::abs(rk.order - 4.0) <= 0.5);
}

TEST_CASE("parsers") {
  CHECK(parse_teacher_kind("dpmpp3m") == TeacherKind::Dpmpp3m);
  CHECK(parse_teacher_kind("rk4-oracle") == TeacherKind::Rk4Oracle);
  CHECK(parse_grid_kind("polynomial") == GridKind::Polynomial);
  CHECK_THROWS_AS(parse_teacher_kind("unipc"), Error);
  CHECK(to_string(TeacherKind::Rk4Oracle) == "rk4-oracle");
}

}  // TEST_SUITE
