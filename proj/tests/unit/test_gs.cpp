#include <cmath>

#include "doctest.h"
#include "gasolve/error.hpp"
#include "gasolve/gs.hpp"
#include "gasolve/train.hpp"
#include "helpers.hpp"

using namespace gasolve;
using doctest::Approx;

namespace {

const NoiseSchedule kVe = NoiseSchedule::variance_exploding();

double rel_dev(const Vec& a, const Vec& b) {
  return testing::max_abs_diff(a, b) / std::max(1e-300, testing::norm(b));
}

// Params on the two-point grid [2, 1] with delta = 1e-3, all corrections zero.
GsParams one_step_params(const NoiseSchedule& s) {
  auto p = init_params(1, s);
  p.theta = stickbreak_inverse(TimeGrid{{2.0, 1.0}}, s.delta);
  return p;
}

}  // namespace

TEST_SUITE("gs") {

TEST_CASE("parameter counts") {
  CHECK(param_count(1) == 4);
  CHECK(param_count(4) == 28);
  CHECK(param_count(10) == 130);
  for (std::size_t N = 1; N <= 12; ++N) {
    const std::size_t c_recent = N >= 2 ? 3 * N - 3 : 1;
    const std::size_t c_old = N >= 3 ? (N - 3) * (N - 2) / 2 : 0;
    CHECK(param_count(N) == 3 * N + N * (N - 1) / 2 + c_recent + c_old);
    CHECK(init_params(N, kVe).size() == param_count(N));
    CHECK(init_params(N, kVe).flat().size() == param_count(N));
  }
  CHECK_THROWS_AS(param_count(0), Error);
}

TEST_CASE("layout indices enumerate every slot once") {
  for (std::size_t N = 1; N <= 10; ++N) {
    const GsLayout l{N};
    std::vector<int> a(l.a_off_size()), c(l.c_recent_size()), o(l.c_old_size());
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t j = 0; j < n; ++j) ++a.at(l.a_off_index(j, n));
      for (std::size_t k = 0; k < GsLayout::recent_width(n); ++k) ++c.at(l.c_recent_index(n, k));
      for (std::size_t j = 0; j + 3 <= n; ++j) ++o.at(l.c_old_index(j, n));
    }
    for (int v : a) CHECK(v == 1);
    for (int v : c) CHECK(v == 1);
    for (int v : o) CHECK(v == 1);
  }
}

TEST_CASE("init params") {
  const auto p1 = init_params(1, kVe);
  CHECK(p1.size() == 4);
  CHECK(p1.xi == Vec{0.0});
  CHECK(p1.a_diag == Vec{0.0});
  CHECK(p1.c_recent == Vec{0.0});
  const auto p4 = init_params(4, kVe);
  CHECK(p4.size() == 28);
  CHECK(p4.theta == time_uniform_logits(4, kVe.T, kVe.delta));
  for (const Vec* v : {&p4.xi, &p4.a_diag, &p4.a_off, &p4.c_recent, &p4.c_old}) {
    for (double x : *v) CHECK(x == 0.0);
  }
}

TEST_CASE("flat round trip and named length errors") {
  auto rng = testing::rng_for(31);
  const auto p = GsParams::from_flat(5, testing::random_vec(rng, param_count(5), 1.0));
  const auto q = GsParams::from_flat(5, p.flat());
  CHECK(q.flat() == p.flat());
  CHECK_THROWS_AS(GsParams::from_flat(5, Vec(param_count(5) - 1)), Error);

  auto bad = init_params(4, kVe);
  bad.xi.pop_back();
  try {
    bad.validate();
    FAIL("expected a length error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Length);
    CHECK(std::string(e.what()).find("'xi'") != std::string::npos);
  }
}

TEST_CASE("hand-evaluated first steps") {
  const auto s = NoiseSchedule::variance_exploding(2.0, 1e-3);
  const auto m = MixtureModel::single({0.0}, 1.0);
  Trajectory traj;
  traj.points = {{2.0}};
  traj.evals = {data_prediction(m, s, State{{2.0}, 2.0})};
  traj.times = {2.0};

  auto p = one_step_params(s);
  CHECK(gs_step(s, traj, p, 0)[0] == Approx(1.2).epsilon(1e-12));

  p.a_diag[0] = 0.1;  // 1.2 + 0.1 * 2
  CHECK(gs_step(s, traj, p, 0)[0] == Approx(1.4).epsilon(1e-12));

  p.a_diag[0] = 0.0;
  p.c_recent[0] = 0.5;  // 0.5 * 2 - (1 * (-0.5) + 0.5) * 0.4
  CHECK(gs_step(s, traj, p, 0)[0] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero corrections reproduce the base solver") {
  for (std::size_t N = 1; N <= 10; ++N) {
    for (int c = 0; c < 10; ++c) {
      auto rng = testing::rng_for(40000 + 100 * N + c);
      const auto m = testing::random_mixture(rng, 2);
      const auto x = testing::random_vec(rng, 2, kVe.T);
      const auto p = init_params(N, kVe);
      const auto gs = gs_rollout(m, kVe, p, x);
      const auto base = dpmpp3m_solve(m, kVe, gs_grid(p, kVe), x);
      CHECK(rel_dev(gs, base) < 1e-12);
    }
  }
}

TEST_CASE("logits of a log-SNR grid reproduce the log-SNR rollout") {
  const auto m = MixtureModel({{0.3, {1.0, -1.0}, 0.2}, {0.7, {-0.5, 0.5}, 0.4}});
  for (std::size_t N : {1u, 3u, 6u}) {
    // Stop short of delta, which the stick-breaking map cannot reach.
    const auto grid = logsnr_grid(N, kVe, kVe.T, 2 * kVe.delta);
    auto p = init_params(N, kVe);
    p.theta = stickbreak_inverse(grid, kVe.delta);
    const Vec x{4.0, -6.0};
    CHECK(rel_dev(gs_rollout(m, kVe, p, x), dpmpp3m_solve(m, kVe, grid, x)) < 1e-10);
  }
}

TEST_CASE("the mode is a fixed point") {
  const auto m = MixtureModel::single({0.5, 1.5}, 0.7);
  const auto out = gs_rollout(m, kVe, init_params(4, kVe), {0.5, 1.5});
  CHECK(out[0] == Approx(0.5).epsilon(1e-13));
  CHECK(out[1] == Approx(1.5).epsilon(1e-13));
}

TEST_CASE("shifted evaluation times are clamped to [delta, T]") {
  auto rng = testing::rng_for(77);
  const auto m = testing::random_mixture(rng, 2);
  for (int c = 0; c < 50; ++c) {
    auto p = init_params(5, kVe);
    std::normal_distribution<double> n(0.0, 20.0);
    for (auto& v : p.xi) v = n(rng);
    Tape tape;
    const auto leaves = add_constants(tape, p);
    const auto trace = gs_rollout(tape, m, kVe, leaves, 5, tape.constant(Vec{1.0, 2.0}));
    for (const auto& t : trace.eval_times) {
      CHECK(t.scalar() >= kVe.delta);
      CHECK(t.scalar() <= kVe.T);
    }
    for (double v : trace.endpoint.value()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("the endpoint responds continuously to every correction") {
  const auto m = MixtureModel({{0.5, {-1.0}, 0.1}, {0.5, {1.0}, 0.1}});
  auto rng = testing::rng_for(91);
  auto base = GsParams::from_flat(4, [&] {
    auto f = init_params(4, kVe).flat();
    std::normal_distribution<double> n(0.0, 0.01);
    for (std::size_t i = 4; i < f.size(); ++i) f[i] = n(rng);
    return f;
  }());
  const Vec x{2.5};
  const double y0 = gs_rollout(m, kVe, base, x)[0];
  const auto flat = base.flat();
  int unstable = 0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto f1 = flat, f2 = flat;
    f1[i] += 1e-6;
    f2[i] += 1e-7;
    const double d1 = gs_rollout(m, kVe, GsParams::from_flat(4, f1), x)[0] - y0;
    const double d2 = gs_rollout(m, kVe, GsParams::from_flat(4, f2), x)[0] - y0;
    CHECK(std::abs(d1) < 1e-3);
    if (std::abs(d1) > 1e-12 && std::abs(d2 / d1 * 10.0 - 1.0) > 0.1) ++unstable;
  }
  CHECK(unstable == 0);
}

TEST_CASE("trained corrections beat the zero-correction solver") {
  const auto m = MixtureModel::single({0.5}, 0.5);
  Dataset data;
  data.dim = 1;
  for (int i = 0; i < 64; ++i) {
    auto rng = testing::rng_for(500 + i);
    const auto x = testing::random_vec(rng, 1, kVe.T);
    data.x_T.push_back(x);
    data.target.push_back(exact_gaussian_path(m, kVe, State{x, kVe.T}, kVe.delta));
  }
  TrainConfig cfg;
  cfg.steps = 4;
  cfg.iterations = 300;
  cfg.batch_size = 8;
  cfg.seed = 3;
  const auto res = train_gs(m, kVe, cfg, data);
  REQUIRE_FALSE(res.aborted);
  const auto trained = res.state.params;
  const auto init = init_params(4, kVe);
  double e_trained = 0, e_init = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    e_trained += std::abs(gs_rollout(m, kVe, trained, data.x_T[i])[0] - data.target[i][0]);
    e_init += std::abs(gs_rollout(m, kVe, init, data.x_T[i])[0] - data.target[i][0]);
  }
  CHECK(e_trained < e_init);
}

}  // TEST_SUITE
