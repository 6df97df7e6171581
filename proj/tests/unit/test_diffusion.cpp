#include <cmath>

#include "doctest.h"
#include "gasolve/diffusion.hpp"
#include "gasolve/error.hpp"
#include "gasolve/solvers.hpp"
#include "helpers.hpp"

using namespace gasolve;
using doctest::Approx;

namespace {

// w = (0.5, 0.5), mu = -1 / +1, s^2 = 0.01 in 1-D.
MixtureModel two_component() {
  return MixtureModel({{0.5, {-1.0}, 0.01}, {0.5, {1.0}, 0.01}});
}

// Reference values from tests/oracles/gen_oracles.py (mpmath, 40 digits).
constexpr double kTwoScore = 34.999999999990642377;
constexpr double kTwoDScoreDx = -49.999999999064237703;
constexpr double kTwoDScoreDt = -350.00000000271371066;
constexpr double kTwoScoreCentralDiff = 35.00000000000725;

}  // namespace

TEST_SUITE("diffusion-core") {

TEST_CASE("alpha_sigma for the variance-exploding schedule") {
  const auto s = NoiseSchedule::variance_exploding();
  CHECK(alpha_sigma(s, 0.5).alpha == 1.0);
  CHECK(alpha_sigma(s, 0.5).sigma == 0.5);
  CHECK(alpha_sigma(s, 0.001).alpha == 1.0);
  CHECK(alpha_sigma(s, 0.001).sigma == 0.001);
  CHECK(alpha_sigma(s, 10.0).sigma == 10.0);
}

TEST_CASE("out-of-range times raise range errors") {
  const auto s = NoiseSchedule::variance_exploding();
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Argument;
  };
  CHECK(kind_of([&] { alpha_sigma(s, s.T + 1.0); }) == ErrorKind::Range);
  CHECK(kind_of([&] { alpha_sigma(s, 0.0); }) == ErrorKind::Range);
  CHECK(kind_of([&] { log_snr(s, 11.0); }) == ErrorKind::Range);
  const auto m = MixtureModel::single({0.0}, 1.0);
  CHECK(kind_of([&] { score(m, s, State{{1.0}, 20.0}); }) == ErrorKind::Range);
}

TEST_CASE("schedule construction validates delta < T") {
  CHECK_THROWS_AS(NoiseSchedule::variance_exploding(1.0, 2.0), Error);
  CHECK_THROWS_AS(NoiseSchedule::variance_exploding(1.0, 0.0), Error);
}

TEST_CASE("log_snr closed forms") {
  const auto s = NoiseSchedule::variance_exploding();
  CHECK(log_snr(s, 1.0) == 0.0);
  CHECK(log_snr(s, 2.0) == Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(log_snr(s, 0.5) == Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("mixture validation") {
  CHECK_THROWS_AS(MixtureModel({{0.5, {0.0}, 1.0}}), Error);                    // weights
  CHECK_THROWS_AS(MixtureModel({{1.0, {0.0}, 0.0}}), Error);                    // variance
  CHECK_THROWS_AS(MixtureModel({{0.5, {0.0}, 1.0}, {0.5, {0.0, 1.0}, 1.0}}), Error);  // dims
  CHECK_THROWS_AS(MixtureModel(std::vector<MixtureComponent>{}), Error);
  CHECK_NOTHROW(MixtureModel({{0.25, {0.0}, 1.0}, {0.75, {1.0}, 2.0}}));
}

TEST_CASE("score of a single Gaussian") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto m = MixtureModel::single({0.0}, 1.0);
  CHECK(score(m, s, State{{2.0}, 1.0})[0] == -1.0);
}

TEST_CASE("score vanishes at a single-component mode") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto m = MixtureModel::single({0.7, -1.2, 3.0}, 0.4);
  for (double t : {0.001, 0.3, 2.0, 10.0}) {
    const auto g = score(m, s, State{{0.7, -1.2, 3.0}, t});
    for (double v : g) CHECK(v == 0.0);
  }
}

TEST_CASE("two-component score matches the log-density oracle") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto g = score(two_component(), s, State{{0.3}, 0.1});
  CHECK(g[0] == Approx(kTwoScore).epsilon(1e-13));
  // The double-precision central difference of log p_t (h = 1e-5).
  CHECK(g[0] == Approx(kTwoScoreCentralDiff).epsilon(1e-9));
}

TEST_CASE("data prediction by Tweedie") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto m = MixtureModel::single({0.0}, 1.0);
  CHECK(data_prediction(m, s, State{{2.0}, 2.0})[0] == Approx(0.4).epsilon(1e-15));

  // Near delta the posterior mean hugs x.
  std::mt19937_64 rng = testing::rng_for(1);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double x = n(rng);
    const double x0 = data_prediction(m, s, State{{x}, s.delta})[0];
    CHECK(std::abs(x0 - x) <= 1.1e-6 * std::abs(x) + 1.1e-6);
  }

  const auto m2 = MixtureModel::single({1.5, -0.5}, 0.3);
  const auto at_mean = data_prediction(m2, s, State{{1.5, -0.5}, 3.0});
  CHECK(at_mean[0] == Approx(1.5).epsilon(1e-15));
  CHECK(at_mean[1] == Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("Tweedie identity holds to machine precision") {
  const auto s = NoiseSchedule::variance_exploding();
  for (int c = 0; c < 50; ++c) {
    auto rng = testing::rng_for(100 + c);
    const auto m = testing::random_mixture(rng, 3);
    const double t = std::uniform_real_distribution<double>(s.delta, s.T)(rng);
    const auto x = testing::random_vec(rng, 3, t + 1.0);
    const auto g = score(m, s, State{x, t});
    const auto x0 = data_prediction(m, s, State{x, t});
    for (std::size_t i = 0; i < 3; ++i) {
      const double rebuilt = s.alpha(t) * x0[i] - s.sigma(t) * s.sigma(t) * g[i];
      CHECK(rebuilt == Approx(x[i]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("velocity") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto m = MixtureModel::single({0.0}, 1.0);
  CHECK(velocity(m, s, State{{2.0}, 1.0})[0] == 1.0);
  CHECK(velocity(MixtureModel::single({2.0}, 1.0), s, State{{2.0}, 1.0})[0] == 0.0);
  const auto v = velocity(two_component(), s, State{{0.3}, 0.1});
  CHECK(v[0] == Approx(-0.1 * kTwoScore).epsilon(1e-13));
}

TEST_CASE("single-Gaussian velocity is linear in x - mu") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto m = MixtureModel::single({0.5, -2.0}, 0.8);
  for (double t : {0.01, 1.0, 7.0}) {
    const auto v1 = velocity(m, s, State{{0.5 + 1.25, -2.0 - 0.75}, t});
    const auto v2 = velocity(m, s, State{{0.5 + 2.5, -2.0 - 1.5}, t});
    CHECK(v2[0] == 2.0 * v1[0]);
    CHECK(v2[1] == 2.0 * v1[1]);
  }
}

TEST_CASE("score_vjp closed forms") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto m = MixtureModel::single({0.0}, 1.0);
  const Vec w{4.0};
  CHECK(score_vjp(m, s, State{{0.3}, 1.0}, w)[0] == Approx(-2.0).epsilon(1e-15));
  const Vec zero{0.0};
  CHECK(score_vjp(two_component(), s, State{{0.3}, 0.1}, zero)[0] == 0.0);
  const Vec one{1.0};
  const double h = score_vjp(two_component(), s, State{{0.3}, 0.1}, one)[0];
  CHECK(h == Approx(kTwoDScoreDx).epsilon(1e-11));
}

TEST_CASE("score_vjp matches central differences of score") {
  const auto s = NoiseSchedule::variance_exploding();
  int failures = 0;
  for (int c = 0; c < 100; ++c) {
    auto rng = testing::rng_for(1000 + c);
    const std::size_t d = 1 + c % 4;
    const auto m = testing::random_mixture(rng, d);
    const double t = std::exp(std::uniform_real_distribution<double>(std::log(0.05), std::log(s.T))(rng));
    const auto x = testing::random_vec(rng, d, 1.0 + t);
    const auto w = testing::random_vec(rng, d, 1.0);
    const auto vjp = score_vjp(m, s, State{x, t}, w);
    const double h = 1e-5 * (1.0 + t);
    for (std::size_t j = 0; j < d; ++j) {
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto sp = score(m, s, State{xp, t});
      const auto sm = score(m, s, State{xm, t});
      double fd = 0.0;
      for (std::size_t i = 0; i < d; ++i) fd += w[i] * (sp[i] - sm[i]) / (2 * h);
      if (!testing::rel_close(vjp[j], fd, 1e-5, 1e-8)) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("score time derivative matches the oracle and differences") {
  const auto s = NoiseSchedule::variance_exploding();
  const auto dt = score_time_derivative(two_component(), s, State{{0.3}, 0.1});
  CHECK(dt[0] == Approx(kTwoDScoreDt).epsilon(1e-11));

  for (int c = 0; c < 50; ++c) {
    auto rng = testing::rng_for(2000 + c);
    const auto m = testing::random_mixture(rng, 2);
    const double t = std::uniform_real_distribution<double>(0.1, 9.0)(rng);
    const auto x = testing::random_vec(rng, 2, 1.0 + t);
    const auto an = score_time_derivative(m, s, State{x, t});
    const auto x0an = data_prediction_time_derivative(m, s, State{x, t});
    const double h = 1e-5 * t;
    const auto sp = score(m, s, State{x, t + h});
    const auto sm = score(m, s, State{x, t - h});
    const auto dp = data_prediction(m, s, State{x, t + h});
    const auto dm = data_prediction(m, s, State{x, t - h});
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(testing::rel_close(an[i], (sp[i] - sm[i]) / (2 * h), 1e-5, 1e-8));
      CHECK(testing::rel_close(x0an[i], (dp[i] - dm[i]) / (2 * h), 1e-5, 1e-8));
    }
  }
}

TEST_CASE("data_prediction_vjp matches differences") {
  const auto s = NoiseSchedule::variance_exploding();
  for (int c = 0; c < 50; ++c) {
    auto rng = testing::rng_for(3000 + c);
    const auto m = testing::random_mixture(rng, 3);
    const double t = std::uniform_real_distribution<double>(0.05, 9.0)(rng);
    const auto x = testing::random_vec(rng, 3, 1.0 + t);
    const auto w = testing::random_vec(rng, 3, 1.0);
    const auto vjp = data_prediction_vjp(m, s, State{x, t}, w);
    const double h = 1e-5 * (1.0 + t);
    for (std::size_t j = 0; j < 3; ++j) {
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto p = data_prediction(m, s, State{xp, t});
      const auto q = data_prediction(m, s, State{xm, t});
      double fd = 0.0;
      for (std::size_t i = 0; i < 3; ++i) fd += w[i] * (p[i] - q[i]) / (2 * h);
      CHECK(testing::rel_close(vjp[j], fd, 1e-5, 1e-8));
    }
  }
}

TEST_CASE("distant components do not underflow the responsibilities") {
  const auto s = NoiseSchedule::variance_exploding();
  const MixtureModel m({{0.5, {-50.0}, 1e-4}, {0.5, {50.0}, 1e-4}});
  const auto g = score(m, s, State{{49.0}, s.delta});
  CHECK(std::isfinite(g[0]));
  CHECK(g[0] == Approx(1.0 / (1e-4 + 1e-6)).epsilon(1e-9));
}

TEST_CASE("exact Gaussian path") {
  const auto s = NoiseSchedule::variance_exploding(10.0, 1e-9);
  const auto m = MixtureModel::single({0.0}, 1.0);
  const auto x = exact_gaussian_path(m, s, State{{3.0}, 2.0}, 1e-9);
  CHECK(x[0] == Approx(1.3416407864998738).epsilon(1e-12));  // 3 sqrt(1/5)
  CHECK(exact_gaussian_path(m, s, State{{3.0}, 2.0}, 2.0)[0] == 3.0);
  const auto m1 = MixtureModel::single({1.0}, 0.5);
  for (double to : {1e-3, 0.5, 2.0, 9.0}) {
    CHECK(exact_gaussian_path(m1, s, State{{1.0}, 2.0}, to)[0] == 1.0);
  }
  CHECK_THROWS_AS(exact_gaussian_path(two_component(), s, State{{3.0}, 2.0}, 1.0), Error);
}

TEST_CASE("exact path agrees with a 10,000-step RK4 integration") {
  const auto s = NoiseSchedule::variance_exploding(2.0, 1e-3);
  const auto m = MixtureModel::single({0.0}, 1.0);
  for (double x : {-10.0, -3.0, 0.0, 0.5, 3.0, 10.0}) {
    const auto rk = rk4_solve(m, s, Vec{x}, 10000);
    const auto ex = exact_gaussian_path(m, s, State{{x}, s.T}, s.delta);
    CHECK(std::abs(rk[0] - ex[0]) < 1e-8);
  }
}

}  // TEST_SUITE
