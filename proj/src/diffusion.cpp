#include "gasolve/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gasolve/error.hpp"

namespace gasolve {

NoiseSchedule NoiseSchedule::variance_exploding(double T, double delta) {
  if (!(delta > 0.0) || !(delta < T) || !std::isfinite(T)) {
    std::ostringstream os;
    os << "schedule requires 0 < delta < T, got delta=" << delta
       << " T=" << T;
    fail(ErrorKind::Argument, os.str());
  }
  return NoiseSchedule{ScheduleKind::VarianceExploding, T, delta};
}

double NoiseSchedule::alpha(double) const noexcept { return 1.0; }
double NoiseSchedule::sigma(double t) const noexcept { return t; }
double NoiseSchedule::alpha_dot(double) const noexcept { return 0.0; }
double NoiseSchedule::sigma_dot(double) const noexcept { return 1.0; }

double NoiseSchedule::drift(double t) const noexcept {
  return alpha_dot(t) / alpha(t);
}

double NoiseSchedule::diffusion_sq(double t) const noexcept {
  const double s = sigma(t);
  return 2.0 * s * sigma_dot(t) - 2.0 * drift(t) * s * s;
}

void NoiseSchedule::require(double t) const {
  if (!contains(t)) {
    std::ostringstream os;
    os.precision(17);
    os << "time " << t << " outside [" << delta << ", " << T << "]";
    fail(ErrorKind::Range, os.str());
  }
}

AlphaSigma alpha_sigma(const NoiseSchedule& schedule, double t) {
  schedule.require(t);
  return {schedule.alpha(t), schedule.sigma(t)};
}

double log_snr(const NoiseSchedule& schedule, double t) {
  const auto [a, s] = alpha_sigma(schedule, t);
  return std::log(a / s);
}

MixtureModel::MixtureModel(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) fail(ErrorKind::Argument, "mixture has no components");
  dim_ = components_.front().mean.size();
  if (dim_ == 0) fail(ErrorKind::Argument, "mixture mean has dimension 0");
  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    if (c.mean.size() != dim_) {
      fail(ErrorKind::Argument,
           "mixture component " + std::to_string(k) + " has mismatched dimension");
    }
    if (!(c.weight > 0.0) || c.weight > 1.0) {
      fail(ErrorKind::Argument,
           "mixture component " + std::to_string(k) + " weight outside (0, 1]");
    }
    if (!(c.var > 0.0) || !std::isfinite(c.var)) {
      fail(ErrorKind::Argument,
           "mixture component " + std::to_string(k) + " variance must be positive");
    }
    for (double m : c.mean) {
      if (!std::isfinite(m)) {
        fail(ErrorKind::Argument,
             "mixture component " + std::to_string(k) + " mean is not finite");
      }
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "mixture weights sum to " << total << ", expected 1";
    fail(ErrorKind::Argument, os.str());
  }
}

MixtureModel MixtureModel::single(Vec mean, double var) {
  return MixtureModel({MixtureComponent{1.0, std::move(mean), var}});
}

namespace {

void validate(const MixtureModel& model, const NoiseSchedule& schedule,
              const State& state) {
  schedule.require(state.t);
  if (state.x.size() != model.dim()) {
    fail(ErrorKind::Argument, "state dimension " + std::to_string(state.x.size()) +
                                  " does not match model dimension " +
                                  std::to_string(model.dim()));
  }
  for (double v : state.x) {
    if (!std::isfinite(v)) fail(ErrorKind::NotFinite, "state x is not finite");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Per-component quantities of the noised mixture at (x, t).
struct MixtureEval {
  std::vector<double> resp;  // posterior responsibilities gamma_k
  std::vector<double> var;   // v_k = alpha^2 s_k^2 + sigma^2
  std::vector<double> logp;  // unnormalized log-weights
  std::vector<Vec> grad;     // g_k = -(x - alpha mu_k) / v_k
  Vec score;
};

MixtureEval evaluate(const MixtureModel& model, const NoiseSchedule& schedule,
                     const State& state) {
  const double a = schedule.alpha(state.t);
  const double s = schedule.sigma(state.t);
  const std::size_t d = model.dim();
  const std::size_t K = model.size();

  MixtureEval ev;
  ev.resp.resize(K);
  ev.var.resize(K);
  ev.logp.resize(K);
  ev.grad.assign(K, Vec(d));
  ev.score.assign(d, 0.0);

  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = model.components()[k];
    const double v = a * a * c.var + s * s;
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = state.x[i] - a * c.mean[i];
      ev.grad[k][i] = -diff / v;
      sq += diff * diff;
    }
    ev.var[k] = v;
    ev.logp[k] = std::log(c.weight) -
                 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * v) -
                 0.5 * sq / v;
    max_log = std::max(max_log, ev.logp[k]);
  }
  double norm = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    ev.resp[k] = std::exp(ev.logp[k] - max_log);
    norm += ev.resp[k];
  }
  for (std::size_t k = 0; k < K; ++k) {
    ev.resp[k] /= norm;
    for (std::size_t i = 0; i < d; ++i) ev.score[i] += ev.resp[k] * ev.grad[k][i];
  }
  return ev;
}

Vec hessian_apply(const MixtureEval& ev, std::span<const double> w) {
  const std::size_t d = w.size();
  Vec out(d, 0.0);
  for (std::size_t k = 0; k < ev.resp.size(); ++k) {
    const double gw = dot(ev.grad[k], w);
    for (std::size_t i = 0; i < d; ++i) {
      out[i] += ev.resp[k] * (-w[i] / ev.var[k] + ev.grad[k][i] * gw);
    }
  }
  const double sw = dot(ev.score, w);
  for (std::size_t i = 0; i < d; ++i) out[i] -= ev.score[i] * sw;
  return out;
}

Vec score_dt(const MixtureModel& model, const NoiseSchedule& schedule,
             const State& state, const MixtureEval& ev) {
  const double t = state.t;
  const double a = schedule.alpha(t);
  const double s = schedule.sigma(t);
  const double ad = schedule.alpha_dot(t);
  const double sd = schedule.sigma_dot(t);
  const std::size_t d = model.dim();
  const std::size_t K = model.size();

  std::vector<double> dlog(K);
  std::vector<double> dvar(K);
  double mean_dlog = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = model.components()[k];
    const double v = ev.var[k];
    const double vd = 2.0 * a * ad * c.var + 2.0 * s * sd;
    dvar[k] = vd;
    const double gg = dot(ev.grad[k], ev.grad[k]);
    const double gm = dot(ev.grad[k], c.mean);
    dlog[k] = -0.5 * static_cast<double>(d) * vd / v - ad * gm + 0.5 * gg * vd;
    mean_dlog += ev.resp[k] * dlog[k];
  }
  Vec out(d, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = model.components()[k];
    const double v = ev.var[k];
    const double dr = ev.resp[k] * (dlog[k] - mean_dlog);
    for (std::size_t i = 0; i < d; ++i) {
      const double dg = ad * c.mean[i] / v - ev.grad[k][i] * dvar[k] / v;
      out[i] += dr * ev.grad[k][i] + ev.resp[k] * dg;
    }
  }
  return out;
}

}  // namespace

Vec score(const MixtureModel& model, const NoiseSchedule& schedule,
          const State& state) {
  validate(model, schedule, state);
  return evaluate(model, schedule, state).score;
}

Vec data_prediction(const MixtureModel& model, const NoiseSchedule& schedule,
                    const State& state) {
  validate(model, schedule, state);
  const auto ev = evaluate(model, schedule, state);
  const double a = schedule.alpha(state.t);
  const double s = schedule.sigma(state.t);
  Vec out(model.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (state.x[i] + s * s * ev.score[i]) / a;
  }
  return out;
}

Vec velocity(const MixtureModel& model, const NoiseSchedule& schedule,
             const State& state) {
  validate(model, schedule, state);
  const auto ev = evaluate(model, schedule, state);
  const double f = schedule.drift(state.t);
  const double g2 = schedule.diffusion_sq(state.t);
  Vec out(model.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = f * state.x[i] - 0.5 * g2 * ev.score[i];
  }
  return out;
}

Vec score_vjp(const MixtureModel& model, const NoiseSchedule& schedule,
              const State& state, std::span<const double> w) {
  validate(model, schedule, state);
  if (w.size() != model.dim()) fail(ErrorKind::Argument, "cotangent dimension mismatch");
  return hessian_apply(evaluate(model, schedule, state), w);
}

Vec score_time_derivative(const MixtureModel& model,
                          const NoiseSchedule& schedule, const State& state) {
  validate(model, schedule, state);
  return score_dt(model, schedule, state, evaluate(model, schedule, state));
}

Vec data_prediction_vjp(const MixtureModel& model,
                        const NoiseSchedule& schedule, const State& state,
                        std::span<const double> w) {
  validate(model, schedule, state);
  if (w.size() != model.dim()) fail(ErrorKind::Argument, "cotangent dimension mismatch");
  const double a = schedule.alpha(state.t);
  const double s = schedule.sigma(state.t);
  auto hw = hessian_apply(evaluate(model, schedule, state), w);
  for (std::size_t i = 0; i < hw.size(); ++i) hw[i] = (w[i] + s * s * hw[i]) / a;
  return hw;
}

Vec data_prediction_time_derivative(const MixtureModel& model,
                                    const NoiseSchedule& schedule,
                                    const State& state) {
  validate(model, schedule, state);
  const auto ev = evaluate(model, schedule, state);
  const auto st = score_dt(model, schedule, state, ev);
  const double t = state.t;
  const double a = schedule.alpha(t);
  const double s = schedule.sigma(t);
  const double ad = schedule.alpha_dot(t);
  const double sd = schedule.sigma_dot(t);
  Vec out(model.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double num = state.x[i] + s * s * ev.score[i];
    const double dnum = 2.0 * s * sd * ev.score[i] + s * s * st[i];
    out[i] = (dnum * a - num * ad) / (a * a);
  }
  return out;
}

Vec exact_gaussian_path(const MixtureModel& model,
                        const NoiseSchedule& schedule, const State& from,
                        double to_t) {
  if (model.size() != 1) {
    fail(ErrorKind::Unsupported, "exact path requires a single-component model");
  }
  if (schedule.kind != ScheduleKind::VarianceExploding) {
    fail(ErrorKind::Unsupported, "exact path requires the variance-exploding schedule");
  }
  if (!(to_t >= 0.0) || !(from.t >= 0.0)) fail(ErrorKind::Range, "negative time");
  if (from.x.size() != model.dim()) fail(ErrorKind::Argument, "state dimension mismatch");
  const auto& c = model.components().front();
  const double ratio = std::sqrt((c.var + to_t * to_t) / (c.var + from.t * from.t));
  Vec out(model.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = c.mean[i] + ratio * (from.x[i] - c.mean[i]);
  }
  return out;
}

}  // namespace gasolve
