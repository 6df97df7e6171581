#include "gasolve/train.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "gasolve/error.hpp"
#include "gasolve/parallel.hpp"
#include "gasolve/rng.hpp"

namespace gasolve {

Distance parse_distance(const std::string& s) {
  if (s == "l2" || s == "L2") return Distance::L2;
  if (s == "l1" || s == "L1") return Distance::L1;
  fail(ErrorKind::Config, "unknown distance '" + s + "'");
}

StudentMode parse_mode(const std::string& s) {
  if (s == "gs") return StudentMode::Gs;
  if (s == "gas") return StudentMode::Gas;
  fail(ErrorKind::Config, "unknown student mode '" + s + "'");
}

DiscInit parse_disc_init(const std::string& s) {
  if (s == "random") return DiscInit::Random;
  if (s == "zero") return DiscInit::Zero;
  fail(ErrorKind::Config, "unknown discriminator init '" + s + "'");
}

std::string to_string(Distance d) { return d == Distance::L2 ? "l2" : "l1"; }
std::string to_string(StudentMode m) { return m == StudentMode::Gs ? "gs" : "gas"; }
std::string to_string(DiscInit d) { return d == DiscInit::Random ? "random" : "zero"; }

double distill_loss(std::span<const Vec> student, std::span<const Vec> teacher,
                    Distance kind) {
  if (student.size() != teacher.size()) {
    fail(ErrorKind::Argument, "distill loss: batch sizes differ");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < student.size(); ++b) {
    if (student[b].size() != teacher[b].size()) {
      fail(ErrorKind::Argument, "distill loss: sample dimensions differ");
    }
    for (std::size_t i = 0; i < student[b].size(); ++i) {
      const double diff = student[b][i] - teacher[b][i];
      total += kind == Distance::L2 ? diff * diff : std::abs(diff);
    }
    count += student[b].size();
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

double relativistic_f(double t) noexcept {
  // -log(1 + e^{-t}) = -softplus(-t)
  return t < 0.0 ? t - std::log1p(std::exp(t)) : -std::log1p(std::exp(-t));
}

double adv_loss(const Critic& disc, std::span<const Vec> fake, std::span<const Vec> real) {
  if (fake.empty() || fake.size() != real.size()) {
    fail(ErrorKind::Argument, "adversarial loss needs equal, non-empty batches");
  }
  double total = 0.0;
  for (std::size_t b = 0; b < fake.size(); ++b) {
    total += relativistic_f(disc(fake[b]) - disc(real[b]));
  }
  return total / static_cast<double>(fake.size());
}

double adv_loss(const Discriminator& disc, std::span<const Vec> fake,
                std::span<const Vec> real) {
  return adv_loss([&](std::span<const double> x) { return disc(x); }, fake, real);
}

double grad_penalty(const CriticGradient& grad, std::span<const Vec> real,
                    std::span<const Vec> fake, double lambda1, double lambda2) {
  auto mean_sq = [&](std::span<const Vec> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& x : xs) {
      const auto g = grad(x);
      for (double v : g) s += v * v;
    }
    return s / static_cast<double>(xs.size());
  };
  return lambda1 * mean_sq(real) + lambda2 * mean_sq(fake);
}

double grad_penalty(const Discriminator& disc, std::span<const Vec> real,
                    std::span<const Vec> fake, double lambda1, double lambda2) {
  return grad_penalty([&](std::span<const double> x) { return disc.input_gradient(x); }, real,
                      fake, lambda1, lambda2);
}

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::Config, std::string(name) + " must be positive");
    }
  };
  positive(lr, "train.lr");
  positive(disc_lr, "train.disc_lr");
  positive(clip_norm, "train.clip_norm");
  auto unit = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) fail(ErrorKind::Config, std::string(name) + " must lie in (0, 1)");
  };
  unit(beta1, "train.beta1");
  unit(beta2, "train.beta2");
  unit(ema_decay, "train.ema_decay");
  if (!(adv_weight >= 0.0)) fail(ErrorKind::Config, "train.adv_weight must be non-negative");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    fail(ErrorKind::Config, "train.lambda1 and train.lambda2 must be non-negative");
  }
  if (!(weight_decay >= 0.0)) fail(ErrorKind::Config, "train.weight_decay must be non-negative");
  if (batch_size < 1) fail(ErrorKind::Config, "train.batch_size must be at least 1");
  if (steps < 1) fail(ErrorKind::Config, "student.N must be at least 1");
}

TrainState init_train_state(const NoiseSchedule& schedule, std::size_t dim,
                            const TrainConfig& cfg) {
  TrainState s;
  s.params = init_params(cfg.steps, schedule);
  const std::size_t P = s.params.size();
  s.ema.shadow = s.params.flat();
  s.adam = AdamState::zeros(P);
  s.disc = cfg.disc_init == DiscInit::Zero ? Discriminator::zeros(dim)
                                           : Discriminator::random(dim, cfg.seed);
  s.disc_adam = AdamState::zeros(s.disc.weights().size());
  return s;
}

namespace {

struct ElementLoss {
  double distill = 0.0;
  double adv = 0.0;
  Vec grad;
  Vec output;
};

ElementLoss element_loss(const MixtureModel& model, const NoiseSchedule& schedule,
                         const GsParams& params, const Vec& x_T, const Vec& teacher,
                         const Vec* real, const Discriminator* disc,
                         const TrainConfig& cfg, double inv_batch, bool with_grad) {
  Tape tape;
  const auto leaves = with_grad ? add_leaves(tape, params) : add_constants(tape, params);
  const auto trace = gs_rollout(tape, model, schedule, leaves, params.N, tape.constant(x_T));
  const Var out = trace.endpoint;
  const Var diff = out - tape.constant(teacher);
  const double scale = inv_batch / static_cast<double>(teacher.size());
  const Var per = cfg.distance == Distance::L2 ? tape.dot(diff, diff) : tape.sum(tape.abs(diff));
  const Var distill = tape.scale(per, scale);

  ElementLoss r;
  r.distill = distill.scalar();
  Var loss = distill;
  if (disc != nullptr) {
    const auto d = add_constants(tape, *disc);
    const Var gap = disc_forward(tape, d, out) - disc_forward(tape, d, tape.constant(*real));
    const Var adv = tape.scale(tape.log_sigmoid(gap), inv_batch);
    r.adv = adv.scalar();
    loss = loss + tape.scale(adv, cfg.adv_weight);
  }
  if (with_grad) r.grad = tape.backward(loss);
  r.output = out.value();
  return r;
}

struct ElementDisc {
  double adv = 0.0;
  double penalty = 0.0;
  Vec grad;
};

ElementDisc element_disc(const Discriminator& disc, const Vec& fake, const Vec& real,
                         double lambda1, double lambda2, double inv_batch,
                         bool with_grad) {
  Tape tape;
  const auto d = with_grad ? add_leaves(tape, disc) : add_constants(tape, disc);
  const Var xf = tape.constant(fake);
  const Var xr = tape.constant(real);
  const Var gap = disc_forward(tape, d, xf) - disc_forward(tape, d, xr);
  const Var adv = tape.scale(tape.log_sigmoid(gap), inv_batch);
  const Var gr = disc_input_gradient(tape, d, xr);
  const Var gf = disc_input_gradient(tape, d, xf);
  const Var pen = tape.scale(tape.dot(gr, gr), lambda1 * inv_batch) +
                  tape.scale(tape.dot(gf, gf), lambda2 * inv_batch);
  ElementDisc r;
  r.adv = adv.scalar();
  r.penalty = pen.scalar();
  if (with_grad) r.grad = tape.backward(adv - pen);
  return r;
}

}  // namespace

SolverLoss solver_loss(const MixtureModel& model, const NoiseSchedule& schedule,
                       const GsParams& params, std::span<const Vec> x_T,
                       std::span<const Vec> teacher, std::span<const Vec> real,
                       const Discriminator* disc, const TrainConfig& cfg,
                       bool with_grad) {
  params.validate();
  if (x_T.empty() || x_T.size() != teacher.size()) {
    fail(ErrorKind::Argument, "solver loss needs equal, non-empty batches");
  }
  if (disc != nullptr && real.size() != x_T.size()) {
    fail(ErrorKind::Argument, "adversarial term needs one real sample per prior draw");
  }
  const std::size_t B = x_T.size();
  const double inv_batch = 1.0 / static_cast<double>(B);
  std::vector<ElementLoss> parts(B);
  parallel_for(B, [&](std::size_t b) {
    parts[b] = element_loss(model, schedule, params, x_T[b], teacher[b],
                            disc != nullptr ? &real[b] : nullptr, disc, cfg, inv_batch,
                            with_grad);
  });

  SolverLoss out;
  if (with_grad) out.grad.assign(params.size(), 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    out.distill += parts[b].distill;
    out.adv += parts[b].adv;
    if (with_grad) {
      for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += parts[b].grad[i];
    }
    out.outputs.push_back(std::move(parts[b].output));
  }
  out.total = out.distill + (disc != nullptr ? cfg.adv_weight * out.adv : 0.0);
  return out;
}

DiscObjective disc_objective(const Discriminator& disc, std::span<const Vec> fake,
                             std::span<const Vec> real, double lambda1, double lambda2,
                             bool with_grad) {
  if (fake.empty() || fake.size() != real.size()) {
    fail(ErrorKind::Argument, "discriminator objective needs equal, non-empty batches");
  }
  const std::size_t B = fake.size();
  const double inv_batch = 1.0 / static_cast<double>(B);
  std::vector<ElementDisc> parts(B);
  parallel_for(B, [&](std::size_t b) {
    parts[b] = element_disc(disc, fake[b], real[b], lambda1, lambda2, inv_batch, with_grad);
  });
  DiscObjective out;
  if (with_grad) out.grad.assign(disc.weights().size(), 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    out.adv += parts[b].adv;
    out.penalty += parts[b].penalty;
    if (with_grad) {
      for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += parts[b].grad[i];
    }
  }
  out.objective = out.adv - out.penalty;
  return out;
}

TrainResult train(const MixtureModel& model, const NoiseSchedule& schedule,
                  const TrainConfig& cfg, const Dataset& data, TrainState state,
                  const IterationHook& hook) {
  cfg.validate();
  if (data.size() == 0) fail(ErrorKind::Argument, "training dataset is empty");
  if (data.dim != model.dim()) {
    fail(ErrorKind::Config, "dataset dimension " + std::to_string(data.dim) +
                                " does not match the model dimension " +
                                std::to_string(model.dim()));
  }
  if (state.params.N != cfg.steps) fail(ErrorKind::State, "train state has the wrong step count");
  const std::size_t P = param_count(cfg.steps);
  if (state.params.size() != P || state.adam.m.size() != P || state.ema.shadow.size() != P) {
    fail(ErrorKind::State, "optimizer state does not cover every solver parameter");
  }
  const bool gas = cfg.mode == StudentMode::Gas;
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const std::uint64_t k = state.iteration;
    std::vector<Vec> xb, tb, rb;
    auto rng = stream_rng(cfg.seed, Stream::Batch, k);
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const auto idx = pick(rng);
      xb.push_back(data.x_T[idx]);
      tb.push_back(data.target[idx]);
    }
    if (gas) {
      auto rrng = stream_rng(cfg.seed, Stream::RealBatch, k);
      for (std::size_t b = 0; b < cfg.batch_size; ++b) rb.push_back(data.target[pick(rrng)]);
    }

    auto loss = solver_loss(model, schedule, state.params, xb, tb, rb,
                            gas ? &state.disc : nullptr, cfg, true);
    MetricsRow row;
    row.iteration = k;
    row.distill_loss = loss.distill;
    row.adv_loss = loss.adv;

    auto abort = [&](const std::string& what) {
      std::ostringstream os;
      os << "non-finite " << what << " at iteration " << k;
      row.wallclock_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      result.log.push_back(row);
      result.aborted = os.str();
    };
    bool finite = std::isfinite(loss.total);
    for (double g : loss.grad) finite = finite && std::isfinite(g);
    if (!finite) {
      abort("solver loss");
      break;
    }

    row.grad_norm_pre_clip = clip_grad_norm(loss.grad, cfg.clip_norm);
    Vec flat = state.params.flat();
    adam_step(flat, loss.grad, state.adam, cfg.solver_adam());
    state.params = GsParams::from_flat(cfg.steps, flat);
    ema_update(state.ema, flat, cfg.ema_decay);

    if (gas) {
      auto obj = disc_objective(state.disc, loss.outputs, rb, cfg.lambda1, cfg.lambda2, true);
      row.disc_objective = obj.objective;
      bool ok = std::isfinite(obj.objective);
      for (double& g : obj.grad) {
        ok = ok && std::isfinite(g);
        g = -g;  // ascent
      }
      if (!ok) {
        abort("discriminator objective");
        break;
      }
      adam_step(state.disc.weights(), obj.grad, state.disc_adam, cfg.disc_adam());
    }

    state.iteration += 1;
    row.wallclock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    result.log.push_back(row);
    if (hook) hook(state, row);
  }
  result.state = std::move(state);
  return result;
}

TrainResult train_gs(const MixtureModel& model, const NoiseSchedule& schedule,
                     TrainConfig cfg, const Dataset& data, const IterationHook& hook) {
  cfg.mode = StudentMode::Gs;
  return train(model, schedule, cfg, data, init_train_state(schedule, model.dim(), cfg), hook);
}

TrainResult train_gas(const MixtureModel& model, const NoiseSchedule& schedule,
                      TrainConfig cfg, const Dataset& data, const IterationHook& hook) {
  cfg.mode = StudentMode::Gas;
  return train(model, schedule, cfg, data, init_train_state(schedule, model.dim(), cfg), hook);
}

}  // namespace gasolve
