#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gasolve/diffusion.hpp"
#include "gasolve/discriminator.hpp"
#include "gasolve/gs.hpp"
#include "gasolve/optim.hpp"

namespace gasolve {

enum class Distance { L2, L1 };
enum class StudentMode { Gs, Gas };
enum class DiscInit { Random, Zero };

Distance parse_distance(const std::string& s);
StudentMode parse_mode(const std::string& s);
DiscInit parse_disc_init(const std::string& s);
std::string to_string(Distance d);
std::string to_string(StudentMode m);
std::string to_string(DiscInit d);

/// Mean over every element of |diff| (L1) or diff^2 (L2).
double distill_loss(std::span<const Vec> student, std::span<const Vec> teacher,
                    Distance kind);

/// f(t) = -log(1 + e^{-t}).
double relativistic_f(double t) noexcept;

using Critic = std::function<double(std::span<const double>)>;
using CriticGradient = std::function<Vec(std::span<const double>)>;

/// Mean of f(D(fake_i) - D(real_i)) over the paired draws.
double adv_loss(const Critic& disc, std::span<const Vec> fake, std::span<const Vec> real);
double adv_loss(const Discriminator& disc, std::span<const Vec> fake,
                std::span<const Vec> real);

/// lambda1 * mean |grad D(real)|^2 + lambda2 * mean |grad D(fake)|^2
double grad_penalty(const CriticGradient& grad, std::span<const Vec> real,
                    std::span<const Vec> fake, double lambda1, double lambda2);
double grad_penalty(const Discriminator& disc, std::span<const Vec> real,
                    std::span<const Vec> fake, double lambda1, double lambda2);

struct TrainConfig {
  StudentMode mode = StudentMode::Gs;
  std::size_t steps = 4;  // student NFE
  double lr = 1e-3;
  double disc_lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.0;
  double ema_decay = 0.999;
  double clip_norm = 1.0;
  double adv_weight = 1.0;
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  std::size_t batch_size = 24;
  std::size_t iterations = 2000;
  std::uint64_t seed = 0;
  Distance distance = Distance::L2;
  DiscInit disc_init = DiscInit::Random;

  void validate() const;
  AdamConfig solver_adam() const { return {lr, beta1, beta2, 1e-8, weight_decay}; }
  AdamConfig disc_adam() const { return {disc_lr, beta1, beta2, 1e-8, weight_decay}; }
};

/// Paired prior draws and teacher outputs.
struct Dataset {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<Vec> x_T;
  std::vector<Vec> target;

  std::size_t size() const noexcept { return x_T.size(); }
};

struct MetricsRow {
  std::uint64_t iteration = 0;
  double distill_loss = 0.0;
  double adv_loss = 0.0;
  double disc_objective = 0.0;
  double grad_norm_pre_clip = 0.0;
  double wallclock_ms = 0.0;
};

struct TrainState {
  GsParams params;
  EmaState ema;
  AdamState adam;
  Discriminator disc;
  AdamState disc_adam;
  std::uint64_t iteration = 0;

  GsParams ema_params() const { return GsParams::from_flat(params.N, ema.shadow); }
};

TrainState init_train_state(const NoiseSchedule& schedule, std::size_t dim,
                            const TrainConfig& cfg);

struct SolverLoss {
  double distill = 0.0;
  double adv = 0.0;
  double total = 0.0;
  Vec grad;  // canonical solver-parameter order
  std::vector<Vec> outputs;
};

/// distill + w_adv * adv on one batch. The adversarial term is included
/// when `disc` is non-null; `real` pairs with `x_T` element by element.
SolverLoss solver_loss(const MixtureModel& model, const NoiseSchedule& schedule,
                       const GsParams& params, std::span<const Vec> x_T,
                       std::span<const Vec> teacher, std::span<const Vec> real,
                       const Discriminator* disc, const TrainConfig& cfg,
                       bool with_grad);

struct DiscObjective {
  double adv = 0.0;
  double penalty = 0.0;
  double objective = 0.0;  // adv - penalty; the discriminator ascends it
  Vec grad;                // d objective / d weights
};

DiscObjective disc_objective(const Discriminator& disc, std::span<const Vec> fake,
                             std::span<const Vec> real, double lambda1, double lambda2,
                             bool with_grad);

struct TrainResult {
  TrainState state;
  std::vector<MetricsRow> log;
  std::optional<std::string> aborted;  // diagnostic when a loss went non-finite
};

using IterationHook = std::function<void(const TrainState&, const MetricsRow&)>;

/// Runs cfg.iterations updates from `state`: sample batch, rollout on a
/// tape, loss, backward, clip, Adam, EMA; in GAS mode one discriminator
/// ascent step follows each solver step.
TrainResult train(const MixtureModel& model, const NoiseSchedule& schedule,
                  const TrainConfig& cfg, const Dataset& data, TrainState state,
                  const IterationHook& hook = {});

TrainResult train_gs(const MixtureModel& model, const NoiseSchedule& schedule,
                     TrainConfig cfg, const Dataset& data, const IterationHook& hook = {});
TrainResult train_gas(const MixtureModel& model, const NoiseSchedule& schedule,
                      TrainConfig cfg, const Dataset& data, const IterationHook& hook = {});

}  // namespace gasolve
