#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gasolve/config.hpp"
#include "gasolve/io.hpp"
#include "gasolve/metrics.hpp"
#include "gasolve/rng.hpp"
#include "gasolve/solvers.hpp"
#include "gasolve/train.hpp"

namespace gasolve {

struct Problem {
  NoiseSchedule schedule;
  MixtureModel model;
};

/// Reads `mixture.<k>.weight|mean|var` for k = 0, 1, ... (contiguous).
MixtureModel mixture_from_config(const Config& cfg);
void mixture_to_config(const MixtureModel& model, Config& cfg);

Problem problem_from_config(const Config& cfg);
TeacherConfig teacher_from_config(const Config& cfg);
TrainConfig train_from_config(const Config& cfg);

/// n rows; row i draws x_T ~ N(0, T^2 I) from stream (stream, i) of `seed`
/// and pairs it with the teacher output.
Dataset generate_dataset(const Problem& problem, const TeacherConfig& teacher,
                         std::size_t n, std::uint64_t seed, Stream stream);

std::string teacher_header(const TeacherConfig& teacher);

struct TeacherOutput {
  std::filesystem::path train;
  std::filesystem::path val;
};

/// Writes train.csv and val.csv into out_dir.
TeacherOutput cmd_teacher(const Config& cfg, const std::filesystem::path& out_dir);

struct TrainOutput {
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;
  TrainResult result;
};

Checkpoint make_checkpoint(const Config& cfg, const TrainConfig& train_cfg, std::size_t dim,
                           const TrainState& state);

/// Trains per `student.mode` on the dataset; writes checkpoint.txt and
/// metrics.csv into out_dir. result.aborted is set on a non-finite loss.
TrainOutput cmd_train(const Config& cfg, const std::filesystem::path& dataset,
                      const std::filesystem::path& out_dir);

struct EvalRow {
  std::uint64_t iteration = 0;
  std::size_t steps = 0;
  double endpoint_error = 0.0;
  double energy_distance = 0.0;
  double w2_gaussian = 0.0;  // NaN unless the data is a single Gaussian
  double base_endpoint_error = 0.0;
};

/// Metrics of a student on validation pairs. The base error is that of the
/// untrained (time-uniform, zero-correction) solver with the same N.
EvalRow evaluate(const Problem& problem, const GsParams& params, const Dataset& val,
                 std::uint64_t iteration);

std::string serialize_eval(const std::vector<EvalRow>& rows);

/// Evaluates the EMA parameters of a checkpoint; writes eval.csv.
EvalRow cmd_eval(const Config& cfg, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& val, const std::filesystem::path& out_dir);

struct OrderReport {
  OrderSolver solver;
  OrderEstimate estimate;
};

std::string to_string(OrderSolver solver);

/// Convergence orders of Euler, DPM-Solver++(3M) and RK4 from
/// x_T = order.x (broadcast); writes order.csv.
std::vector<OrderReport> cmd_order_check(const Config& cfg, const std::filesystem::path& out_dir);

struct SweepRow {
  double adv_weight = 0.0;
  EvalRow eval;
  double final_disc_objective = 0.0;
  bool aborted = false;
};

/// GAS training for every weight in sweep.adv_weights; writes sweep.csv.
std::vector<SweepRow> cmd_sweep(const Config& cfg, const std::filesystem::path& dataset,
                                const std::filesystem::path& val,
                                const std::filesystem::path& out_dir);

}  // namespace gasolve
