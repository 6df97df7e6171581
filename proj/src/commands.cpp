#include "gasolve/commands.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "gasolve/error.hpp"
#include "gasolve/gs.hpp"
#include "gasolve/parallel.hpp"

namespace gasolve {

namespace fs = std::filesystem;

MixtureModel mixture_from_config(const Config& cfg) {
  std::size_t count = 0;
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("mixture.", 0) != 0) continue;
    const auto dot = key.find('.', 8);
    count = std::max<std::size_t>(count, std::stoul(key.substr(8, dot - 8)) + 1);
  }
  if (count == 0) fail(ErrorKind::Config, "missing required key 'mixture.0.weight'");
  std::vector<MixtureComponent> comps;
  for (std::size_t k = 0; k < count; ++k) {
    const std::string p = "mixture." + std::to_string(k) + ".";
    for (const char* f : {"weight", "mean", "var"}) {
      if (!cfg.has(p + f)) fail(ErrorKind::Config, "missing required key '" + p + f + "'");
    }
    MixtureComponent c;
    c.weight = cfg.get_double(p + "weight");
    c.mean = cfg.get_doubles(p + "mean");
    c.var = cfg.get_double(p + "var");
    comps.push_back(std::move(c));
  }
  return MixtureModel(std::move(comps));
}

void mixture_to_config(const MixtureModel& model, Config& cfg) {
  const auto& comps = model.components();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const std::string p = "mixture." + std::to_string(k) + ".";
    cfg.set(p + "weight", format_double(comps[k].weight));
    cfg.set(p + "mean", format_doubles(comps[k].mean));
    cfg.set(p + "var", format_double(comps[k].var));
  }
}

Problem problem_from_config(const Config& cfg) {
  const auto kind = cfg.get("problem.schedule");
  if (kind != "ve") {
    fail(ErrorKind::Config, "key 'problem.schedule': unsupported schedule '" + kind + "'");
  }
  Problem p;
  p.schedule = NoiseSchedule::variance_exploding(cfg.get_double("problem.T"),
                                                 cfg.get_double("problem.delta"));
  p.model = mixture_from_config(cfg);
  return p;
}

TeacherConfig teacher_from_config(const Config& cfg) {
  TeacherConfig t;
  t.kind = parse_teacher_kind(cfg.get("teacher.kind"));
  t.nfe = cfg.get_size("teacher.nfe");
  t.grid = parse_grid_kind(cfg.get("teacher.grid"));
  t.rho = cfg.get_double("teacher.rho");
  if (t.nfe == 0) fail(ErrorKind::Config, "key 'teacher.nfe' must be positive");
  return t;
}

TrainConfig train_from_config(const Config& cfg) {
  cfg.require("student.N");
  TrainConfig t;
  t.mode = parse_mode(cfg.get("student.mode"));
  t.steps = cfg.get_size("student.N");
  t.lr = cfg.get_double("train.lr");
  t.disc_lr = cfg.get_double("train.disc_lr");
  t.beta1 = cfg.get_double("train.beta1");
  t.beta2 = cfg.get_double("train.beta2");
  t.weight_decay = cfg.get_double("train.weight_decay");
  t.ema_decay = cfg.get_double("train.ema_decay");
  t.clip_norm = cfg.get_double("train.clip_norm");
  t.adv_weight = cfg.get_double("train.adv_weight");
  t.lambda1 = cfg.get_double("train.lambda1");
  t.lambda2 = cfg.get_double("train.lambda2");
  t.batch_size = cfg.get_size("train.batch_size");
  t.iterations = cfg.get_size("train.iterations");
  t.seed = cfg.get_u64("seed");
  t.distance = parse_distance(cfg.get("train.distance"));
  t.disc_init = parse_disc_init(cfg.get("train.disc_init"));
  t.validate();
  return t;
}

Dataset generate_dataset(const Problem& problem, const TeacherConfig& teacher,
                         std::size_t n, std::uint64_t seed, Stream stream) {
  const std::size_t d = problem.model.dim();
  Dataset data;
  data.dim = d;
  data.seed = seed;
  data.x_T.resize(n);
  data.target.resize(n);
  parallel_for(n, [&](std::size_t i) {
    auto rng = stream_rng(seed, stream, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec x(d);
    for (auto& v : x) v = problem.schedule.T * normal(rng);
    data.target[i] = teacher_rollout(problem.model, problem.schedule, teacher, x);
    data.x_T[i] = std::move(x);
  });
  return data;
}

std::string teacher_header(const TeacherConfig& teacher) {
  return "teacher=" + to_string(teacher.kind) + " nfe=" + std::to_string(teacher.nfe) +
         " grid=" + to_string(teacher.grid) + " rho=" + format_double(teacher.rho);
}

TeacherOutput cmd_teacher(const Config& cfg, const fs::path& out_dir) {
  const auto problem = problem_from_config(cfg);
  const auto teacher = teacher_from_config(cfg);
  const auto seed = cfg.get_u64("seed");
  // GAS trains on a larger pool than GS unless the size is given.
  const auto train_n = cfg.has("data.train_size") ? cfg.get_size("data.train_size")
                       : parse_mode(cfg.get("student.mode")) == StudentMode::Gas ? 5000
                                                                                 : 1400;
  const auto val_n = cfg.get_size("data.val_size");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  TeacherOutput out{out_dir / "train.csv", out_dir / "val.csv"};
  const auto extra = teacher_header(teacher);
  write_dataset(out.train,
                generate_dataset(problem, teacher, train_n, seed, Stream::PriorTrain), extra);
  write_dataset(out.val,
                generate_dataset(problem, teacher, val_n, seed, Stream::PriorValidation), extra);
  return out;
}

Checkpoint make_checkpoint(const Config& cfg, const TrainConfig& train_cfg, std::size_t dim,
                           const TrainState& state) {
  Checkpoint ckpt;
  const auto echo = cfg.echo();
  std::size_t start = 0;
  while (start < echo.size()) {
    const auto nl = echo.find('\n', start);
    ckpt.config.push_back(echo.substr(start, nl - start));
    start = nl + 1;
  }
  ckpt.mode = train_cfg.mode;
  ckpt.dim = dim;
  ckpt.state = state;
  return ckpt;
}

TrainOutput cmd_train(const Config& cfg, const fs::path& dataset, const fs::path& out_dir) {
  const auto problem = problem_from_config(cfg);
  const auto tcfg = train_from_config(cfg);
  const auto data = read_dataset(dataset);
  if (data.dim != problem.model.dim()) {
    fail(ErrorKind::Config, "dataset " + dataset.string() + " has dimension " +
                                std::to_string(data.dim) + " but the mixture has dimension " +
                                std::to_string(problem.model.dim()));
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  TrainOutput out;
  out.checkpoint = out_dir / "checkpoint.txt";
  out.metrics = out_dir / "metrics.csv";
  out.result = train(problem.model, problem.schedule, tcfg, data,
                     init_train_state(problem.schedule, problem.model.dim(), tcfg));
  save_checkpoint(out.checkpoint,
                  make_checkpoint(cfg, tcfg, problem.model.dim(), out.result.state));
  write_text(out.metrics, serialize_metrics(out.result.log, out.result.aborted.value_or("")));
  return out;
}

EvalRow evaluate(const Problem& problem, const GsParams& params, const Dataset& val,
                 std::uint64_t iteration) {
  if (val.dim != problem.model.dim()) {
    fail(ErrorKind::Config, "validation dimension " + std::to_string(val.dim) +
                                " does not match the mixture dimension " +
                                std::to_string(problem.model.dim()));
  }
  if (val.size() == 0) fail(ErrorKind::Argument, "validation set is empty");
  params.validate();
  const auto base = init_params(params.N, problem.schedule);
  std::vector<Vec> student(val.size()), untrained(val.size());
  parallel_for(val.size(), [&](std::size_t i) {
    student[i] = gs_rollout(problem.model, problem.schedule, params, val.x_T[i]);
    untrained[i] = gs_rollout(problem.model, problem.schedule, base, val.x_T[i]);
  });
  EvalRow row;
  row.iteration = iteration;
  row.steps = params.N;
  row.endpoint_error = endpoint_error(student, val.target);
  row.energy_distance = energy_distance(student, val.target);
  row.base_endpoint_error = endpoint_error(untrained, val.target);
  row.w2_gaussian = std::numeric_limits<double>::quiet_NaN();
  if (problem.model.size() == 1) {
    // The exact flow pushes N(0, T^2 I) onto the data marginal at delta.
    const auto& c = problem.model.components().front();
    const double a = problem.schedule.alpha(problem.schedule.delta);
    const double s = problem.schedule.sigma(problem.schedule.delta);
    Vec mean(c.mean.size()), var(c.mean.size(), a * a * c.var + s * s);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = a * c.mean[i];
    const auto fit = fit_diag_gaussian(student);
    row.w2_gaussian = w2_gaussian(fit.mean, fit.var, mean, var);
  }
  return row;
}

std::string serialize_eval(const std::vector<EvalRow>& rows) {
  std::string out = "iteration,steps,endpoint_error,energy_distance,w2_gaussian,base_endpoint_error\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration) + ',' + std::to_string(r.steps) + ',' +
           format_double(r.endpoint_error) + ',' + format_double(r.energy_distance) + ',' +
           format_double(r.w2_gaussian) + ',' + format_double(r.base_endpoint_error) + '\n';
  }
  return out;
}

EvalRow cmd_eval(const Config& cfg, const fs::path& checkpoint, const fs::path& val,
                 const fs::path& out_dir) {
  const auto problem = problem_from_config(cfg);
  const auto ckpt = load_checkpoint(checkpoint);
  if (ckpt.dim != problem.model.dim()) {
    fail(ErrorKind::Config, "checkpoint dimension " + std::to_string(ckpt.dim) +
                                " does not match the mixture dimension " +
                                std::to_string(problem.model.dim()));
  }
  const auto data = read_dataset(val);
  const auto row = evaluate(problem, ckpt.state.ema_params(), data, ckpt.state.iteration);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_text(out_dir / "eval.csv", serialize_eval({row}));
  return row;
}

std::string to_string(OrderSolver solver) {
  switch (solver) {
    case OrderSolver::Euler: return "euler";
    case OrderSolver::Dpmpp3m: return "dpmpp3m";
    case OrderSolver::Rk4: return "rk4";
  }
  return "unknown";
}

std::vector<OrderReport> cmd_order_check(const Config& cfg, const fs::path& out_dir) {
  const auto problem = problem_from_config(cfg);
  const auto steps = cfg.get_sizes("order.steps");
  const auto xs = cfg.get_doubles("order.x");
  const std::size_t d = problem.model.dim();
  Vec x_T;
  if (xs.size() == 1) {
    x_T.assign(d, xs.front());
  } else if (xs.size() == d) {
    x_T = xs;
  } else {
    fail(ErrorKind::Config, "key 'order.x' needs 1 or " + std::to_string(d) + " values");
  }
  std::vector<OrderReport> reports;
  std::string csv = "solver,steps,error,order\n";
  for (auto solver : {OrderSolver::Euler, OrderSolver::Dpmpp3m, OrderSolver::Rk4}) {
    auto est = convergence_order(solver, problem.model, problem.schedule, x_T, steps);
    for (std::size_t i = 0; i < est.steps.size(); ++i) {
      csv += to_string(solver) + ',' + std::to_string(est.steps[i]) + ',' +
             format_double(est.errors[i]) + ',' + format_double(est.order) + '\n';
    }
    reports.push_back({solver, std::move(est)});
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_text(out_dir / "order.csv", csv);
  return reports;
}

std::vector<SweepRow> cmd_sweep(const Config& cfg, const fs::path& dataset, const fs::path& val,
                                const fs::path& out_dir) {
  const auto problem = problem_from_config(cfg);
  auto tcfg = train_from_config(cfg);
  tcfg.mode = StudentMode::Gas;
  const auto weights = cfg.get_doubles("sweep.adv_weights");
  if (weights.empty()) fail(ErrorKind::Config, "key 'sweep.adv_weights' is empty");
  const auto train_data = read_dataset(dataset);
  const auto val_data = read_dataset(val);
  std::vector<SweepRow> rows;
  std::string csv =
      "adv_weight,iteration,steps,endpoint_error,energy_distance,final_disc_objective,aborted\n";
  for (double w : weights) {
    auto c = tcfg;
    c.adv_weight = w;
    const auto res = train(problem.model, problem.schedule, c, train_data,
                           init_train_state(problem.schedule, problem.model.dim(), c));
    SweepRow row;
    row.adv_weight = w;
    row.aborted = res.aborted.has_value();
    row.final_disc_objective = res.log.empty() ? 0.0 : res.log.back().disc_objective;
    if (!row.aborted) {
      row.eval = evaluate(problem, res.state.ema_params(), val_data, res.state.iteration);
    } else {
      row.eval.iteration = res.state.iteration;
      row.eval.steps = c.steps;
      row.eval.endpoint_error = row.eval.energy_distance = std::numeric_limits<double>::quiet_NaN();
    }
    csv += format_double(w) + ',' + std::to_string(row.eval.iteration) + ',' +
           std::to_string(row.eval.steps) + ',' + format_double(row.eval.endpoint_error) + ',' +
           format_double(row.eval.energy_distance) + ',' +
           format_double(row.final_disc_objective) + ',' + (row.aborted ? "1" : "0") + '\n';
    rows.push_back(row);
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_text(out_dir / "sweep.csv", csv);
  return rows;
}

}  // namespace gasolve
