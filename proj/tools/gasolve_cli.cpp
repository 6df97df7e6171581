// Command-line front end over the gasolve C interface.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "gasolve/gasolve.h"

namespace {

int report(gas_status status, const char* what) {
  if (status == GAS_OK) return 0;
  std::fprintf(stderr, "gasolve %s: %s error: %s\n", what, gas_status_name(status),
               gas_last_error());
  return status == GAS_ERR_CONFIG ? 2 : 1;
}

struct Common {
  std::string config;
  std::string out;  // empty: take output.dir from the config
  std::string seed;
  std::string mode;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Configuration file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory (overrides output.dir)");
  cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
  cmd->add_option("--mode", c.mode, "Student mode (overrides the config)")
      ->check(CLI::IsMember({"gs", "gas"}));
}

// Loads the config and applies command-line overrides.
gas_status load_config(Common& c, gas_config** cfg) {
  if (auto s = gas_config_load(c.config.c_str(), cfg); s != GAS_OK) return s;
  if (c.out.empty()) {
    char buf[4096];
    size_t needed = 0;
    if (auto s = gas_config_get(*cfg, "output.dir", buf, sizeof buf, &needed); s != GAS_OK) {
      return s;
    }
    c.out = buf;
  }
  if (!c.seed.empty()) {
    if (auto s = gas_config_set(*cfg, "seed", c.seed.c_str()); s != GAS_OK) return s;
  }
  if (!c.mode.empty()) {
    if (auto s = gas_config_set(*cfg, "student.mode", c.mode.c_str()); s != GAS_OK) return s;
  }
  return GAS_OK;
}

std::string default_path(const std::string& given, const std::string& out, const char* name) {
  return given.empty() ? (std::filesystem::path(out) / name).string() : given;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized multistep ODE solvers for diffusion sampling, distilled from a "
               "high-NFE teacher"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gas_version());

  Common teacher_opts, train_opts, eval_opts, order_opts, sweep_opts;
  std::string train_dataset, eval_ckpt, eval_val, sweep_dataset, sweep_val;

  auto* teacher = app.add_subcommand("teacher", "Generate paired teacher datasets");
  add_common(teacher, teacher_opts);

  auto* train = app.add_subcommand("train", "Train a GS/GAS student");
  add_common(train, train_opts);
  train->add_option("--dataset", train_dataset, "Training pairs (default <out>/train.csv)");

  auto* eval = app.add_subcommand("eval", "Evaluate the EMA parameters of a checkpoint");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint (default <out>/checkpoint.txt)");
  eval->add_option("--val", eval_val, "Validation pairs (default <out>/val.csv)");

  auto* order = app.add_subcommand("order-check", "Measure empirical solver orders");
  add_common(order, order_opts);

  auto* sweep = app.add_subcommand("sweep", "Train GAS over a grid of adversarial weights");
  add_common(sweep, sweep_opts);
  sweep->add_option("--dataset", sweep_dataset, "Training pairs (default <out>/train.csv)");
  sweep->add_option("--val", sweep_val, "Validation pairs (default <out>/val.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the configuration-error exit code.
    return app.exit(e) == 0 ? 0 : 2;
  }

  gas_config* cfg = nullptr;
  int rc = 0;
  if (teacher->parsed()) {
    rc = report(load_config(teacher_opts, &cfg), "teacher");
    if (rc == 0) rc = report(gas_cmd_teacher(cfg, teacher_opts.out.c_str()), "teacher");
    if (rc == 0) std::printf("wrote %s/train.csv and %s/val.csv\n", teacher_opts.out.c_str(),
                             teacher_opts.out.c_str());
  } else if (train->parsed()) {
    rc = report(load_config(train_opts, &cfg), "train");
    int aborted = 0;
    const auto data = default_path(train_dataset, train_opts.out, "train.csv");
    if (rc == 0) {
      rc = report(gas_cmd_train(cfg, data.c_str(), train_opts.out.c_str(), &aborted), "train");
    }
    if (rc == 0 && aborted != 0) {
      std::fprintf(stderr, "gasolve train: aborted: %s\n", gas_last_error());
      rc = 3;
    } else if (rc == 0) {
      std::printf("wrote %s/checkpoint.txt and %s/metrics.csv\n", train_opts.out.c_str(),
                  train_opts.out.c_str());
    }
  } else if (eval->parsed()) {
    rc = report(load_config(eval_opts, &cfg), "eval");
    gas_eval_result r{};
    const auto ckpt = default_path(eval_ckpt, eval_opts.out, "checkpoint.txt");
    const auto val = default_path(eval_val, eval_opts.out, "val.csv");
    if (rc == 0) {
      rc = report(gas_cmd_eval(cfg, ckpt.c_str(), val.c_str(), eval_opts.out.c_str(), &r),
                  "eval");
    }
    if (rc == 0) {
      std::printf("steps=%zu endpoint_error=%.6g base_endpoint_error=%.6g energy_distance=%.6g",
                  r.steps, r.endpoint_error, r.base_endpoint_error, r.energy_distance);
      if (!std::isnan(r.w2_gaussian)) std::printf(" w2_gaussian=%.6g", r.w2_gaussian);
      std::printf("\n");
    }
  } else if (order->parsed()) {
    rc = report(load_config(order_opts, &cfg), "order-check");
    double orders[3] = {0, 0, 0};
    if (rc == 0) {
      rc = report(gas_cmd_order_check(cfg, order_opts.out.c_str(), orders), "order-check");
    }
    if (rc == 0) {
      std::printf("euler %.4f\ndpmpp3m %.4f\nrk4 %.4f\n", orders[0], orders[1], orders[2]);
    }
  } else if (sweep->parsed()) {
    rc = report(load_config(sweep_opts, &cfg), "sweep");
    const auto data = default_path(sweep_dataset, sweep_opts.out, "train.csv");
    const auto val = default_path(sweep_val, sweep_opts.out, "val.csv");
    if (rc == 0) {
      rc = report(gas_cmd_sweep(cfg, data.c_str(), val.c_str(), sweep_opts.out.c_str()), "sweep");
    }
    if (rc == 0) std::printf("wrote %s/sweep.csv\n", sweep_opts.out.c_str());
  }
  gas_config_free(cfg);
  return rc;
}
