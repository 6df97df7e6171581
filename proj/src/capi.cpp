#include "gasolve/gasolve.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "gasolve/commands.hpp"
#include "gasolve/error.hpp"

struct gas_config {
  gasolve::Config cfg;
};

struct gas_checkpoint {
  gasolve::Checkpoint ckpt;
};

namespace {

thread_local std::string last_error;

gas_status code_of(gasolve::ErrorKind kind) {
  using gasolve::ErrorKind;
  switch (kind) {
    case ErrorKind::Argument: return GAS_ERR_ARGUMENT;
    case ErrorKind::Range: return GAS_ERR_RANGE;
    case ErrorKind::State: return GAS_ERR_STATE;
    case ErrorKind::Unsupported: return GAS_ERR_UNSUPPORTED;
    case ErrorKind::Infeasible: return GAS_ERR_INFEASIBLE;
    case ErrorKind::Degenerate: return GAS_ERR_DEGENERATE;
    case ErrorKind::Config: return GAS_ERR_CONFIG;
    case ErrorKind::Io: return GAS_ERR_IO;
    case ErrorKind::Version: return GAS_ERR_VERSION;
    case ErrorKind::Length: return GAS_ERR_LENGTH;
    case ErrorKind::UnknownArray: return GAS_ERR_UNKNOWN_ARRAY;
    case ErrorKind::Parse: return GAS_ERR_PARSE;
    case ErrorKind::NotFinite: return GAS_ERR_NOT_FINITE;
  }
  return GAS_ERR_INTERNAL;
}

template <class Fn>
gas_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return GAS_OK;
  } catch (const gasolve::Error& e) {
    last_error = e.what();
    return code_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GAS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GAS_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return GAS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) gasolve::fail(gasolve::ErrorKind::Argument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* gas_version(void) { return "1.0.0"; }

const char* gas_last_error(void) { return last_error.c_str(); }

const char* gas_status_name(gas_status status) {
  switch (status) {
    case GAS_OK: return "ok";
    case GAS_ERR_ARGUMENT: return "argument";
    case GAS_ERR_RANGE: return "range";
    case GAS_ERR_STATE: return "state";
    case GAS_ERR_UNSUPPORTED: return "unsupported";
    case GAS_ERR_INFEASIBLE: return "infeasible";
    case GAS_ERR_DEGENERATE: return "degenerate";
    case GAS_ERR_CONFIG: return "config";
    case GAS_ERR_IO: return "io";
    case GAS_ERR_VERSION: return "version";
    case GAS_ERR_LENGTH: return "length";
    case GAS_ERR_UNKNOWN_ARRAY: return "unknown-array";
    case GAS_ERR_PARSE: return "parse";
    case GAS_ERR_NOT_FINITE: return "not-finite";
    case GAS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

size_t gas_param_count(size_t steps) { return gasolve::param_count(steps); }

gas_status gas_config_new(gas_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gas_config{};
  });
}

gas_status gas_config_parse(const char* text, gas_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new gas_config{gasolve::Config::parse(text)};
  });
}

gas_status gas_config_load(const char* path, gas_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gas_config{gasolve::Config::load(path)};
  });
}

gas_status gas_config_set(gas_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

gas_status gas_config_get(const gas_config* cfg, const char* key, char* buf, size_t cap,
                          size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    const auto value = cfg->cfg.get(key);
    if (needed != nullptr) *needed = value.size() + 1;
    if (buf == nullptr || cap < value.size() + 1) {
      gasolve::fail(gasolve::ErrorKind::Length,
                    "buffer too small for the value of '" + std::string(key) + "'");
    }
    std::memcpy(buf, value.c_str(), value.size() + 1);
  });
}

void gas_config_free(gas_config* cfg) { delete cfg; }

gas_status gas_cmd_teacher(const gas_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "config");
    require(out_dir, "out_dir");
    gasolve::cmd_teacher(cfg->cfg, out_dir);
  });
}

gas_status gas_cmd_train(const gas_config* cfg, const char* dataset, const char* out_dir,
                         int* aborted) {
  return guarded([&] {
    require(cfg, "config");
    require(dataset, "dataset");
    require(out_dir, "out_dir");
    const auto out = gasolve::cmd_train(cfg->cfg, dataset, out_dir);
    if (out.result.aborted) last_error = *out.result.aborted;
    if (aborted != nullptr) *aborted = out.result.aborted ? 1 : 0;
  });
}

gas_status gas_cmd_eval(const gas_config* cfg, const char* checkpoint, const char* val,
                        const char* out_dir, gas_eval_result* result) {
  return guarded([&] {
    require(cfg, "config");
    require(checkpoint, "checkpoint");
    require(val, "val");
    require(out_dir, "out_dir");
    const auto row = gasolve::cmd_eval(cfg->cfg, checkpoint, val, out_dir);
    if (result != nullptr) {
      *result = gas_eval_result{row.iteration,       row.steps,
                                row.endpoint_error,  row.energy_distance,
                                row.w2_gaussian,     row.base_endpoint_error};
    }
  });
}

gas_status gas_cmd_order_check(const gas_config* cfg, const char* out_dir, double orders[3]) {
  return guarded([&] {
    require(cfg, "config");
    require(out_dir, "out_dir");
    const auto reports = gasolve::cmd_order_check(cfg->cfg, out_dir);
    if (orders != nullptr) {
      for (std::size_t i = 0; i < 3 && i < reports.size(); ++i) {
        orders[i] = reports[i].estimate.order;
      }
    }
  });
}

gas_status gas_cmd_sweep(const gas_config* cfg, const char* dataset, const char* val,
                         const char* out_dir) {
  return guarded([&] {
    require(cfg, "config");
    require(dataset, "dataset");
    require(val, "val");
    require(out_dir, "out_dir");
    gasolve::cmd_sweep(cfg->cfg, dataset, val, out_dir);
  });
}

gas_status gas_checkpoint_load(const char* path, gas_checkpoint** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gas_checkpoint{gasolve::load_checkpoint(path)};
  });
}

gas_status gas_checkpoint_save(const gas_checkpoint* ckpt, const char* path) {
  return guarded([&] {
    require(ckpt, "checkpoint");
    require(path, "path");
    gasolve::save_checkpoint(path, ckpt->ckpt);
  });
}

uint64_t gas_checkpoint_iteration(const gas_checkpoint* ckpt) {
  return ckpt != nullptr ? ckpt->ckpt.state.iteration : 0;
}

size_t gas_checkpoint_steps(const gas_checkpoint* ckpt) {
  return ckpt != nullptr ? ckpt->ckpt.state.params.N : 0;
}

gas_status gas_checkpoint_params(const gas_checkpoint* ckpt, int ema, double* out, size_t cap) {
  return guarded([&] {
    require(ckpt, "checkpoint");
    require(out, "out");
    const auto flat = ema != 0 ? ckpt->ckpt.state.ema.shadow : ckpt->ckpt.state.params.flat();
    if (cap < flat.size()) {
      gasolve::fail(gasolve::ErrorKind::Length,
                    "output holds " + std::to_string(cap) + " values, need " +
                        std::to_string(flat.size()));
    }
    std::memcpy(out, flat.data(), flat.size() * sizeof(double));
  });
}

void gas_checkpoint_free(gas_checkpoint* ckpt) { delete ckpt; }

}  // extern "C"
