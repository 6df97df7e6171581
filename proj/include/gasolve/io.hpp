#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gasolve/train.hpp"

namespace gasolve {

inline constexpr int kDatasetVersion = 1;
inline constexpr int kCheckpointVersion = 1;

/// Dataset file: `# gasolve-dataset v1 d=<d> n=<rows> seed=<s> ...` followed
/// by CSV rows `xT_1..xT_d, x0_1..x0_d` at 17 significant digits. Extra
/// `key=value` header tokens (teacher, grid, ...) are kept verbatim.
std::string serialize_dataset(const Dataset& data, const std::string& header_extra = {});
Dataset parse_dataset(std::string_view text);
void write_dataset(const std::filesystem::path& path, const Dataset& data,
                   const std::string& header_extra = {});
Dataset read_dataset(const std::filesystem::path& path);

/// A training snapshot. Discriminator weights and their optimizer state
/// are stored only for GAS checkpoints.
struct Checkpoint {
  int version = kCheckpointVersion;
  std::string activation{kActivationName};
  std::vector<std::string> config;  // echoed `key=value` lines
  StudentMode mode = StudentMode::Gs;
  std::size_t dim = 0;
  TrainState state;
};

/// Text format, one named array per line:
///   # gasolve-ckpt v1
///   activation softplus
///   config <key>=<value>        (zero or more)
///   iteration <k>
///   N <n>
///   dim <d>
///   mode gs|gas
///   <array> v,v,...             (theta xi a_diag a_off c_recent c_old ema
///                                adam_m adam_v adam_step [disc disc_adam_m
///                                disc_adam_v disc_adam_step])
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Metrics CSV with the train-log schema; `aborted` becomes a trailing
/// `# aborted: ...` diagnostic line.
std::string serialize_metrics(const std::vector<MetricsRow>& log,
                              const std::string& aborted = {});

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gasolve
