#pragma once

#include <cstdint>
#include <random>

namespace gasolve {

/// Independent random streams derived from one master seed. Each draw site
/// owns a (stream, counter) pair, e.g. (Prior, row index) or (Batch,
/// iteration), so results never depend on the order work is scheduled in.
enum class Stream : std::uint64_t {
  PriorTrain = 1,
  PriorValidation = 2,
  Batch = 3,
  RealBatch = 4,
  DiscInit = 5,
  Evaluation = 6,
  Test = 7,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// seed' = mix(mix(mix(master) ^ stream) ^ counter)
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t counter) noexcept {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(stream)) ^ counter);
}

inline std::mt19937_64 stream_rng(std::uint64_t master, Stream stream,
                                  std::uint64_t counter) {
  return std::mt19937_64(derive_seed(master, stream, counter));
}

}  // namespace gasolve
