#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace reacritic {

/// Seeded random stream. Every consumer of randomness owns its own Rng so
/// that adding draws in one place never shifts the sequence seen elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Derives an independent stream from a master seed and a stream name.
  static Rng stream(std::uint64_t master_seed, std::string_view name);

  /// Mixes a master seed with a label; used to derive per-run seeds.
  static std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view name);

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  double normal() { return gauss_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * gauss_(engine_); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace reacritic
