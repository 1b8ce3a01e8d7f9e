#pragma once

#include <cstdint>
#include <random>

namespace fve {

/// splitmix64 finalizer; used for counter-based stream derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of replicate `index` under `master_seed`. Pure function of both.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

/// A single random stream. Not thread-safe; one per trajectory.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Stream for replicate `index` of an ensemble seeded by `master_seed`.
  static Rng for_replicate(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(derive_seed(master_seed, index));
  }

  double uniform();                       // [0, 1)
  double normal();                        // N(0, 1)
  double exponential(double rate);        // mean 1/rate
  std::uint64_t index(std::uint64_t n);   // uniform on {0, ..., n-1}
  std::uint64_t poisson(double mean);
  double gamma(double shape, double scale);

  /// Fresh independent child stream (used to split a trajectory into
  /// separately replayable parts).
  Rng split();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fve
