#pragma once

// Branching particle approximation of the superprocess with dependent
// spatial motion. Each of the n0 initial particles carries mass 1/n0 and
// branches critically at rate gamma * n0. The alive count is a birth-death
// chain independent of the positions, so a run first samples the count path
// and then moves particles along it, picking the branching particle
// uniformly among the alive ones at each event.

#include <cstddef>
#include <span>
#include <vector>

#include "fve/distributions.hpp"
#include "fve/kernel.hpp"
#include "fve/measure.hpp"
#include "fve/random.hpp"

namespace fve {

struct MassEvent {
  double time = 0.0;
  int change = 0;  // +1 split, -1 death
};

struct MassPath {
  std::size_t n0 = 0;
  double gamma = 0.0;
  double horizon = 0.0;
  std::vector<MassEvent> events;

  /// Alive count just after every event at or before t.
  std::size_t count_at(double t) const;
  double mass_at(double t) const { return static_cast<double>(count_at(t)) / static_cast<double>(n0); }
  /// sup_{s <= t} |mass(s) - 1|; exact, since mass is piecewise constant.
  double sup_deviation(double t) const;
  bool extinct_by(double t) const { return count_at(t) == 0; }
};

/// Gillespie path of the critical birth-death chain on [0, horizon].
MassPath sample_mass_path(std::size_t n0, double gamma, double horizon, Rng& rng);

/// Exact sampler of the count path on [0, T] conditioned on
/// sup_{t <= T} |N_t / n0 - 1| < delta.
///
/// The chain is uniformized at rate gamma n0 hi (hi: top of the band). With
/// u_k(N) the probability of k uniformized steps from N staying in the band,
/// the tick count is drawn from Pois(k; rate T) u_k(n0) / Z and the steps
/// from the Doob transform by u. Tables are checkpointed and recomputed in
/// blocks, so memory stays O(band * (K / block + block)).
class ConditionedMassSampler {
 public:
  ConditionedMassSampler(std::size_t n0, double gamma, double horizon, double delta);

  /// P(sup_{t <= T} |N_t / n0 - 1| < delta) for the unconditioned chain.
  double acceptance_probability() const noexcept { return acceptance_; }
  std::size_t band_low() const noexcept { return lo_; }
  std::size_t band_high() const noexcept { return hi_; }

  MassPath sample(Rng& rng) const;

 private:
  // One uniformized step of u over the band: (P u)(N).
  void apply(const std::vector<double>& in, std::vector<double>& out) const;
  void fill_block(std::size_t block, std::vector<std::vector<double>>& rows) const;

  std::size_t n0_;
  double gamma_, horizon_, delta_;
  std::size_t lo_ = 0, hi_ = 0;
  double rate_ = 0.0;  // uniformization rate
  std::size_t block_ = 512;
  std::vector<std::vector<double>> checkpoints_;  // u_{c block}, scaled to max 1
  std::vector<double> tick_cdf_;                  // posterior of the tick count
  std::size_t tick_offset_ = 0;
  double acceptance_ = 0.0;
};

struct SdsmConfig {
  std::size_t n0 = 500;
  double gamma = 1.0;
  KernelSpec kernel = KernelSpec::gaussian(1.0, 1.0, 0.5);
  InitialLaw initial = InitialLaw::point(0.0);
  double dt_max = 1e-3;
  FactorMethod factor = FactorMethod::automatic;
};

struct SdsmRecord {
  double time = 0.0;
  EmpiricalMeasure measure;  // total_mass = alive / n0
  std::size_t alive = 0;
};

struct SdsmTrajectory {
  MassPath mass;
  std::vector<SdsmRecord> records;
  bool extinct = false;
  double extinction_time = 0.0;
};

/// Moves particles along a given count path. Record times sorted in [0, path.horizon].
SdsmTrajectory simulate_sdsm_on_path(const SdsmConfig& config, const MassPath& path,
                                     std::span<const double> record_times, Rng& rng);

/// Unconditioned run: sample_mass_path followed by simulate_sdsm_on_path.
SdsmTrajectory simulate_sdsm(const SdsmConfig& config, double horizon, std::span<const double> record_times,
                             Rng& rng);

struct ConditionedEnsemble {
  std::vector<std::size_t> accepted;  // indices into the input
  double acceptance_rate = 0.0;
};

/// Rejection filter: keeps trajectories with sup_{t <= T} |mass - 1| < delta.
/// Throws RunFailed when nothing is accepted.
ConditionedEnsemble condition_total_mass(std::span<const SdsmTrajectory> ensemble, double delta, double T);

}  // namespace fve
