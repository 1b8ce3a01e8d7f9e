#pragma once

// Lookdown particle system and the Moran model. Levels are 0-based here:
// level 0 is the lowest. Between resampling events the particles move as the
// correlated m-particle diffusion; at an event (i, j) particle j assumes the
// value (and ancestry) of particle i.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fve/distributions.hpp"
#include "fve/kernel.hpp"
#include "fve/measure.hpp"
#include "fve/random.hpp"

namespace fve {

enum class Model { lookdown, moran };

std::string to_string(Model model);
Model model_from_string(const std::string& name);

struct ParticleSystemState {
  double time = 0.0;
  std::vector<double> positions;
  std::vector<int> ancestor_id;  // 1-based index of the time-0 path followed
  Model model = Model::lookdown;
  double gamma = 1.0;
  KernelSpec kernel = KernelSpec::gaussian(1.0, 1.0, 0.0);

  std::size_t size() const noexcept { return positions.size(); }
};

/// Resampling event: wait until it fires, then particle j takes particle i's value.
struct ResamplingEvent {
  double wait = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
};

ParticleSystemState init_system(std::size_t m, const InitialLaw& mu, const KernelSpec& kernel, double gamma,
                                Model model, Rng& rng);

/// One Euler step of the m-particle diffusion; ancestry untouched. dt = 0 is a no-op.
void step_diffusion(ParticleSystemState& state, double dt, Rng& rng);

/// Total rate gamma m (m - 1) / 2. Lookdown: uniform unordered pair with i < j.
/// Moran: uniform ordered pair i != j.
ResamplingEvent next_event(const ParticleSystemState& state, Rng& rng);

/// positions[j] := positions[i], ancestor_id[j] := ancestor_id[i].
void apply_event(ParticleSystemState& state, std::size_t i, std::size_t j);

/// Number of distinct time-0 ancestors (D(t)).
std::size_t lineage_count(const ParticleSystemState& state);
std::size_t lineage_count(std::span<const int> ancestor_id);

struct SimulationConfig {
  std::size_t m = 64;
  double gamma = 1.0;  // 0 disables resampling
  Model model = Model::lookdown;
  KernelSpec kernel = KernelSpec::gaussian(1.0, 1.0, 0.0);
  InitialLaw initial = InitialLaw::point(0.0);
  double dt_max = 1e-3;
  FactorMethod factor = FactorMethod::automatic;
};

struct TrajectoryRecord {
  double time = 0.0;
  EmpiricalMeasure measure;
  std::size_t lineage_count = 0;
  std::vector<double> positions;  // by level
  std::vector<int> ancestors;     // by level
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::size_t events = 0;
  bool failed = false;
  std::string failure;
};

/// Event-driven simulation on [0, horizon]. Record times must be sorted and
/// lie in [0, horizon]. Deterministic given the stream state. If positions
/// stop being finite the run is marked failed and the records so far kept.
Trajectory simulate(const SimulationConfig& config, double horizon, std::span<const double> record_times,
                    Rng& rng);

}  // namespace fve
