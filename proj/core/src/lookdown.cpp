#include "fve/lookdown.hpp"

#include <algorithm>
#include <cmath>

#include "fve/diffusion_window.hpp"
#include "fve/error.hpp"

namespace fve {

std::string to_string(Model model) { return model == Model::lookdown ? "lookdown" : "moran"; }

Model model_from_string(const std::string& name) {
  if (name == "lookdown") return Model::lookdown;
  if (name == "moran") return Model::moran;
  throw ArgumentError("unknown model '" + name + "' (expected lookdown or moran)");
}

ParticleSystemState init_system(std::size_t m, const InitialLaw& mu, const KernelSpec& kernel, double gamma,
                                Model model, Rng& rng) {
  if (m < 2) throw ArgumentError("init_system: m must be >= 2");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ArgumentError("init_system: gamma must be finite and >= 0");
  ParticleSystemState s;
  s.model = model;
  s.gamma = gamma;
  s.kernel = kernel;
  s.positions.resize(m);
  s.ancestor_id.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    s.positions[i] = mu.sample(rng);
    s.ancestor_id[i] = static_cast<int>(i + 1);
  }
  return s;
}

void step_diffusion(ParticleSystemState& state, double dt, Rng& rng) {
  if (dt < 0.0) throw ArgumentError("step_diffusion: dt must be >= 0");
  if (dt == 0.0) return;
  const auto inc = sample_joint_increment(state.kernel, state.positions, dt, rng);
  for (std::size_t i = 0; i < inc.size(); ++i) state.positions[i] += inc[i];
  state.time += dt;
}

namespace {

double total_rate(std::size_t m, double gamma) {
  const double md = static_cast<double>(m);
  return gamma * md * (md - 1.0) / 2.0;
}

void draw_pair(Model model, std::size_t m, Rng& rng, std::size_t& i, std::size_t& j) {
  std::size_t a = rng.index(m);
  std::size_t b = rng.index(m - 1);
  if (b >= a) ++b;
  if (model == Model::lookdown && a > b) std::swap(a, b);
  i = a;
  j = b;
}

}  // namespace

ResamplingEvent next_event(const ParticleSystemState& state, Rng& rng) {
  ResamplingEvent e;
  const double rate = total_rate(state.size(), state.gamma);
  if (rate <= 0.0) return e;
  e.wait = rng.exponential(rate);
  draw_pair(state.model, state.size(), rng, e.i, e.j);
  return e;
}

void apply_event(ParticleSystemState& state, std::size_t i, std::size_t j) {
  if (i == j) throw ArgumentError("apply_event: i == j");
  if (i >= state.size() || j >= state.size()) throw ArgumentError("apply_event: level out of range");
  if (state.model == Model::lookdown && i > j) throw ArgumentError("apply_event: lookdown requires i < j");
  state.positions[j] = state.positions[i];
  state.ancestor_id[j] = state.ancestor_id[i];
}

std::size_t lineage_count(std::span<const int> ancestor_id) {
  std::vector<char> seen(ancestor_id.size() + 1, 0);
  std::size_t n = 0;
  for (int a : ancestor_id) {
    const auto k = static_cast<std::size_t>(a);
    if (k >= seen.size()) seen.resize(k + 1, 0);
    if (!seen[k]) {
      seen[k] = 1;
      ++n;
    }
  }
  return n;
}

std::size_t lineage_count(const ParticleSystemState& state) { return lineage_count(state.ancestor_id); }

Trajectory simulate(const SimulationConfig& config, double horizon, std::span<const double> record_times,
                    Rng& rng) {
  if (!(horizon >= 0.0)) throw ArgumentError("simulate: horizon must be >= 0");
  if (!(config.dt_max > 0.0)) throw ArgumentError("simulate: dt_max must be > 0");
  for (std::size_t k = 0; k < record_times.size(); ++k) {
    if (record_times[k] < 0.0 || record_times[k] > horizon) {
      throw ArgumentError("simulate: record time outside [0, horizon]");
    }
    if (k > 0 && record_times[k] < record_times[k - 1]) throw ArgumentError("simulate: record times not sorted");
  }

  ParticleSystemState state = init_system(config.m, config.initial, config.kernel, config.gamma, config.model, rng);
  const std::size_t m = state.size();
  const double particle_mass = 1.0 / static_cast<double>(m);
  const double rate = total_rate(m, config.gamma);

  Trajectory out;
  std::size_t next_record = 0;
  auto record_due = [&] {
    while (next_record < record_times.size() && record_times[next_record] <= state.time) {
      out.records.push_back({record_times[next_record], EmpiricalMeasure::from_particles(state.positions, particle_mass),
                             lineage_count(state), state.positions, state.ancestor_id});
      ++next_record;
    }
  };
  record_due();

  double event_time = rate > 0.0 ? rng.exponential(rate) : std::numeric_limits<double>::infinity();
  while (state.time < horizon) {
    double window_end = std::min(state.time + config.dt_max, horizon);
    if (next_record < record_times.size() && record_times[next_record] > state.time) {
      window_end = std::min(window_end, record_times[next_record]);
    }
    DiffusionWindow window(config.kernel, state.positions, state.time, rng, config.factor);
    while (event_time < window_end) {
      std::size_t i = 0, j = 0;
      draw_pair(config.model, m, rng, i, j);
      window.copy(i, j, event_time);
      state.ancestor_id[j] = state.ancestor_id[i];
      ++out.events;
      event_time += rng.exponential(rate);
    }
    window.finish(window_end, state.positions);
    state.time = window_end;
    if (!std::all_of(state.positions.begin(), state.positions.end(), [](double x) { return std::isfinite(x); })) {
      out.failed = true;
      out.failure = "non-finite particle position";
      break;
    }
    record_due();
  }
  return out;
}

}  // namespace fve
