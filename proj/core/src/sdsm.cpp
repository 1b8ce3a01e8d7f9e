#include "fve/sdsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fve/diffusion_window.hpp"
#include "fve/error.hpp"

namespace fve {

std::size_t MassPath::count_at(double t) const {
  long long n = static_cast<long long>(n0);
  for (const MassEvent& e : events) {
    if (e.time > t) break;
    n += e.change;
  }
  return static_cast<std::size_t>(n);
}

double MassPath::sup_deviation(double t) const {
  const double inv = 1.0 / static_cast<double>(n0);
  long long n = static_cast<long long>(n0);
  double sup = 0.0;
  for (const MassEvent& e : events) {
    if (e.time > t) break;
    n += e.change;
    sup = std::max(sup, std::abs(static_cast<double>(n) * inv - 1.0));
  }
  return sup;
}

MassPath sample_mass_path(std::size_t n0, double gamma, double horizon, Rng& rng) {
  if (n0 < 1) throw ArgumentError("sample_mass_path: n0 must be >= 1");
  if (!(gamma >= 0.0) || !(horizon >= 0.0)) throw ArgumentError("sample_mass_path: gamma and horizon must be >= 0");
  MassPath path{n0, gamma, horizon, {}};
  if (gamma == 0.0) return path;
  const double per_particle = gamma * static_cast<double>(n0);
  std::size_t n = n0;
  double t = 0.0;
  while (n > 0) {
    t += rng.exponential(per_particle * static_cast<double>(n));
    if (t > horizon) break;
    const int change = rng.uniform() < 0.5 ? -1 : 1;
    path.events.push_back({t, change});
    n = change > 0 ? n + 1 : n - 1;
  }
  return path;
}

// ---------------------------------------------------------------------------

ConditionedMassSampler::ConditionedMassSampler(std::size_t n0, double gamma, double horizon, double delta)
    : n0_(n0), gamma_(gamma), horizon_(horizon), delta_(delta) {
  if (n0 < 1) throw ArgumentError("ConditionedMassSampler: n0 must be >= 1");
  if (!(gamma >= 0.0) || !(horizon >= 0.0)) {
    throw ArgumentError("ConditionedMassSampler: gamma and horizon must be >= 0");
  }
  if (!(delta > 0.0)) throw ArgumentError("ConditionedMassSampler: delta must be > 0");

  const double inv = 1.0 / static_cast<double>(n0);
  auto inside = [&](std::size_t n) { return std::abs(static_cast<double>(n) * inv - 1.0) < delta; };
  lo_ = n0;
  while (lo_ > 0 && inside(lo_ - 1)) --lo_;
  hi_ = n0;
  while (inside(hi_ + 1)) ++hi_;

  rate_ = gamma * static_cast<double>(n0) * static_cast<double>(hi_);
  const double mean = rate_ * horizon;
  if (mean == 0.0) {
    acceptance_ = 1.0;
    tick_cdf_ = {1.0};
    return;
  }
  const auto kmax = static_cast<std::size_t>(std::ceil(mean + 12.0 * std::sqrt(mean) + 64.0));

  const std::size_t width = hi_ - lo_ + 1;
  std::vector<double> u(width, 1.0), next(width);
  double log_scale = 0.0;
  std::vector<double> log_weight(kmax + 1);
  const double log_mean = std::log(mean);
  for (std::size_t k = 0; k <= kmax; ++k) {
    if (k % block_ == 0) checkpoints_.push_back(u);
    const double log_pois = static_cast<double>(k) * log_mean - mean - std::lgamma(static_cast<double>(k) + 1.0);
    const double un0 = u[n0 - lo_];
    log_weight[k] = un0 > 0.0 ? log_pois + std::log(un0) + log_scale : -std::numeric_limits<double>::infinity();
    if (k == kmax) break;
    apply(u, next);
    const double top = *std::max_element(next.begin(), next.end());
    if (!(top > 0.0)) throw NumericError("ConditionedMassSampler: band survival underflow", top);
    for (std::size_t i = 0; i < width; ++i) u[i] = next[i] / top;
    log_scale += std::log(top);
  }

  const double peak = *std::max_element(log_weight.begin(), log_weight.end());
  tick_cdf_.resize(kmax + 1);
  double total = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    total += std::exp(log_weight[k] - peak);
    tick_cdf_[k] = total;
  }
  for (double& c : tick_cdf_) c /= total;
  acceptance_ = std::exp(peak + std::log(total));
}

void ConditionedMassSampler::apply(const std::vector<double>& in, std::vector<double>& out) const {
  const double inv_hi = 1.0 / static_cast<double>(hi_);
  const std::size_t width = in.size();
  for (std::size_t i = 0; i < width; ++i) {
    const double n = static_cast<double>(lo_ + i);
    const double half = 0.5 * n * inv_hi;
    double v = (1.0 - 2.0 * half) * in[i];
    if (i + 1 < width) v += half * in[i + 1];
    if (i > 0) v += half * in[i - 1];
    out[i] = v;
  }
}

void ConditionedMassSampler::fill_block(std::size_t block, std::vector<std::vector<double>>& rows) const {
  rows.resize(block_);
  rows[0] = checkpoints_.at(block);
  for (std::size_t i = 1; i < block_; ++i) {
    rows[i].resize(rows[0].size());
    apply(rows[i - 1], rows[i]);
    const double top = *std::max_element(rows[i].begin(), rows[i].end());
    if (top > 0.0) {
      for (double& v : rows[i]) v /= top;
    }
  }
}

MassPath ConditionedMassSampler::sample(Rng& rng) const {
  MassPath path{n0_, gamma_, horizon_, {}};
  const double r = rng.uniform();
  const auto ticks = static_cast<std::size_t>(std::upper_bound(tick_cdf_.begin(), tick_cdf_.end(), r) -
                                              tick_cdf_.begin());
  if (ticks == 0) return path;

  // Sorted uniform tick times from normalized exponential spacings.
  std::vector<double> times(ticks);
  double acc = 0.0;
  for (double& t : times) {
    acc += rng.exponential(1.0);
    t = acc;
  }
  const double scale = horizon_ / (acc + rng.exponential(1.0));

  const double inv_hi = 1.0 / static_cast<double>(hi_);
  std::vector<std::vector<double>> rows;
  std::size_t cached = std::numeric_limits<std::size_t>::max();
  std::size_t n = n0_;
  for (std::size_t s = 0; s < ticks; ++s) {
    const std::size_t remaining = ticks - s - 1;  // steps left after this one
    const std::size_t block = remaining / block_;
    if (block != cached) {
      fill_block(block, rows);
      cached = block;
    }
    const std::vector<double>& u = rows[remaining % block_];
    const std::size_t i = n - lo_;
    const double half = 0.5 * static_cast<double>(n) * inv_hi;
    const double w_up = i + 1 < u.size() ? half * u[i + 1] : 0.0;
    const double w_down = i > 0 ? half * u[i - 1] : 0.0;
    const double w_stay = (1.0 - 2.0 * half) * u[i];
    const double x = rng.uniform() * (w_up + w_down + w_stay);
    if (x < w_up) {
      ++n;
      path.events.push_back({times[s] * scale, +1});
    } else if (x < w_up + w_down) {
      --n;
      path.events.push_back({times[s] * scale, -1});
    }
  }
  return path;
}

// ---------------------------------------------------------------------------

namespace {

void check_records(std::span<const double> record_times, double horizon) {
  for (std::size_t k = 0; k < record_times.size(); ++k) {
    if (record_times[k] < 0.0 || record_times[k] > horizon || (k > 0 && record_times[k] < record_times[k - 1])) {
      throw ArgumentError("sdsm: record times must be sorted within [0, horizon]");
    }
  }
}

}  // namespace

SdsmTrajectory simulate_sdsm_on_path(const SdsmConfig& config, const MassPath& path,
                                     std::span<const double> record_times, Rng& rng) {
  if (config.n0 < 2) throw ArgumentError("simulate_sdsm: n0 must be >= 2");
  if (path.n0 != config.n0) throw ArgumentError("simulate_sdsm: mass path has a different n0");
  if (!(config.dt_max > 0.0)) throw ArgumentError("simulate_sdsm: dt_max must be > 0");
  check_records(record_times, path.horizon);

  const double particle_mass = 1.0 / static_cast<double>(config.n0);
  std::vector<double> positions(config.n0);
  for (double& x : positions) x = config.initial.sample(rng);

  SdsmTrajectory out;
  out.mass = path;
  double time = 0.0;
  std::size_t next_record = 0;
  auto record_due = [&] {
    while (next_record < record_times.size() && record_times[next_record] <= time) {
      out.records.push_back({record_times[next_record], EmpiricalMeasure::from_particles(positions, particle_mass),
                             positions.size()});
      ++next_record;
    }
  };
  record_due();

  std::size_t next_event = 0;
  const std::vector<MassEvent>& events = path.events;
  while (time < path.horizon) {
    if (positions.empty()) {
      time = path.horizon;
      record_due();
      break;
    }
    double window_end = std::min(time + config.dt_max, path.horizon);
    if (next_record < record_times.size() && record_times[next_record] > time) {
      window_end = std::min(window_end, record_times[next_record]);
    }
    DiffusionWindow window(config.kernel, positions, time, rng, config.factor);
    while (next_event < events.size() && events[next_event].time < window_end) {
      const MassEvent& e = events[next_event++];
      const std::size_t j = rng.index(window.size());
      if (e.change > 0) {
        window.duplicate(j, e.time);
      } else {
        window.remove(j);
        if (window.size() == 0) {
          out.extinct = true;
          out.extinction_time = e.time;
          break;
        }
      }
    }
    if (window.size() == 0) {
      positions.clear();
      time = out.extinction_time;
      record_due();
      continue;
    }
    window.finish(window_end, positions);
    time = window_end;
    if (!std::all_of(positions.begin(), positions.end(), [](double x) { return std::isfinite(x); })) {
      throw NumericError("simulate_sdsm: non-finite particle position", 0.0);
    }
    record_due();
  }
  return out;
}

SdsmTrajectory simulate_sdsm(const SdsmConfig& config, double horizon, std::span<const double> record_times,
                             Rng& rng) {
  const MassPath path = sample_mass_path(config.n0, config.gamma, horizon, rng);
  return simulate_sdsm_on_path(config, path, record_times, rng);
}

ConditionedEnsemble condition_total_mass(std::span<const SdsmTrajectory> ensemble, double delta, double T) {
  if (!(delta > 0.0) || !(T >= 0.0)) throw ArgumentError("condition_total_mass: need delta > 0 and T >= 0");
  ConditionedEnsemble out;
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const MassPath& path = ensemble[k].mass;
    if (T > path.horizon) throw ArgumentError("condition_total_mass: T beyond the recorded horizon");
    if (path.sup_deviation(T) < delta) out.accepted.push_back(k);
  }
  if (out.accepted.empty()) {
    throw RunFailed("condition_total_mass: no trajectory accepted; raise delta or the number of replicates");
  }
  out.acceptance_rate = static_cast<double>(out.accepted.size()) / static_cast<double>(ensemble.size());
  return out;
}

}  // namespace fve
