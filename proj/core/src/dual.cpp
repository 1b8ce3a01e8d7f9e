#include "fve/dual.hpp"

#include <algorithm>
#include <cmath>

#include "fve/error.hpp"

namespace fve {

namespace {

double death_rate(int level, double gamma) {
  const double l = static_cast<double>(level);
  return gamma * l * (l - 1.0) / 2.0;
}

}  // namespace

int DeathChainTrajectory::level_at(double t) const {
  const auto jumps = std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
  return m0 - static_cast<int>(jumps);
}

DeathChainTrajectory simulate_death_chain(int m0, double gamma, double horizon, Rng& rng) {
  if (m0 < 1) throw ArgumentError("simulate_death_chain: m0 must be >= 1");
  if (!(gamma >= 0.0)) throw ArgumentError("simulate_death_chain: gamma must be >= 0");
  DeathChainTrajectory c;
  c.m0 = m0;
  c.gamma = gamma;
  c.horizon = horizon;
  double t = 0.0;
  int level = m0;
  while (level > 1 && gamma > 0.0) {
    t += rng.exponential(death_rate(level, gamma));
    if (t > horizon) break;
    auto i = static_cast<int>(rng.index(static_cast<std::uint64_t>(level)));
    auto j = static_cast<int>(rng.index(static_cast<std::uint64_t>(level - 1)));
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);
    c.jump_times.push_back(t);
    c.merge_pairs.emplace_back(i + 1, j + 1);
    --level;
  }
  return c;
}

std::vector<double> death_chain_marginal(int m0, double gamma, double t) {
  if (m0 < 1) throw ArgumentError("death_chain_marginal: m0 must be >= 1");
  if (!(t >= 0.0) || !(gamma >= 0.0)) throw ArgumentError("death_chain_marginal: need t >= 0 and gamma >= 0");
  std::vector<double> p(static_cast<std::size_t>(m0), 0.0);
  p.back() = 1.0;
  const double lambda = death_rate(m0, gamma);
  if (lambda == 0.0 || t == 0.0) return p;

  // Uniformization on blocks with lambda * dt <= 32 keeps every Poisson
  // weight representable; all terms are nonnegative.
  const double block_budget = 32.0;
  const auto blocks = static_cast<std::size_t>(std::ceil(lambda * t / block_budget));
  const double dt = t / static_cast<double>(blocks);
  const double mean = lambda * dt;
  std::vector<double> term(p.size()), next(p.size()), acc(p.size());
  for (std::size_t b = 0; b < blocks; ++b) {
    term = p;
    double weight = std::exp(-mean);
    for (std::size_t l = 0; l < p.size(); ++l) acc[l] = weight * term[l];
    const int terms = static_cast<int>(std::ceil(mean + 12.0 * std::sqrt(mean) + 30.0));
    for (int n = 1; n <= terms; ++n) {
      // term <- term * (I + Q / lambda), Q the pure-death generator on levels 1..m0
      for (std::size_t l = 0; l < p.size(); ++l) {
        const int level = static_cast<int>(l) + 1;
        const double stay = 1.0 - death_rate(level, gamma) / lambda;
        double v = stay * term[l];
        if (l + 1 < p.size()) v += death_rate(level + 1, gamma) / lambda * term[l + 1];
        next[l] = v;
      }
      std::swap(term, next);
      weight *= mean / static_cast<double>(n);
      for (std::size_t l = 0; l < p.size(); ++l) acc[l] += weight * term[l];
    }
    p = acc;
  }
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

double mean_absorption_time(int m0, double gamma) {
  double s = 0.0;
  for (int k = 2; k <= m0; ++k) s += 1.0 / death_rate(k, gamma);
  return s;
}

std::vector<double> unmerge(const std::vector<double>& y, int i, int j) {
  const int l = static_cast<int>(y.size()) + 1;
  if (!(1 <= i && i < j && j <= l)) throw ArgumentError("unmerge: need 1 <= i < j <= level");
  std::vector<double> out(static_cast<std::size_t>(l));
  const double shared = y.back();
  std::size_t next = 0;
  for (int k = 1; k <= l; ++k) {
    out[static_cast<std::size_t>(k - 1)] = (k == i || k == j) ? shared : y[next++];
  }
  return out;
}

void diffuse(std::vector<double>& points, double duration, const KernelSpec& kernel, double dt_max, Rng& rng) {
  if (duration <= 0.0 || points.empty()) return;
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt_max));
  const double dt = duration / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto inc = sample_joint_increment(kernel, points, dt, rng, FactorMethod::eigen);
    for (std::size_t k = 0; k < points.size(); ++k) points[k] += inc[k];
  }
}

DualEstimate dual_moment_estimate(const InitialLaw& mu, const MultiFunction& f, int m, double t,
                                  const KernelSpec& kernel, double gamma, std::size_t n_reps, double dt_max,
                                  Rng& rng) {
  if (m < 1) throw ArgumentError("dual_moment_estimate: m must be >= 1");
  if (n_reps < 1) throw ArgumentError("dual_moment_estimate: need n_reps >= 1");
  RunningStats acc;
  DualEstimate out;
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    const auto chain = simulate_death_chain(m, gamma, t, rng);
    const std::size_t jumps = chain.jump_times.size();
    std::vector<double> points(static_cast<std::size_t>(m) - jumps);
    for (double& x : points) x = mu.sample(rng);
    double segment_end = t;
    for (std::size_t k = jumps; k-- > 0;) {
      diffuse(points, segment_end - chain.jump_times[k], kernel, dt_max, rng);
      points = unmerge(points, chain.merge_pairs[k].first, chain.merge_pairs[k].second);
      segment_end = chain.jump_times[k];
    }
    diffuse(points, segment_end, kernel, dt_max, rng);
    double value = 0.0;
    try {
      value = f(points);
    } catch (const std::exception&) {
      ++out.discarded;
      continue;
    }
    if (!std::isfinite(value)) {
      ++out.discarded;
      continue;
    }
    acc.push(value);
  }
  if (static_cast<double>(out.discarded) > 0.01 * static_cast<double>(n_reps)) {
    throw RunFailed("dual_moment_estimate: more than 1% of replicates discarded");
  }
  out.estimate = acc.estimate();
  return out;
}

double first_moment_exact(const InitialLaw& mu, const TestFunction& phi, double t, const KernelSpec& kernel) {
  if (t < 0.0) throw ArgumentError("first_moment_exact: t must be >= 0");
  return mu.expect(phi.heat_smoothed(kernel.rho_eps() * t));
}

DualEstimate second_moment_dual(const InitialLaw& mu, const TestFunction& phi, const TestFunction& psi, double t,
                                const KernelSpec& kernel, double gamma, std::size_t n_reps, Rng& rng,
                                double dt_max) {
  if (n_reps < 4) throw ArgumentError("second_moment_dual: need n_reps >= 4");
  const double no_merge = std::exp(-gamma * t);
  const std::size_t n_merge = no_merge < 1.0 ? n_reps / 2 : 0;
  const std::size_t n_plain = n_reps - n_merge;

  RunningStats plain;
  for (std::size_t k = 0; k < n_plain; ++k) {
    std::vector<double> pair{mu.sample(rng), mu.sample(rng)};
    diffuse(pair, t, kernel, dt_max, rng);
    plain.push(phi(pair[0]) * psi(pair[1]));
  }
  DualEstimate out;
  if (n_merge == 0) {
    out.estimate = plain.estimate();
    return out;
  }
  // Merge time s ~ Exp(gamma) conditioned on s < t, by inversion. Before s
  // (counting back from t) a single particle moves for t - s; then it splits.
  RunningStats merged;
  for (std::size_t k = 0; k < n_merge; ++k) {
    const double u = rng.uniform();
    const double s = -std::log1p(-u * (1.0 - no_merge)) / gamma;
    std::vector<double> single{mu.sample(rng)};
    diffuse(single, t - s, kernel, dt_max, rng);
    std::vector<double> pair{single[0], single[0]};
    diffuse(pair, s, kernel, dt_max, rng);
    merged.push(phi(pair[0]) * psi(pair[1]));
  }
  const Estimate a = plain.estimate();
  const Estimate b = merged.estimate();
  out.estimate.mean = no_merge * a.mean + (1.0 - no_merge) * b.mean;
  out.estimate.std_error = std::sqrt(no_merge * no_merge * a.std_error * a.std_error +
                                     (1.0 - no_merge) * (1.0 - no_merge) * b.std_error * b.std_error);
  out.estimate.n = n_reps;
  return out;
}

}  // namespace fve
