#pragma once

// Moment dual: the pure-death chain M_t with rates gamma l (l - 1) / 2, the
// merge operators Psi_ij, and Monte Carlo evaluation of
//
//   E <Z(t)^m, f> = E_{m,f} <mu^{M_t}, F_t>.

#include <cstddef>
#include <utility>
#include <vector>

#include "fve/distributions.hpp"
#include "fve/kernel.hpp"
#include "fve/random.hpp"
#include "fve/stats.hpp"

namespace fve {

struct DeathChainTrajectory {
  int m0 = 1;
  double gamma = 1.0;
  double horizon = 0.0;
  std::vector<double> jump_times;
  /// (i, j), 1-based with 1 <= i < j <= pre-jump level.
  std::vector<std::pair<int, int>> merge_pairs;

  int level_at(double t) const;
};

DeathChainTrajectory simulate_death_chain(int m0, double gamma, double horizon, Rng& rng);

/// P(M_t = l) for l = 1..m0, stored at index l - 1.
std::vector<double> death_chain_marginal(int m0, double gamma, double t);

/// Mean of m0 -> 1 absorption time: sum_{k=2}^{m0} 2 / (gamma k (k - 1)).
double mean_absorption_time(int m0, double gamma);

/// Inverse of Psi_ij on a point configuration: from l - 1 coordinates build
/// l coordinates with the last one placed at (1-based) slots i and j and the
/// rest filling the other slots in order.
std::vector<double> unmerge(const std::vector<double>& y, int i, int j);

/// Moves `points` by the correlated diffusion for `duration` in Euler steps
/// of at most dt_max.
void diffuse(std::vector<double>& points, double duration, const KernelSpec& kernel, double dt_max, Rng& rng);

struct DualEstimate {
  Estimate estimate;
  std::size_t discarded = 0;
};

/// Reversed-chain particle representation: simulate the chain on [0, t],
/// draw M_t points from mu, diffuse through the inter-jump segments from the
/// last jump back to the first, unmerging at each jump, and evaluate f on
/// the final m points. Throws RunFailed if more than 1% of replicates fail
/// to evaluate f.
DualEstimate dual_moment_estimate(const InitialLaw& mu, const MultiFunction& f, int m, double t,
                                  const KernelSpec& kernel, double gamma, std::size_t n_reps, double dt_max,
                                  Rng& rng);

/// E <Z(t), phi> = <mu, T_t phi>, with T_t the heat semigroup of variance rate rho_eps.
double first_moment_exact(const InitialLaw& mu, const TestFunction& phi, double t, const KernelSpec& kernel);

/// E[<Z(t), phi><Z(t), psi>] via the two-particle moment formula, stratified
/// on whether the single merge happens before t: the no-merge term carries
/// weight exp(-gamma t) exactly and each stratum is simulated separately.
DualEstimate second_moment_dual(const InitialLaw& mu, const TestFunction& phi, const TestFunction& psi, double t,
                                const KernelSpec& kernel, double gamma, std::size_t n_reps, Rng& rng,
                                double dt_max = 1e-3);

}  // namespace fve
