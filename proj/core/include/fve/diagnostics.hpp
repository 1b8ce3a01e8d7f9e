#pragma once

// Atom statistics, the weak atomic distance, flow order preservation and the
// lineage-count law check.

#include <cstddef>
#include <span>
#include <vector>

#include "fve/kernel.hpp"
#include "fve/measure.hpp"
#include "fve/random.hpp"

namespace fve {

/// Sum of squared atom masses.
double atom_statistic(const EmpiricalMeasure& mu);

struct AtomReport {
  double atom_statistic = 0.0;
  std::size_t atom_count = 0;
  double largest_atom = 0.0;
  std::vector<double> phi_profile;
};

/// 32 log-spaced points in [1e-3, 1].
std::vector<double> default_eps_grid();

/// sum_{i,j} m_i m_j (1 - |x_i - x_j| / eps)_+ for each eps in the grid.
std::vector<double> weak_atomic_profile(const EmpiricalMeasure& mu, std::span<const double> eps_grid);

AtomReport atom_report(const EmpiricalMeasure& mu, std::span<const double> eps_grid);

/// Levy distance between the normalized CDFs (bisection to 1e-12).
double levy_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
/// W1 between the normalized measures: integral of |F - G|.
double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

struct DistanceBracket {
  double lower = 0.0;
  double upper = 0.0;
  double profile_sup = 0.0;  // sup over the grid of the profile difference
};

/// Bracket of rho + sup_eps |profile difference|, with the Prohorov part
/// bounded below by Levy / 2 and above by sqrt(W1).
DistanceBracket weak_atomic_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                     std::span<const double> eps_grid);

/// Number of label-adjacent pairs whose difference changes sign between
/// consecutive states.
std::size_t count_crossings(std::span<const double> before, std::span<const double> after);

struct OrderRun {
  std::size_t crossing_count = 0;
  std::vector<std::vector<double>> trajectory;  // state after every step, including t = 0
};

/// Euler flow of sorted points under pure common noise (eps must be 0).
OrderRun order_preservation_test(const KernelSpec& kernel, std::span<const double> initial_points, double horizon,
                                 double dt, Rng& rng);

struct PairedCrossings {
  std::size_t coarse = 0;  // step dt
  std::size_t fine = 0;    // step dt / 2
};

/// Runs the flow at dt and dt / 2 on one noise path: the fine run draws
/// xi_a, xi_b per coarse step and the coarse run uses (xi_a + xi_b) / sqrt(2).
PairedCrossings paired_crossing_counts(const KernelSpec& kernel, std::span<const double> initial_points,
                                       double horizon, double dt, Rng& rng);

struct LineageLawResult {
  double tv_distance = 0.0;
  bool pass = false;
  std::vector<double> empirical;  // P(D = d) at index d - 1
  std::vector<double> exact;
};

/// TV distance between the empirical law of D(t) and the death chain
/// marginal; pass iff TV < 0.05 with at least 2000 samples.
LineageLawResult lineage_law_test(std::span<const std::size_t> lineage_counts, std::size_t m, double gamma,
                                  double t);

}  // namespace fve
