#pragma once

#include <span>
#include <vector>

#include "fve/distributions.hpp"

namespace fve {

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

/// Weighted atomic measure with distinct atom positions, sorted ascending.
struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  double total_mass = 0.0;

  /// Atoms at bitwise-equal positions are merged; every particle carries
  /// `particle_mass`.
  static EmpiricalMeasure from_particles(std::span<const double> positions, double particle_mass);

  double integrate(const TestFunction& phi) const;
  /// <mu, phi> / mu(R).
  double normalized_integral(const TestFunction& phi) const;
  EmpiricalMeasure normalized() const;
  std::size_t atom_count() const noexcept { return atoms.size(); }
};

/// Unbiased estimate of E <Z^k, phi^{(x)k}> from m exchangeable particles:
/// the average of phi(x_i1)...phi(x_ik) over ordered k-tuples of distinct
/// indices, for k in {1, 2, 3}.
double tensor_u_statistic(std::span<const double> positions, const TestFunction& phi, int order);

}  // namespace fve
