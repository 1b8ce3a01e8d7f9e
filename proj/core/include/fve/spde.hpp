#pragma once

// Explicit finite-difference solver for the density SPDE
//
//   dZ = (rho_eps / 2) Z'' dt + sqrt(gamma Z) V(dt dx) - Z <sqrt(gamma Z), V(dt dx)>
//        - d/dx [ Z (h * W(dt dx)) ]
//
// on a periodic grid over [-L, L).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fve/distributions.hpp"
#include "fve/kernel.hpp"
#include "fve/random.hpp"

namespace fve {

struct DensityField {
  double half_width = 8.0;  // L
  double dx = 0.05;
  double time = 0.0;
  std::vector<double> values;

  /// Grid x_k = -L + k dx, k = 0..n-1 with n = 2L / dx.
  static DensityField on_grid(double half_width, double dx);
  /// Discretized density of N(mean, sd^2), renormalized to unit grid mass.
  static DensityField normal(double half_width, double dx, double mean, double sd);
  static DensityField from_function(double half_width, double dx, const std::function<double(double)>& f);

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t k) const noexcept { return -half_width + static_cast<double>(k) * dx; }
  double mass() const;
  void normalize();
};

/// Independent V and W sheet increments over one time step: N(0, dt / dx) per cell.
struct NoiseSlice {
  std::vector<double> v_incr;
  std::vector<double> w_incr;

  static NoiseSlice draw(std::size_t cells, double dt, double dx, Rng& rng);
};

enum class NoiseScheme {
  /// Euler step of all four terms, then clip negatives and renormalize.
  euler_clip,
  /// Euler step of diffusion and transport; the sqrt(gamma Z) noise is taken
  /// from the exact per-cell Feller transition and its mass-conserving
  /// correction from renormalization.
  feller_split,
};

struct SpdeRun {
  std::vector<DensityField> snapshots;
  std::size_t steps = 0;
  std::size_t mass_drift_warnings = 0;  // |mass - 1| > 1e-6 before renormalizing
  double clipped_mass = 0.0;            // total negative mass removed
  double max_boundary_mass = 0.0;       // mass within 0.5 of +-L, max over steps
};

/// Largest stable step: 0.5 * dx^2 / (2 rho_eps).
double stability_bound(const KernelSpec& kernel, double dx);

/// Requires eps > 0 and dt <= stability_bound; throws StabilityError with
/// the suggested step otherwise. Snapshots are taken at `record_times`
/// (sorted, within [0, horizon]); the final state is always appended when
/// record_times is empty.
SpdeRun solve_density(const DensityField& initial, const KernelSpec& kernel, double gamma, double horizon, double dt,
                      Rng& rng, std::span<const double> record_times = {},
                      NoiseScheme scheme = NoiseScheme::feller_split);

/// Trapezoid (periodic) rule for <Z, phi>.
double density_moments(const DensityField& field, const std::function<double(double)>& phi);
double density_moments(const DensityField& field, const TestFunction& phi);

}  // namespace fve
