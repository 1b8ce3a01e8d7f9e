#include "fve/spde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fve/error.hpp"

namespace fve {

DensityField DensityField::on_grid(double half_width, double dx) {
  if (!(half_width > 0.0) || !(dx > 0.0)) throw ArgumentError("DensityField: need L > 0 and dx > 0");
  const double cells = 2.0 * half_width / dx;
  const auto n = static_cast<std::size_t>(std::llround(cells));
  if (n < 4 || std::abs(cells - static_cast<double>(n)) > 1e-9 * cells) {
    throw ArgumentError("DensityField: 2L / dx must be an integer >= 4");
  }
  DensityField f;
  f.half_width = half_width;
  f.dx = dx;
  f.values.assign(n, 0.0);
  return f;
}

DensityField DensityField::from_function(double half_width, double dx, const std::function<double(double)>& g) {
  DensityField f = on_grid(half_width, dx);
  for (std::size_t k = 0; k < f.size(); ++k) f.values[k] = std::max(0.0, g(f.x(k)));
  f.normalize();
  return f;
}

DensityField DensityField::normal(double half_width, double dx, double mean, double sd) {
  if (!(sd > 0.0)) throw ArgumentError("DensityField::normal: sd must be > 0");
  return from_function(half_width, dx, [=](double x) {
    const double u = (x - mean) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
  });
}

double DensityField::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * dx;
}

void DensityField::normalize() {
  const double m = mass();
  if (!(m > 0.0)) throw ArgumentError("DensityField::normalize: zero mass");
  for (double& v : values) v /= m;
}

NoiseSlice NoiseSlice::draw(std::size_t cells, double dt, double dx, Rng& rng) {
  NoiseSlice s;
  const double sd = std::sqrt(dt / dx);
  s.v_incr.resize(cells);
  s.w_incr.resize(cells);
  for (double& v : s.v_incr) v = sd * rng.normal();
  for (double& w : s.w_incr) w = sd * rng.normal();
  return s;
}

double stability_bound(const KernelSpec& kernel, double dx) { return 0.5 * dx * dx / (2.0 * kernel.rho_eps()); }

namespace {

class Stepper {
 public:
  Stepper(const DensityField& grid, const KernelSpec& kernel, double gamma, double dt, NoiseScheme scheme)
      : n_(grid.size()), dx_(grid.dx), gamma_(gamma), dt_(dt), scheme_(scheme), diffusion_(0.5 * kernel.rho_eps()) {
    const bool has_common = kernel.rho(0.0) > 0.0;
    if (has_common) {
      hconv_.resize(n_);
      for (std::size_t d = 0; d < n_; ++d) {
        const double lag = (d <= n_ / 2 ? static_cast<double>(d) : static_cast<double>(d) - static_cast<double>(n_)) * dx_;
        hconv_[d] = kernel.h(lag) * dx_;
      }
    }
    next_.resize(n_);
    flux_.resize(n_);
    velocity_.resize(n_);
  }

  void step(std::vector<double>& z, Rng& rng, SpdeRun& run) {
    const NoiseSlice noise = NoiseSlice::draw(n_, dt_, dx_, rng);
    const double lap = diffusion_ * dt_ / (dx_ * dx_);

    for (std::size_t k = 0; k < n_; ++k) {
      const double zl = z[(k + n_ - 1) % n_];
      const double zr = z[(k + 1) % n_];
      next_[k] = z[k] + lap * (zr - 2.0 * z[k] + zl);
    }

    if (!hconv_.empty()) {
      // velocity_k = sum_l h(x_l - x_k) w_l dx
      for (std::size_t k = 0; k < n_; ++k) {
        double u = 0.0;
        const double* h = hconv_.data();
        for (std::size_t l = k; l < n_; ++l) u += h[l - k] * noise.w_incr[l];
        for (std::size_t l = 0; l < k; ++l) u += h[l + n_ - k] * noise.w_incr[l];
        velocity_[k] = u;
      }
      for (std::size_t k = 0; k < n_; ++k) flux_[k] = z[k] * velocity_[k];
      for (std::size_t k = 0; k < n_; ++k) {
        next_[k] -= (flux_[(k + 1) % n_] - flux_[(k + n_ - 1) % n_]) / (2.0 * dx_);
      }
    }

    if (gamma_ > 0.0 && scheme_ == NoiseScheme::euler_clip) {
      double total = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        flux_[k] = std::sqrt(gamma_ * std::max(z[k], 0.0)) * noise.v_incr[k];
        total += flux_[k] * dx_;
      }
      for (std::size_t k = 0; k < n_; ++k) next_[k] += flux_[k] - z[k] * total;
    }

    double negative = 0.0;
    for (double& v : next_) {
      if (v < 0.0) {
        negative -= v;
        v = 0.0;
      }
    }
    run.clipped_mass += negative * dx_;

    if (gamma_ > 0.0 && scheme_ == NoiseScheme::feller_split) {
      // Feller transition with variance rate gamma / dx per cell:
      // Poisson(2 z dx / (gamma dt)) exponential clumps of mean gamma dt / (2 dx).
      const double clump = gamma_ * dt_ / (2.0 * dx_);
      for (double& v : next_) {
        if (v <= 0.0) continue;
        const auto count = rng.poisson(v / clump);
        v = count == 0 ? 0.0 : rng.gamma(static_cast<double>(count), clump);
      }
    }

    double mass = 0.0;
    for (double v : next_) mass += v;
    mass *= dx_;
    if (std::abs(mass - 1.0) > 1e-6) ++run.mass_drift_warnings;
    if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericError("solve_density: field lost all mass", mass);
    for (std::size_t k = 0; k < n_; ++k) z[k] = next_[k] / mass;
  }

 private:
  std::size_t n_;
  double dx_, gamma_, dt_;
  NoiseScheme scheme_;
  double diffusion_;
  std::vector<double> hconv_, next_, flux_, velocity_;
};

double boundary_mass(const DensityField& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (std::abs(f.x(k)) >= f.half_width - 0.5) s += f.values[k];
  }
  return s * f.dx;
}

}  // namespace

SpdeRun solve_density(const DensityField& initial, const KernelSpec& kernel, double gamma, double horizon, double dt,
                      Rng& rng, std::span<const double> record_times, NoiseScheme scheme) {
  if (!(kernel.epsilon() > 0.0)) throw ArgumentError("solve_density: requires eps > 0");
  if (!(gamma >= 0.0)) throw ArgumentError("solve_density: gamma must be >= 0");
  if (!(dt > 0.0)) throw ArgumentError("solve_density: dt must be > 0");
  const double bound = stability_bound(kernel, initial.dx);
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "solve_density: dt = " << dt << " exceeds the stability bound; use dt <= " << bound;
    throw StabilityError(os.str(), bound);
  }
  for (std::size_t k = 0; k < record_times.size(); ++k) {
    if (record_times[k] < 0.0 || record_times[k] > horizon || (k > 0 && record_times[k] < record_times[k - 1])) {
      throw ArgumentError("solve_density: record times must be sorted within [0, horizon]");
    }
  }

  SpdeRun run;
  DensityField field = initial;
  field.normalize();
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  const double step_dt = steps > 0 ? horizon / static_cast<double>(steps) : dt;
  Stepper stepper(field, kernel, gamma, step_dt, scheme);

  std::size_t next_record = 0;
  auto record_due = [&] {
    while (next_record < record_times.size() && record_times[next_record] <= field.time + 1e-12) {
      DensityField snap = field;
      snap.time = record_times[next_record];
      run.snapshots.push_back(std::move(snap));
      ++next_record;
    }
  };
  record_due();
  for (std::size_t s = 0; s < steps; ++s) {
    stepper.step(field.values, rng, run);
    field.time = static_cast<double>(s + 1) * step_dt;
    run.max_boundary_mass = std::max(run.max_boundary_mass, boundary_mass(field));
    record_due();
  }
  run.steps = steps;
  if (record_times.empty()) run.snapshots.push_back(field);
  return run;
}

double density_moments(const DensityField& field, const std::function<double(double)>& phi) {
  double s = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) s += phi(field.x(k)) * field.values[k];
  return s * field.dx;
}

double density_moments(const DensityField& field, const TestFunction& phi) {
  return density_moments(field, [&](double x) { return phi(x); });
}

}  // namespace fve
