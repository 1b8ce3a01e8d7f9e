#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fve/kernel.hpp"
#include "fve/random.hpp"

namespace fve {

/// One Euler step of the correlated particle motion over [t0, t1], with the
/// covariance frozen at the start positions, realized lazily so that
/// resampling or branching events inside the step can read positions at
/// their exact times.
///
/// The common noise is the r-dimensional Brownian path S(t) seen through the
/// factor rows; it is sampled only at the times positions are read. With
/// eps > 0, each particle's individual increment is drawn when it is read and
/// the particle is re-anchored there. With eps = 0 particles are never
/// re-anchored, so copies share anchors and stay bitwise equal.
class DiffusionWindow {
 public:
  DiffusionWindow(const KernelSpec& kernel, std::span<const double> positions, double t0, Rng& rng,
                  FactorMethod method = FactorMethod::automatic);

  std::size_t size() const noexcept { return anchors_.size(); }
  double start_time() const noexcept { return mark_time_.front(); }
  const NoiseFactor& factor() const noexcept { return factor_; }

  /// Position of particle j at time t. Calls must have non-decreasing t.
  double position(std::size_t j, double t);
  /// Particle `to` assumes the value of particle `from` at time t and moves
  /// with it through the common noise afterwards.
  void copy(std::size_t from, std::size_t to, double t);
  /// Appends a copy of `from` taken at time t; returns its index.
  std::size_t duplicate(std::size_t from, double t);
  /// Removes particle j by moving the last particle into slot j.
  void remove(std::size_t j);
  /// Realizes every particle at t1 into `out` (resized).
  void finish(double t1, std::vector<double>& out);

 private:
  struct Anchor {
    double base;
    double time;
    std::uint32_t row;
    std::uint32_t mark;
  };

  void advance(double t);
  double realize(Anchor& a, double t);

  NoiseFactor factor_;
  Rng* rng_;
  std::vector<Anchor> anchors_;
  std::vector<double> mark_time_;
  std::vector<double> path_;  // cumulative common noise, rank values per mark
};

}  // namespace fve
