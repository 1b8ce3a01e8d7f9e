#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fve {

/// Monte Carlo estimate: sample mean and its standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;

  double lower95() const noexcept { return mean - 1.96 * std_error; }
  double upper95() const noexcept { return mean + 1.96 * std_error; }
};

/// Mean and standard error (n-1 normalization) of `samples`.
Estimate estimate_of(std::span<const double> samples);

/// Weighted mean sum(w x)/sum(w), summed in the given order, with a
/// ratio-estimator standard error.
Estimate weighted_estimate_of(std::span<const double> values, std::span<const double> weights);

/// True when the two 95% intervals, each widened by `budget` (absolute), overlap.
bool ci_overlap(const Estimate& a, const Estimate& b, double budget = 0.0);

/// Total-variation distance between two probability vectors of equal length.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Sample Pearson correlation.
double correlation(std::span<const double> x, std::span<const double> y);

/// Running mean/variance (Welford).
class RunningStats {
 public:
  void push(double x) noexcept;
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;  // n-1 normalization
  Estimate estimate() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace fve
