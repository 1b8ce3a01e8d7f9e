#include "fve/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fve/error.hpp"

namespace fve {

Estimate estimate_of(std::span<const double> samples) {
  RunningStats acc;
  for (double x : samples) acc.push(x);
  return acc.estimate();
}

Estimate weighted_estimate_of(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw ArgumentError("weighted_estimate_of: size mismatch");
  Estimate e;
  e.n = values.size();
  if (values.empty()) return e;
  double sw = 0.0;
  double swx = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sw += weights[k];
    swx += weights[k] * values[k];
  }
  if (sw <= 0.0) throw ArgumentError("weighted_estimate_of: non-positive total weight");
  e.mean = swx / sw;
  if (values.size() > 1) {
    const double n = static_cast<double>(values.size());
    const double wbar = sw / n;
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double r = weights[k] * (values[k] - e.mean);
      s += r * r;
    }
    e.std_error = std::sqrt(s / (n * (n - 1.0))) / wbar;
  }
  return e;
}

bool ci_overlap(const Estimate& a, const Estimate& b, double budget) {
  return std::abs(a.mean - b.mean) <= 1.96 * (a.std_error + b.std_error) + budget;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("correlation: bad sizes");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

void RunningStats::push(double x) noexcept {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::variance() const noexcept {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

Estimate RunningStats::estimate() const noexcept {
  Estimate e;
  e.n = n_;
  e.mean = mean_;
  e.std_error = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  return e;
}

}  // namespace fve
