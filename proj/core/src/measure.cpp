#include "fve/measure.hpp"

#include <algorithm>

#include "fve/error.hpp"

namespace fve {

EmpiricalMeasure EmpiricalMeasure::from_particles(std::span<const double> positions, double particle_mass) {
  std::vector<double> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  EmpiricalMeasure mu;
  for (double x : sorted) {
    if (!mu.atoms.empty() && mu.atoms.back().position == x) {
      mu.atoms.back().mass += particle_mass;
    } else {
      mu.atoms.push_back({x, particle_mass});
    }
  }
  mu.total_mass = particle_mass * static_cast<double>(positions.size());
  return mu;
}

double EmpiricalMeasure::integrate(const TestFunction& phi) const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass * phi(a.position);
  return s;
}

double EmpiricalMeasure::normalized_integral(const TestFunction& phi) const {
  if (!(total_mass > 0.0)) throw ArgumentError("normalized_integral: zero measure");
  return integrate(phi) / total_mass;
}

EmpiricalMeasure EmpiricalMeasure::normalized() const {
  if (!(total_mass > 0.0)) throw ArgumentError("normalized: zero measure");
  EmpiricalMeasure out = *this;
  for (auto& a : out.atoms) a.mass /= total_mass;
  out.total_mass = 1.0;
  return out;
}

double tensor_u_statistic(std::span<const double> positions, const TestFunction& phi, int order) {
  const double m = static_cast<double>(positions.size());
  if (order < 1 || order > 3) throw ArgumentError("tensor_u_statistic: order must be 1, 2 or 3");
  if (m < order) throw ArgumentError("tensor_u_statistic: fewer particles than order");
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  for (double x : positions) {
    const double v = phi(x);
    p1 += v;
    p2 += v * v;
    p3 += v * v * v;
  }
  switch (order) {
    case 1:
      return p1 / m;
    case 2:
      return (p1 * p1 - p2) / (m * (m - 1.0));
    default:
      return (p1 * p1 * p1 - 3.0 * p1 * p2 + 2.0 * p3) / (m * (m - 1.0) * (m - 2.0));
  }
}

}  // namespace fve
