#include "fve/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "fve/dual.hpp"
#include "fve/error.hpp"
#include "fve/stats.hpp"

namespace fve {

double atom_statistic(const EmpiricalMeasure& mu) {
  double s = 0.0;
  for (const Atom& a : mu.atoms) s += a.mass * a.mass;
  return s;
}

std::vector<double> default_eps_grid() {
  std::vector<double> grid(32);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = std::pow(10.0, -3.0 + 3.0 * static_cast<double>(k) / 31.0);
  }
  grid.back() = 1.0;
  return grid;
}

std::vector<double> weak_atomic_profile(const EmpiricalMeasure& mu, std::span<const double> eps_grid) {
  std::vector<double> out(eps_grid.size(), 0.0);
  if (eps_grid.empty()) return out;
  for (double e : eps_grid) {
    if (!(e > 0.0)) throw ArgumentError("weak_atomic_profile: eps must be > 0");
  }
  const double widest = *std::max_element(eps_grid.begin(), eps_grid.end());
  std::vector<Atom> sorted;
  const std::vector<Atom>* source = &mu.atoms;
  const auto by_position = [](const Atom& a, const Atom& b) { return a.position < b.position; };
  if (!std::is_sorted(mu.atoms.begin(), mu.atoms.end(), by_position)) {
    sorted = mu.atoms;
    std::sort(sorted.begin(), sorted.end(), by_position);
    source = &sorted;
  }
  const std::vector<Atom>& atoms = *source;
  double diagonal = 0.0;
  for (const Atom& a : atoms) diagonal += a.mass * a.mass;
  std::fill(out.begin(), out.end(), diagonal);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      const double d = atoms[j].position - atoms[i].position;
      if (d >= widest) break;
      const double w = 2.0 * atoms[i].mass * atoms[j].mass;
      for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (d < eps_grid[k]) out[k] += w * (1.0 - d / eps_grid[k]);
      }
    }
  }
  return out;
}

AtomReport atom_report(const EmpiricalMeasure& mu, std::span<const double> eps_grid) {
  AtomReport r;
  r.atom_statistic = atom_statistic(mu);
  r.atom_count = mu.atom_count();
  for (const Atom& a : mu.atoms) r.largest_atom = std::max(r.largest_atom, a.mass);
  r.phi_profile = weak_atomic_profile(mu, eps_grid);
  return r;
}

namespace {

struct Cdf {
  std::vector<double> x;
  std::vector<double> cum;

  explicit Cdf(const EmpiricalMeasure& mu) {
    if (!(mu.total_mass > 0.0)) throw ArgumentError("distance: measure has no mass");
    std::vector<Atom> atoms = mu.atoms;
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
    double acc = 0.0;
    for (const Atom& a : atoms) {
      acc += a.mass;
      x.push_back(a.position);
      cum.push_back(acc / mu.total_mass);
    }
    if (!cum.empty()) cum.back() = 1.0;
  }

  double operator()(double t) const {
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    return it == x.begin() ? 0.0 : cum[static_cast<std::size_t>(it - x.begin()) - 1];
  }
};

// sup_x G(x) - F(x + h) <= h
bool dominated(const Cdf& g, const Cdf& f, double h) {
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    if (g.cum[k] - f(g.x[k] + h) > h) return false;
  }
  for (std::size_t k = 0; k < f.x.size(); ++k) {
    if (g(f.x[k] - h) - f.cum[k] > h) return false;
  }
  return true;
}

}  // namespace

double levy_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  const Cdf f(mu), g(nu);
  auto ok = [&](double h) { return dominated(g, f, h) && dominated(f, g, h); };
  if (ok(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  const Cdf f(mu), g(nu);
  std::vector<double> points = f.x;
  points.insert(points.end(), g.x.begin(), g.x.end());
  std::sort(points.begin(), points.end());
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double gap = points[k + 1] - points[k];
    if (gap > 0.0) w += std::abs(f(points[k]) - g(points[k])) * gap;
  }
  return w;
}

DistanceBracket weak_atomic_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                     std::span<const double> eps_grid) {
  const std::vector<double> a = weak_atomic_profile(mu, eps_grid);
  const std::vector<double> b = weak_atomic_profile(nu, eps_grid);
  DistanceBracket out;
  for (std::size_t k = 0; k < a.size(); ++k) out.profile_sup = std::max(out.profile_sup, std::abs(a[k] - b[k]));
  out.lower = 0.5 * levy_distance(mu, nu) + out.profile_sup;
  out.upper = std::sqrt(wasserstein1(mu, nu)) + out.profile_sup;
  return out;
}

std::size_t count_crossings(std::span<const double> before, std::span<const double> after) {
  if (before.size() != after.size()) throw ArgumentError("count_crossings: size mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < before.size(); ++i) {
    if ((before[i + 1] - before[i]) * (after[i + 1] - after[i]) < 0.0) ++n;
  }
  return n;
}

namespace {

void check_flow_inputs(const KernelSpec& kernel, std::span<const double> points, double horizon, double dt) {
  if (kernel.epsilon() != 0.0) throw ArgumentError("order preservation: kernel must have eps = 0");
  if (!std::is_sorted(points.begin(), points.end())) throw ArgumentError("order preservation: points not sorted");
  if (!(horizon >= 0.0) || !(dt > 0.0)) throw ArgumentError("order preservation: need horizon >= 0, dt > 0");
}

std::size_t step_count(double horizon, double dt) {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

void apply_factor(const NoiseFactor& f, double dt, const std::vector<double>& xi, std::vector<double>& x) {
  const auto r = static_cast<Eigen::Index>(f.rank());
  const Eigen::Map<const Eigen::VectorXd> z(xi.data(), r);
  const Eigen::VectorXd common = f.loadings * z;
  const double s = std::sqrt(dt);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * common(f.group[i]);
}

}  // namespace

OrderRun order_preservation_test(const KernelSpec& kernel, std::span<const double> initial_points, double horizon,
                                 double dt, Rng& rng) {
  check_flow_inputs(kernel, initial_points, horizon, dt);
  OrderRun out;
  std::vector<double> x(initial_points.begin(), initial_points.end());
  out.trajectory.push_back(x);
  const std::size_t steps = step_count(horizon, dt);
  const double h = steps > 0 ? horizon / static_cast<double>(steps) : dt;
  for (std::size_t s = 0; s < steps; ++s) {
    const std::vector<double> inc = sample_joint_increment(kernel, x, h, rng);
    std::vector<double> next = x;
    for (std::size_t i = 0; i < x.size(); ++i) next[i] += inc[i];
    out.crossing_count += count_crossings(x, next);
    x = std::move(next);
    out.trajectory.push_back(x);
  }
  return out;
}

PairedCrossings paired_crossing_counts(const KernelSpec& kernel, std::span<const double> initial_points,
                                       double horizon, double dt, Rng& rng) {
  check_flow_inputs(kernel, initial_points, horizon, dt);
  PairedCrossings out;
  const std::size_t n = initial_points.size();
  std::vector<double> coarse(initial_points.begin(), initial_points.end());
  std::vector<double> fine = coarse;
  const std::size_t steps = step_count(horizon, dt);
  const double h = steps > 0 ? horizon / static_cast<double>(steps) : dt;
  std::vector<double> xa(n), xb(n), xc(n);
  for (std::size_t s = 0; s < steps; ++s) {
    for (double& v : xa) v = rng.normal();
    for (double& v : xb) v = rng.normal();
    for (std::size_t k = 0; k < n; ++k) xc[k] = (xa[k] + xb[k]) / std::sqrt(2.0);

    std::vector<double> next = fine;
    apply_factor(factor_noise(kernel, fine, FactorMethod::eigen), 0.5 * h, xa, next);
    out.fine += count_crossings(fine, next);
    fine = next;
    apply_factor(factor_noise(kernel, fine, FactorMethod::eigen), 0.5 * h, xb, next);
    out.fine += count_crossings(fine, next);
    fine = next;

    next = coarse;
    apply_factor(factor_noise(kernel, coarse, FactorMethod::eigen), h, xc, next);
    out.coarse += count_crossings(coarse, next);
    coarse = std::move(next);
  }
  return out;
}

LineageLawResult lineage_law_test(std::span<const std::size_t> lineage_counts, std::size_t m, double gamma,
                                  double t) {
  if (m < 1) throw ArgumentError("lineage_law_test: m must be >= 1");
  LineageLawResult out;
  out.exact = death_chain_marginal(static_cast<int>(m), gamma, t);
  out.empirical.assign(m, 0.0);
  for (std::size_t d : lineage_counts) {
    if (d < 1 || d > m) throw ArgumentError("lineage_law_test: lineage count outside 1..m");
    out.empirical[d - 1] += 1.0;
  }
  if (!lineage_counts.empty()) {
    for (double& p : out.empirical) p /= static_cast<double>(lineage_counts.size());
  }
  out.tv_distance = tv_distance(out.empirical, out.exact);
  out.pass = lineage_counts.size() >= 2000 && out.tv_distance < 0.05;
  return out;
}

}  // namespace fve
