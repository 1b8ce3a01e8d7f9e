#include "fve/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fve/error.hpp"

namespace fve {

namespace {

constexpr std::size_t kMaxLagTable = 1u << 18;
constexpr std::size_t kEigenMaxDistinct = 48;

double interpolate_table(const KernelSpec::Tabulated& t, double x) {
  if (x < t.x.front() || x > t.x.back()) return 0.0;
  auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  if (it == t.x.end()) return t.h.back();
  const std::size_t k = static_cast<std::size_t>(it - t.x.begin());
  const double x0 = t.x[k - 1], x1 = t.x[k];
  const double w = (x - x0) / (x1 - x0);
  return (1.0 - w) * t.h[k - 1] + w * t.h[k];
}

}  // namespace

KernelSpec::KernelSpec(std::variant<Gaussian, Tabulated> family, double epsilon)
    : family_(std::move(family)), epsilon_(epsilon) {
  if (!std::isfinite(epsilon_) || epsilon_ < 0.0) throw KernelInvalid("kernel: epsilon must be finite and >= 0");
}

KernelSpec KernelSpec::gaussian(double amplitude, double bandwidth, double epsilon) {
  if (!std::isfinite(amplitude)) throw KernelInvalid("gaussian kernel: amplitude must be finite");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw KernelInvalid("gaussian kernel: bandwidth must be finite and > 0");
  }
  return KernelSpec(Gaussian{amplitude, bandwidth}, epsilon);
}

KernelSpec KernelSpec::tabulated(std::vector<double> x, std::vector<double> h, double epsilon) {
  if (x.size() != h.size() || x.size() < 2) {
    throw KernelInvalid("tabulated kernel: need at least two (x, h) rows of equal length");
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(h[k])) throw KernelInvalid("tabulated kernel: non-finite entry");
    if (k > 0 && !(x[k] > x[k - 1])) throw KernelInvalid("tabulated kernel: x must be strictly increasing");
  }
  KernelSpec spec(Tabulated{std::move(x), std::move(h)}, epsilon);
  const double l2 = spec.rho_by_quadrature(0.0);
  if (!std::isfinite(l2)) throw KernelInvalid("tabulated kernel: quadrature of h^2 is not finite");
  spec.build_lag_table();
  return spec;
}

KernelSpec KernelSpec::load_tabulated(const std::filesystem::path& path, double epsilon) {
  std::ifstream in(path);
  if (!in) throw KernelInvalid("tabulated kernel: cannot open " + path.string());
  std::vector<double> xs, hs;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream row(line);
    double x = 0.0, h = 0.0;
    if (!(row >> x)) continue;
    if (!(row >> h)) throw KernelInvalid("tabulated kernel: row without h value in " + path.string());
    xs.push_back(x);
    hs.push_back(h);
  }
  return tabulated(std::move(xs), std::move(hs), epsilon);
}

double KernelSpec::h(double x) const {
  if (const auto* g = gaussian_params()) {
    return g->amplitude * std::exp(-x * x / (2.0 * g->bandwidth * g->bandwidth));
  }
  return interpolate_table(*table(), x);
}

double KernelSpec::rho(double x) const {
  if (const auto* g = gaussian_params()) {
    const double b = g->bandwidth;
    return g->amplitude * g->amplitude * b * std::sqrt(std::numbers::pi) * std::exp(-x * x / (4.0 * b * b));
  }
  const double ax = std::abs(x);
  const auto& lag = *lags_;
  const double u = ax / lag.step;
  const std::size_t k = static_cast<std::size_t>(u);
  if (k + 1 >= lag.values.size()) return 0.0;
  const double w = u - static_cast<double>(k);
  return (1.0 - w) * lag.values[k] + w * lag.values[k + 1];
}

double KernelSpec::rho_by_quadrature(double x) const {
  const auto* t = table();
  if (t == nullptr) return rho(x);
  // Integrand h(y - x) h(y) is piecewise quadratic between the knots of both
  // factors; integrate each piece.
  const double lo = std::max(t->x.front(), t->x.front() + x);
  const double hi = std::min(t->x.back(), t->x.back() + x);
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo, hi};
  for (double k : t->x) {
    if (k > lo && k < hi) cuts.push_back(k);
    if (k + x > lo && k + x < hi) cuts.push_back(k + x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto integrand = [&](double y) { return interpolate_table(*t, y - x) * interpolate_table(*t, y); };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, cuts[k], cuts[k + 1], 5,
                                                                            1e-13);
  }
  return total;
}

void KernelSpec::build_lag_table() {
  const auto* t = table();
  double min_gap = t->x.back() - t->x.front();
  for (std::size_t k = 1; k < t->x.size(); ++k) min_gap = std::min(min_gap, t->x[k] - t->x[k - 1]);
  const double span = t->x.back() - t->x.front();
  double step = min_gap / 16.0;
  if (span / step > static_cast<double>(kMaxLagTable)) step = span / static_cast<double>(kMaxLagTable);
  auto lag = std::make_shared<LagTable>();
  lag->step = step;
  const std::size_t n = static_cast<std::size_t>(std::ceil(span / step)) + 2;
  lag->values.resize(n);
  for (std::size_t k = 0; k < n; ++k) lag->values[k] = rho_by_quadrature(static_cast<double>(k) * step);
  lags_ = std::move(lag);
}

double rho(const KernelSpec& kernel, double x) { return kernel.rho(x); }

double rho_eps(const KernelSpec& kernel) { return kernel.rho_eps(); }

CovarianceMatrix covariance_matrix(const KernelSpec& kernel, std::span<const double> positions) {
  const auto m = static_cast<Eigen::Index>(positions.size());
  CovarianceMatrix c{Eigen::MatrixXd(m, m)};
  const double r0 = kernel.rho_eps();
  for (Eigen::Index i = 0; i < m; ++i) {
    c.entries(i, i) = r0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel.rho(positions[i] - positions[j]);
      c.entries(i, j) = v;
      c.entries(j, i) = v;
    }
  }
  return c;
}

double eigen_tolerance(const KernelSpec& kernel, std::size_t m) {
  return 1e-9 * kernel.rho_eps() * static_cast<double>(m);
}

namespace {

void eigen_factor(const KernelSpec& kernel, std::span<const double> distinct, double tol, NoiseFactor& out) {
  const auto n = static_cast<Eigen::Index>(distinct.size());
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = kernel.rho(0.0);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel.rho(distinct[i] - distinct[j]);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r);
  if (solver.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed", 0.0);
  const auto& values = solver.eigenvalues();
  if (n > 0 && values(0) < -tol) {
    throw NumericError("covariance not positive semidefinite: eigenvalue below -tol_eig", values(0));
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (values(k) > 0.0) {
      keep.push_back(k);
    } else {
      out.clamped += -values(k);
    }
  }
  out.loadings.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto k = keep[c];
    Eigen::VectorXd v = solver.eigenvectors().col(k);
    // Sign convention: the largest-magnitude entry (first on ties) is positive.
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg)) * (1.0 + 1e-12)) arg = i;
    }
    if (v(arg) < 0.0) v = -v;
    out.loadings.col(static_cast<Eigen::Index>(c)) = v * std::sqrt(values(k));
  }
}

void pivoted_cholesky_factor(const KernelSpec& kernel, std::span<const double> distinct, double tol,
                             NoiseFactor& out) {
  const std::size_t n = distinct.size();
  std::vector<double> residual(n, kernel.rho(0.0));
  std::vector<char> used(n, 0);
  std::vector<double> cols;  // column-major, n rows
  std::size_t rank = 0;
  while (rank < n) {
    std::size_t p = n;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i] && residual[i] > best) {
        best = residual[i];
        p = i;
      }
    }
    if (p == n || best <= tol) break;
    const double pivot = std::sqrt(best);
    cols.resize((rank + 1) * n, 0.0);
    double* col = cols.data() + rank * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      if (i == p) {
        col[i] = pivot;
        continue;
      }
      double c = kernel.rho(distinct[i] - distinct[p]);
      for (std::size_t l = 0; l < rank; ++l) c -= cols[l * n + i] * cols[l * n + p];
      const double v = c / pivot;
      col[i] = v;
      residual[i] -= v * v;
    }
    used[p] = 1;
    residual[p] = 0.0;
    ++rank;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    worst = std::min(worst, residual[i]);
    out.clamped = std::max(out.clamped, std::abs(residual[i]));
  }
  if (worst < -tol) {
    throw NumericError("covariance not positive semidefinite: pivoted residual below -tol_eig", worst);
  }
  out.loadings = Eigen::Map<const Eigen::MatrixXd>(cols.data(), static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(rank));
}

}  // namespace

NoiseFactor factor_noise(const KernelSpec& kernel, std::span<const double> positions, FactorMethod method) {
  NoiseFactor out;
  out.epsilon = kernel.epsilon();
  const std::size_t m = positions.size();
  out.group.resize(m);

  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return positions[a] < positions[b] || (positions[a] == positions[b] && a < b);
  });
  std::vector<double> distinct;
  distinct.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double x = positions[order[k]];
    if (!std::isfinite(x)) throw NumericError("factor_noise: non-finite position", x);
    if (distinct.empty() || x != distinct.back()) distinct.push_back(x);
    out.group[order[k]] = static_cast<std::uint32_t>(distinct.size() - 1);
  }

  const double tol = eigen_tolerance(kernel, m);
  if (kernel.rho(0.0) <= 0.0 || distinct.empty()) {
    out.loadings.resize(static_cast<Eigen::Index>(distinct.size()), 0);
    return out;
  }
  if (method == FactorMethod::automatic) {
    method = distinct.size() <= kEigenMaxDistinct ? FactorMethod::eigen : FactorMethod::pivoted_cholesky;
  }
  if (method == FactorMethod::eigen) {
    eigen_factor(kernel, distinct, tol, out);
  } else {
    pivoted_cholesky_factor(kernel, distinct, tol, out);
  }
  return out;
}

void draw_increment(const NoiseFactor& factor, double dt, Rng& rng, std::span<double> out) {
  if (out.size() != factor.group.size()) throw ArgumentError("draw_increment: output size mismatch");
  const std::size_t r = factor.rank();
  const double scale = std::sqrt(dt);
  Eigen::VectorXd xi(static_cast<Eigen::Index>(r));
  for (std::size_t k = 0; k < r; ++k) xi(static_cast<Eigen::Index>(k)) = rng.normal();
  const Eigen::VectorXd common = factor.loadings * xi;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * common(factor.group[i]);
  if (factor.epsilon > 0.0) {
    for (double& v : out) v += scale * factor.epsilon * rng.normal();
  }
}

std::vector<double> sample_joint_increment(const KernelSpec& kernel, std::span<const double> positions,
                                           double dt, Rng& rng, FactorMethod method) {
  if (!(dt > 0.0)) throw ArgumentError("sample_joint_increment: dt must be > 0");
  const NoiseFactor factor = factor_noise(kernel, positions, method);
  std::vector<double> out(positions.size());
  draw_increment(factor, dt, rng, out);
  return out;
}

}  // namespace fve
