#pragma once

// Environment kernel h, its autocorrelation rho(x) = int h(y - x) h(y) dy,
// and exact-in-law Gaussian increments of the correlated particle motion
//
//   dx_i = eps dB_i + int h(y - x_i) W(dt, dy),
//
// whose covariance between particles i and j is rho(x_i - x_j) + eps^2 1{i = j}.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fve/random.hpp"

namespace fve {

class KernelSpec {
 public:
  /// h(x) = amplitude * exp(-x^2 / (2 bandwidth^2)).
  struct Gaussian {
    double amplitude = 1.0;
    double bandwidth = 1.0;
  };
  /// Piecewise-linear h through (x, h) with strictly increasing x; zero outside.
  struct Tabulated {
    std::vector<double> x;
    std::vector<double> h;
  };

  static KernelSpec gaussian(double amplitude, double bandwidth, double epsilon);
  static KernelSpec tabulated(std::vector<double> x, std::vector<double> h, double epsilon);
  /// Two-column text file "x h(x)"; '#' starts a comment.
  static KernelSpec load_tabulated(const std::filesystem::path& path, double epsilon);

  bool is_gaussian() const noexcept { return std::holds_alternative<Gaussian>(family_); }
  const Gaussian* gaussian_params() const noexcept { return std::get_if<Gaussian>(&family_); }
  const Tabulated* table() const noexcept { return std::get_if<Tabulated>(&family_); }
  std::string family_name() const { return is_gaussian() ? "gaussian" : "tabulated"; }

  double epsilon() const noexcept { return epsilon_; }
  double h(double x) const;
  /// Autocorrelation; closed form for the gaussian family, interpolated from a
  /// quadrature lag table for tabulated kernels.
  double rho(double x) const;
  /// Direct adaptive quadrature of the defining integral (tabulated only;
  /// the gaussian family returns the closed form).
  double rho_by_quadrature(double x) const;
  double rho_eps() const { return epsilon_ * epsilon_ + rho(0.0); }

 private:
  struct LagTable {
    double step = 0.0;
    std::vector<double> values;  // rho(k * step), k = 0..n-1; zero beyond
  };

  KernelSpec(std::variant<Gaussian, Tabulated> family, double epsilon);
  void build_lag_table();

  std::variant<Gaussian, Tabulated> family_;
  double epsilon_ = 0.0;
  std::shared_ptr<const LagTable> lags_;
};

double rho(const KernelSpec& kernel, double x);
double rho_eps(const KernelSpec& kernel);

/// Covariance rate matrix of m particles: rho(x_i - x_j) + eps^2 1{i = j}.
struct CovarianceMatrix {
  Eigen::MatrixXd entries;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries.rows()); }
};

CovarianceMatrix covariance_matrix(const KernelSpec& kernel, std::span<const double> positions);

/// Eigenvalue tolerance for an m-particle covariance: 1e-9 * rho_eps * m.
double eigen_tolerance(const KernelSpec& kernel, std::size_t m);

enum class FactorMethod { automatic, eigen, pivoted_cholesky };

/// Square-root factor of the common-noise covariance. Particles at bitwise
/// equal positions share a row, so with eps = 0 they receive identical
/// increments. The individual noise eps dB_i is added separately.
struct NoiseFactor {
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  std::vector<std::uint32_t> group;  // particle -> row of `loadings`
  RowMatrix loadings;                // distinct positions x rank
  double epsilon = 0.0;
  double clamped = 0.0;  // magnitude of negative spectrum / residual discarded

  std::size_t rank() const noexcept { return static_cast<std::size_t>(loadings.cols()); }
  std::size_t distinct() const noexcept { return static_cast<std::size_t>(loadings.rows()); }
};

/// Factor rho(x_i - x_j) over the distinct positions. Eigenvalues (or pivoted
/// residuals) in [-tol, 0) are clamped to zero; anything below -tol throws
/// NumericError carrying the offending value.
NoiseFactor factor_noise(const KernelSpec& kernel, std::span<const double> positions,
                         FactorMethod method = FactorMethod::automatic);

/// out_i = sqrt(dt) * (loadings[group_i] . xi + eps z_i). Draws xi first, then z.
void draw_increment(const NoiseFactor& factor, double dt, Rng& rng, std::span<double> out);

/// Centered normal draw with covariance dt * covariance_matrix(positions).
std::vector<double> sample_joint_increment(const KernelSpec& kernel, std::span<const double> positions,
                                           double dt, Rng& rng,
                                           FactorMethod method = FactorMethod::automatic);

}  // namespace fve
