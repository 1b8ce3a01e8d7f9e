#include <gtest/gtest.h>

#include <vector>

#include "fve/measure.hpp"
#include "fve/random.hpp"

namespace {

double brute_force(const std::vector<double>& x, const fve::TestFunction& phi, int order) {
  const std::size_t m = x.size();
  double s = 0.0, count = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (order == 1) {
      s += phi(x[i]);
      count += 1.0;
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      if (order == 2) {
        s += phi(x[i]) * phi(x[j]);
        count += 1.0;
        continue;
      }
      for (std::size_t k = 0; k < m; ++k) {
        if (k == i || k == j) continue;
        s += phi(x[i]) * phi(x[j]) * phi(x[k]);
        count += 1.0;
      }
    }
  }
  return s / count;
}

TEST(Measure, FromParticlesMergesEqualPositions) {
  const std::vector<double> x{1.0, -2.0, 1.0, 3.0, 1.0};
  const auto mu = fve::EmpiricalMeasure::from_particles(x, 0.2);
  ASSERT_EQ(mu.atom_count(), 3u);
  EXPECT_EQ(mu.atoms[0].position, -2.0);
  EXPECT_NEAR(mu.atoms[1].mass, 0.6, 1e-15);
  EXPECT_NEAR(mu.total_mass, 1.0, 1e-12);
}

TEST(Measure, Integrals) {
  const std::vector<double> x{1.0, 3.0};
  const auto mu = fve::EmpiricalMeasure::from_particles(x, 0.25);
  EXPECT_DOUBLE_EQ(mu.integrate(fve::TestFunction::identity()), 1.0);
  EXPECT_DOUBLE_EQ(mu.normalized_integral(fve::TestFunction::identity()), 2.0);
  EXPECT_DOUBLE_EQ(mu.normalized().total_mass, 1.0);
}

TEST(Measure, NormalizationCommutesWithIntegration) {
  fve::Rng rng(1);
  std::vector<double> x(37);
  for (double& v : x) v = rng.normal();
  const auto mu = fve::EmpiricalMeasure::from_particles(x, 1.0 / 50.0);
  const auto phi = fve::TestFunction::bump(1.0, 0.2, 0.9);
  EXPECT_NEAR(mu.normalized().integrate(phi), mu.integrate(phi) / mu.total_mass, 1e-14);
}

TEST(Measure, UStatisticMatchesBruteForce) {
  fve::Rng rng(2);
  std::vector<double> x(9);
  for (double& v : x) v = rng.normal();
  x.push_back(x[2]);
  for (const auto& phi : {fve::TestFunction::bump(1.0, 0.0, 1.0), fve::TestFunction::polynomial(0.5, 1.0, -0.3)}) {
    for (int order = 1; order <= 3; ++order) {
      EXPECT_NEAR(fve::tensor_u_statistic(x, phi, order), brute_force(x, phi, order), 1e-12) << order;
    }
  }
}

}  // namespace
