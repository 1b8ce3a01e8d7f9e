#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fve/dual.hpp"
#include "fve/error.hpp"
#include "fve/spde.hpp"
#include "fve/stats.hpp"

namespace {

const fve::KernelSpec kKernel = fve::KernelSpec::gaussian(1.0, 1.0, 0.5);

double normal_pdf(double x, double var) { return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var); }

TEST(DensityField, GridAndMass) {
  const auto f = fve::DensityField::normal(8.0, 0.05, 0.0, 1.0);
  EXPECT_EQ(f.size(), 320u);
  EXPECT_DOUBLE_EQ(f.x(0), -8.0);
  EXPECT_NEAR(f.mass(), 1.0, 1e-12);
  EXPECT_THROW(fve::DensityField::on_grid(8.0, 0.3), fve::ArgumentError);
}

TEST(DensityMoments, Examples) {
  const auto f = fve::DensityField::normal(8.0, 0.05, 0.0, 0.7);
  EXPECT_NEAR(fve::density_moments(f, fve::TestFunction::constant(1.0)), 1.0, 1e-9);
  const auto bump = fve::DensityField::normal(8.0, 0.05, 0.0, 0.1);
  EXPECT_NEAR(fve::density_moments(bump, fve::TestFunction::identity()), 0.0, 1e-12);
  // Quadrature oracle for the second moment of the discretized normal.
  EXPECT_NEAR(fve::density_moments(f, fve::TestFunction::square()), 0.49, 1e-6);
  EXPECT_NEAR(fve::density_moments(f, [](double x) { return x * x; }), 0.49, 1e-6);
}

TEST(NoiseSlice, IndependentSheetsWithCellVariance) {
  fve::Rng rng(1);
  const auto s = fve::NoiseSlice::draw(20000, 0.01, 0.05, rng);
  ASSERT_EQ(s.v_incr.size(), 20000u);
  ASSERT_EQ(s.w_incr.size(), 20000u);
  const auto v = fve::estimate_of(s.v_incr);
  fve::RunningStats sq;
  for (double x : s.v_incr) sq.push(x * x);
  EXPECT_NEAR(v.mean, 0.0, 4.0 * v.std_error);
  EXPECT_NEAR(sq.mean(), 0.01 / 0.05, 4.0 * sq.estimate().std_error);
  EXPECT_LT(std::abs(fve::correlation(s.v_incr, s.w_incr)), 4.0 / std::sqrt(20000.0));
}

TEST(SolveDensity, RefusesUnstableStep) {
  const auto f = fve::DensityField::normal(8.0, 0.05, 0.0, 0.5);
  fve::Rng rng(2);
  const double bound = fve::stability_bound(kKernel, 0.05);
  EXPECT_NEAR(bound, 0.5 * 0.05 * 0.05 / (2.0 * kKernel.rho_eps()), 1e-15);
  try {
    fve::solve_density(f, kKernel, 1.0, 0.1, 2.0 * bound, rng);
    FAIL() << "expected StabilityError";
  } catch (const fve::StabilityError& e) {
    EXPECT_NEAR(e.suggested_dt(), bound, 1e-15);
  }
  EXPECT_THROW(fve::solve_density(f, fve::KernelSpec::gaussian(1.0, 1.0, 0.0), 1.0, 0.1, 1e-5, rng),
               fve::ArgumentError);
}

TEST(SolveDensity, MassIsOneAfterEveryRecord) {
  const auto f = fve::DensityField::normal(8.0, 0.1, 0.0, 0.5);
  fve::Rng rng(3);
  const std::vector<double> times{0.05, 0.1, 0.2};
  for (auto scheme : {fve::NoiseScheme::feller_split, fve::NoiseScheme::euler_clip}) {
    const auto run = fve::solve_density(f, kKernel, 1.0, 0.2, fve::stability_bound(kKernel, 0.1), rng, times, scheme);
    ASSERT_EQ(run.snapshots.size(), 3u);
    for (const auto& s : run.snapshots) {
      EXPECT_NEAR(s.mass(), 1.0, 1e-9);
      for (double v : s.values) EXPECT_GE(v, 0.0);
    }
    EXPECT_NEAR(run.snapshots.back().time, 0.2, 1e-12);
  }
}

double heat_error(double dx) {
  const auto k = fve::KernelSpec::gaussian(0.0, 1.0, 1.0);
  const double sd0 = 0.5, t = 0.25;
  const auto f = fve::DensityField::normal(8.0, dx, 0.0, sd0);
  fve::Rng rng(4);
  const auto run = fve::solve_density(f, k, 0.0, t, 0.5 * fve::stability_bound(k, dx), rng);
  const auto& g = run.snapshots.back();
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(g.values[i] - normal_pdf(g.x(i), sd0 * sd0 + t)));
  return err;
}

TEST(SolveDensity, HeatLimitConvergesAtSecondOrder) {
  const double e1 = heat_error(0.1), e2 = heat_error(0.05), e3 = heat_error(0.025);
  EXPECT_LT(e1, 2e-3);
  EXPECT_GE(std::log2(e1 / e2), 1.8);
  EXPECT_GE(std::log2(e2 / e3), 1.8);
}

TEST(SolveDensity, EnsembleSecondMoment) {
  const double dx = 0.1, t = 0.25;
  const auto f = fve::DensityField::normal(8.0, dx, 0.0, 0.5);
  const double dt = fve::stability_bound(kKernel, dx);
  fve::RunningStats st;
  for (int r = 0; r < 200; ++r) {
    fve::Rng rng = fve::Rng::for_replicate(5, r);
    const auto run = fve::solve_density(f, kKernel, 1.0, t, dt, rng);
    st.push(fve::density_moments(run.snapshots.back(), fve::TestFunction::square()));
  }
  const double exact = fve::first_moment_exact(fve::InitialLaw::normal(0.0, 0.5), fve::TestFunction::square(), t, kKernel);
  EXPECT_NEAR(exact, 0.25 + kKernel.rho_eps() * 0.25, 1e-12);
  EXPECT_NEAR(st.mean(), exact, 3.0 * st.estimate().std_error + 0.05 * exact);
}

TEST(SolveDensity, LongRunStaysFinite) {
  const double dx = 0.2;
  const double dt = fve::stability_bound(kKernel, dx);
  const auto f = fve::DensityField::normal(8.0, dx, 0.0, 0.5);
  fve::Rng rng(6);
  const auto run = fve::solve_density(f, kKernel, 1.0, 1e5 * dt, dt, rng);
  EXPECT_GE(run.steps, 100000u);
  for (double v : run.snapshots.back().values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(run.snapshots.back().mass(), 1.0, 1e-9);
}

TEST(SolveDensity, Deterministic) {
  const auto f = fve::DensityField::normal(8.0, 0.1, 0.0, 0.5);
  const double dt = fve::stability_bound(kKernel, 0.1);
  fve::Rng a(7), b(7);
  const auto x = fve::solve_density(f, kKernel, 1.0, 0.1, dt, a);
  const auto y = fve::solve_density(f, kKernel, 1.0, 0.1, dt, b);
  EXPECT_EQ(x.snapshots.back().values, y.snapshots.back().values);
}

}  // namespace
