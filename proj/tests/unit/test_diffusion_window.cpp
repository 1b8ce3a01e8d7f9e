#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fve/diffusion_window.hpp"
#include "fve/stats.hpp"

namespace {

TEST(DiffusionWindow, PureCommonNoiseCopiesStayEqual) {
  const fve::KernelSpec k = fve::KernelSpec::gaussian(1.0, 1.0, 0.0);
  const std::vector<double> x{-1.0, 0.0, 0.5, 2.0};
  fve::Rng rng(1);
  fve::DiffusionWindow w(k, x, 0.0, rng);
  w.copy(0, 2, 0.3);
  const std::size_t extra = w.duplicate(3, 0.6);
  EXPECT_EQ(extra, 4u);
  std::vector<double> out;
  w.finish(1.0, out);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_EQ(out[0], out[2]);
  EXPECT_EQ(out[3], out[4]);
  EXPECT_NE(out[0], out[1]);
}

TEST(DiffusionWindow, IndividualNoiseSeparatesCopies) {
  const fve::KernelSpec k = fve::KernelSpec::gaussian(1.0, 1.0, 0.5);
  const std::vector<double> x{0.0, 1.0};
  fve::Rng rng(2);
  fve::DiffusionWindow w(k, x, 0.0, rng);
  const double at_copy = w.position(0, 0.4);
  w.copy(0, 1, 0.4);
  EXPECT_EQ(w.position(1, 0.4), at_copy);
  std::vector<double> out;
  w.finish(1.0, out);
  EXPECT_NE(out[0], out[1]);
}

TEST(DiffusionWindow, RemoveMovesLastIntoSlot) {
  const fve::KernelSpec k = fve::KernelSpec::gaussian(1.0, 1.0, 0.0);
  const std::vector<double> x{0.0, 5.0, 10.0};
  fve::Rng rng(3);
  fve::DiffusionWindow w(k, x, 0.0, rng);
  w.remove(0);
  EXPECT_EQ(w.size(), 2u);
  EXPECT_EQ(w.position(0, 0.0), 10.0);
}

TEST(DiffusionWindow, MarginalVarianceThroughCopy) {
  // A particle that copies another mid-window has moved rho_eps (t1 - t0) in total.
  const fve::KernelSpec k = fve::KernelSpec::gaussian(1.0, 1.0, 0.5);
  const std::vector<double> x{0.0, 0.0};
  fve::RunningStats a, b, mid;
  std::vector<double> out;
  for (int r = 0; r < 40000; ++r) {
    fve::Rng rng = fve::Rng::for_replicate(5, r);
    fve::DiffusionWindow w(k, x, 0.0, rng);
    const double p = w.position(0, 0.25);
    mid.push(p * p);
    w.copy(0, 1, 0.25);
    w.finish(1.0, out);
    a.push(out[0] * out[0]);
    b.push(out[1] * out[1]);
  }
  EXPECT_NEAR(mid.mean(), 0.25 * k.rho_eps(), 4.0 * mid.estimate().std_error);
  EXPECT_NEAR(a.mean(), k.rho_eps(), 4.0 * a.estimate().std_error);
  EXPECT_NEAR(b.mean(), k.rho_eps(), 4.0 * b.estimate().std_error);
}

TEST(DiffusionWindow, CommonNoiseCorrelationAtLag) {
  const fve::KernelSpec k = fve::KernelSpec::gaussian(1.0, 1.0, 0.0);
  const std::vector<double> x{0.0, 1.0};
  std::vector<double> u, v, out;
  for (int r = 0; r < 40000; ++r) {
    fve::Rng rng = fve::Rng::for_replicate(6, r);
    fve::DiffusionWindow w(k, x, 0.0, rng);
    w.position(1, 0.3);  // an intermediate read must not change the law
    w.finish(0.5, out);
    u.push_back(out[0]);
    v.push_back(out[1] - 1.0);
  }
  const double rho = std::exp(-0.25);
  EXPECT_NEAR(fve::correlation(u, v), rho, 4.0 * (1.0 - rho * rho) / std::sqrt(4e4));
}

}  // namespace
