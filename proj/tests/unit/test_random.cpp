#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fve/random.hpp"
#include "fve/stats.hpp"

namespace {

TEST(Random, DerivedSeedsArePureAndDistinct) {
  EXPECT_EQ(fve::derive_seed(7, 3), fve::derive_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(fve::derive_seed(7, k));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(fve::derive_seed(7, 0), fve::derive_seed(8, 0));
}

TEST(Random, ReplicateStreamsReplay) {
  fve::Rng a = fve::Rng::for_replicate(11, 4), b = fve::Rng::for_replicate(11, 4);
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(a.uniform(), b.uniform());
    ASSERT_EQ(a.normal(), b.normal());
  }
}

TEST(Random, UniformStaysInHalfOpenInterval) {
  fve::Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Random, AdjacentStreamsUncorrelated) {
  for (std::uint64_t k = 0; k < 10; ++k) {
    fve::Rng a = fve::Rng::for_replicate(99, k), b = fve::Rng::for_replicate(99, k + 1);
    std::vector<double> u(10000), v(10000);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = a.uniform();
      v[i] = b.uniform();
    }
    EXPECT_LT(std::abs(fve::correlation(u, v)), 0.05);
  }
}

TEST(Random, DistributionMoments) {
  fve::Rng rng(5);
  fve::RunningStats n, e, p, g;
  for (int i = 0; i < 200000; ++i) {
    n.push(rng.normal());
    e.push(rng.exponential(4.0));
    p.push(static_cast<double>(rng.poisson(3.5)));
    g.push(rng.gamma(2.5, 0.4));
  }
  EXPECT_NEAR(n.mean(), 0.0, 4.0 * n.estimate().std_error);
  EXPECT_NEAR(n.variance(), 1.0, 0.02);
  EXPECT_NEAR(e.mean(), 0.25, 4.0 * e.estimate().std_error);
  EXPECT_NEAR(p.mean(), 3.5, 4.0 * p.estimate().std_error);
  EXPECT_NEAR(g.mean(), 1.0, 4.0 * g.estimate().std_error);
}

TEST(Random, IndexCoversRangeUniformly) {
  fve::Rng rng(2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.index(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

}  // namespace
