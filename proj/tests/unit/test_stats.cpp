#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fve/error.hpp"
#include "fve/stats.hpp"

namespace {

TEST(Stats, EstimateOfKnownSample) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const fve::Estimate e = fve::estimate_of(x);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  // sample variance 5/3, se = sqrt(5/3 / 4)
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 12.0), 1e-14);
  EXPECT_EQ(e.n, 4u);
}

TEST(Stats, WeightedEstimateReducesToPlainWithUnitWeights) {
  const std::vector<double> x{0.3, -1.2, 2.2, 0.7, 1.1};
  const std::vector<double> w(x.size(), 1.0);
  const fve::Estimate a = fve::weighted_estimate_of(x, w), b = fve::estimate_of(x);
  EXPECT_NEAR(a.mean, b.mean, 1e-15);
  EXPECT_NEAR(a.std_error, b.std_error, 1e-15);
}

TEST(Stats, WeightedMean) {
  const std::vector<double> x{1.0, 3.0};
  const std::vector<double> w{3.0, 1.0};
  EXPECT_DOUBLE_EQ(fve::weighted_estimate_of(x, w).mean, 1.5);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(fve::weighted_estimate_of(x, bad), fve::ArgumentError);
}

TEST(Stats, CiOverlap) {
  const fve::Estimate a{1.0, 0.1, 10}, b{1.5, 0.1, 10};
  EXPECT_FALSE(fve::ci_overlap(a, b));  // 0.5 > 1.96 * 0.2
  EXPECT_TRUE(fve::ci_overlap(a, b, 0.2));
  EXPECT_TRUE(fve::ci_overlap(a, {1.3, 0.1, 10}));
}

TEST(Stats, TvDistance) {
  const std::vector<double> p{0.5, 0.5, 0.0}, q{0.0, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(fve::tv_distance(p, q), 0.5);
  EXPECT_DOUBLE_EQ(fve::tv_distance(p, p), 0.0);
}

TEST(Stats, RunningStatsMatchesTwoPass) {
  const std::vector<double> x{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  fve::RunningStats r;
  for (double v : x) r.push(v);
  EXPECT_DOUBLE_EQ(r.mean(), 5.0);
  EXPECT_NEAR(r.variance(), 32.0 / 7.0, 1e-12);
}

}  // namespace
