#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <vector>

#include "fve/ensemble.hpp"
#include "fve/error.hpp"

namespace {

fve::ReplicateSummary normal_draw(std::size_t, fve::Rng& rng) {
  fve::ReplicateSummary r;
  r.values["x"] = rng.normal();
  r.values["x2"] = r.values["x"] * r.values["x"];
  return r;
}

TEST(Ensemble, WorkerCountFromEnvironment) {
  ::setenv("FVE_WORKERS", "3", 1);
  EXPECT_EQ(fve::worker_count(), 3u);
  ::setenv("FVE_WORKERS", "junk", 1);
  EXPECT_GE(fve::worker_count(), 1u);
  ::unsetenv("FVE_WORKERS");
  EXPECT_GE(fve::worker_count(), 1u);
}

TEST(Ensemble, ParallelMapCoversEveryIndex) {
  const auto v = fve::parallel_map<std::size_t>(1000, [](std::size_t k) { return k * k; }, 4);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_EQ(v[k], k * k);
}

TEST(Ensemble, ParallelForRethrowsLowestFailure) {
  try {
    fve::parallel_for(
        100,
        [](std::size_t k) {
          if (k == 17 || k == 60) throw std::runtime_error("bad " + std::to_string(k));
        },
        4);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "bad 17");
  }
}

TEST(Ensemble, ResultsIndependentOfWorkers) {
  const auto a = fve::run_replicates(200, 5, normal_draw, 1);
  const auto b = fve::run_replicates(200, 5, normal_draw, 4);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].index, k);
    EXPECT_EQ(a[k].values, b[k].values);
  }
  const auto pa = fve::pool(a), pb = fve::pool(b);
  EXPECT_EQ(pa.at("x").mean, pb.at("x").mean);
  EXPECT_EQ(pa.at("x2").std_error, pb.at("x2").std_error);
}

TEST(Ensemble, PoolIsOrderIndependent) {
  auto reps = fve::run_replicates(300, 6, normal_draw, 2);
  const auto before = fve::pool(reps);
  std::mt19937 g(1);
  std::shuffle(reps.begin(), reps.end(), g);
  const auto after = fve::pool(reps);
  EXPECT_EQ(before.at("x").mean, after.at("x").mean);
  EXPECT_EQ(before.at("x").std_error, after.at("x").std_error);
}

TEST(Ensemble, PoolSingleReplicate) {
  const auto reps = fve::run_replicates(1, 7, normal_draw, 1);
  const auto p = fve::pool(reps);
  EXPECT_EQ(p.at("x").mean, reps[0].values.at("x"));
  EXPECT_EQ(p.at("x").std_error, 0.0);
  EXPECT_EQ(p.at("x").n, 1u);
}

TEST(Ensemble, PoolWeightsByMass) {
  std::vector<fve::ReplicateSummary> reps(2);
  reps[0].index = 0;
  reps[0].weight = 3.0;
  reps[0].values["x"] = 1.0;
  reps[1].index = 1;
  reps[1].weight = 1.0;
  reps[1].values["x"] = 5.0;
  EXPECT_DOUBLE_EQ(fve::pool(reps).at("x").mean, 2.0);
}

TEST(Ensemble, FailureBudget) {
  const auto one_bad = [](std::size_t k, fve::Rng& rng) {
    if (k == 3) throw fve::NumericError("overflow", 1e308);
    return normal_draw(k, rng);
  };
  const auto reps = fve::run_replicates(200, 8, one_bad, 2);
  EXPECT_TRUE(reps[3].failed);
  EXPECT_EQ(reps[3].failure, "overflow");
  EXPECT_EQ(fve::pool(reps).at("x").n, 199u);
  EXPECT_THROW(fve::run_replicates(50, 8, one_bad, 2), fve::RunFailed);
}

}  // namespace
