#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fve/dual.hpp"
#include "fve/error.hpp"
#include "fve/lookdown.hpp"
#include "fve/stats.hpp"

namespace {

const fve::KernelSpec kKernel = fve::KernelSpec::gaussian(1.0, 1.0, 0.5);

TEST(Lookdown, InitPointMass) {
  fve::Rng rng(1);
  auto s = fve::init_system(16, fve::InitialLaw::point(0.0), kKernel, 1.0, fve::Model::lookdown, rng);
  for (double x : s.positions) EXPECT_EQ(x, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.ancestor_id[i], static_cast<int>(i + 1));
  EXPECT_EQ(fve::lineage_count(s), 16u);
  EXPECT_EQ(s.time, 0.0);
}

TEST(Lookdown, InitUniformMean) {
  fve::Rng rng(2);
  const std::size_t m = 10000;
  auto s = fve::init_system(m, fve::InitialLaw::uniform(0.0, 1.0), kKernel, 1.0, fve::Model::lookdown, rng);
  const auto e = fve::estimate_of(s.positions);
  EXPECT_NEAR(e.mean, 0.5, 4.0 / std::sqrt(12.0 * m));
}

TEST(Lookdown, InitRejectsSmallM) {
  fve::Rng rng(3);
  EXPECT_THROW(fve::init_system(1, fve::InitialLaw::point(0.0), kKernel, 1.0, fve::Model::lookdown, rng),
               fve::ArgumentError);
}

TEST(Lookdown, SingleParticleVariance) {
  fve::RunningStats st;
  for (int r = 0; r < 10000; ++r) {
    fve::Rng rng = fve::Rng::for_replicate(4, r);
    auto s = fve::init_system(2, fve::InitialLaw::point(0.0), kKernel, 0.0, fve::Model::lookdown, rng);
    for (int k = 0; k < 10; ++k) fve::step_diffusion(s, 0.01, rng);
    st.push(s.positions[0] * s.positions[0]);
  }
  EXPECT_NEAR(st.mean(), kKernel.rho_eps() * 0.1, 4.0 * st.estimate().std_error);
}

TEST(Lookdown, ZeroStepIsIdentity) {
  fve::Rng rng(5);
  auto s = fve::init_system(8, fve::InitialLaw::normal(0.0, 1.0), kKernel, 1.0, fve::Model::lookdown, rng);
  const auto before = s.positions;
  fve::step_diffusion(s, 0.0, rng);
  EXPECT_EQ(s.positions, before);
  EXPECT_EQ(s.time, 0.0);
}

TEST(Lookdown, CoincidentStayCoincidentWithoutIndividualNoise) {
  const auto k0 = fve::KernelSpec::gaussian(1.0, 1.0, 0.0);
  fve::Rng rng(6);
  auto s = fve::init_system(4, fve::InitialLaw::point(0.0), k0, 1.0, fve::Model::lookdown, rng);
  s.positions[3] = 1.0;
  for (int k = 0; k < 500; ++k) fve::step_diffusion(s, 0.01, rng);
  EXPECT_EQ(s.positions[0], s.positions[1]);
  EXPECT_EQ(s.positions[1], s.positions[2]);
  EXPECT_NE(s.positions[2], s.positions[3]);
}

double mean_wait(std::size_t m, double gamma, fve::Model model, double& se) {
  fve::Rng rng(7);
  auto s = fve::init_system(m, fve::InitialLaw::point(0.0), kKernel, gamma, model, rng);
  fve::RunningStats st;
  for (int r = 0; r < 10000; ++r) st.push(fve::next_event(s, rng).wait);
  se = st.estimate().std_error;
  return st.mean();
}

TEST(Lookdown, EventWaitTimes) {
  const struct {
    std::size_t m;
    double gamma;
    fve::Model model;
  } cases[] = {{2, 1.0, fve::Model::lookdown}, {2, 2.5, fve::Model::lookdown}, {4, 1.0, fve::Model::lookdown},
               {4, 1.0, fve::Model::moran}};
  for (const auto& c : cases) {
    double se = 0.0;
    const double mean = mean_wait(c.m, c.gamma, c.model, se);
    EXPECT_NEAR(mean, 2.0 / (c.gamma * c.m * (c.m - 1.0)), 4.0 * se) << c.m << " " << c.gamma;
  }
}

TEST(Lookdown, NoEventsWhenGammaZero) {
  fve::Rng rng(8);
  auto s = fve::init_system(4, fve::InitialLaw::point(0.0), kKernel, 0.0, fve::Model::lookdown, rng);
  EXPECT_TRUE(std::isinf(fve::next_event(s, rng).wait));
}

TEST(Lookdown, PairLaw) {
  fve::Rng rng(9);
  auto s = fve::init_system(4, fve::InitialLaw::point(0.0), kKernel, 1.0, fve::Model::lookdown, rng);
  std::vector<double> counts(16, 0.0);
  const int n = 60000;
  for (int r = 0; r < n; ++r) {
    const auto e = fve::next_event(s, rng);
    ASSERT_LT(e.i, e.j);
    counts[e.i * 4 + e.j] += 1.0;
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) EXPECT_NEAR(counts[i * 4 + j] / n, 1.0 / 6.0, 0.01);

  s.model = fve::Model::moran;
  std::fill(counts.begin(), counts.end(), 0.0);
  for (int r = 0; r < n; ++r) {
    const auto e = fve::next_event(s, rng);
    ASSERT_NE(e.i, e.j);
    counts[e.i * 4 + e.j] += 1.0;
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) EXPECT_NEAR(counts[i * 4 + j] / n, 1.0 / 12.0, 0.01);
}

TEST(Lookdown, ApplyEvent) {
  fve::Rng rng(10);
  auto s = fve::init_system(5, fve::InitialLaw::normal(0.0, 1.0), kKernel, 1.0, fve::Model::lookdown, rng);
  const auto before = s;
  fve::apply_event(s, 0, 1);
  EXPECT_EQ(s.positions[1], s.positions[0]);
  EXPECT_EQ(s.ancestor_id[1], 1);
  for (std::size_t k = 2; k < 5; ++k) EXPECT_EQ(s.positions[k], before.positions[k]);
  EXPECT_EQ(fve::lineage_count(s), 4u);
  const auto once = s;
  fve::apply_event(s, 0, 1);
  EXPECT_EQ(s.positions, once.positions);
  EXPECT_EQ(s.ancestor_id, once.ancestor_id);
  EXPECT_THROW(fve::apply_event(s, 2, 2), fve::ArgumentError);
  EXPECT_THROW(fve::apply_event(s, 3, 1), fve::ArgumentError);
  s.model = fve::Model::moran;
  EXPECT_NO_THROW(fve::apply_event(s, 3, 1));
}

TEST(Lookdown, LineageCountNeverIncreasesUnderEvents) {
  fve::Rng rng(11);
  auto s = fve::init_system(32, fve::InitialLaw::point(0.0), kKernel, 1.0, fve::Model::lookdown, rng);
  std::size_t prev = fve::lineage_count(s);
  for (int k = 0; k < 200; ++k) {
    const auto e = fve::next_event(s, rng);
    fve::apply_event(s, e.i, e.j);
    const std::size_t now = fve::lineage_count(s);
    EXPECT_LE(now, prev);
    prev = now;
  }
}

TEST(Lookdown, RecordAtZeroIsInitialMeasure) {
  fve::SimulationConfig cfg;
  cfg.m = 8;
  cfg.initial = fve::InitialLaw::normal(0.0, 1.0);
  cfg.kernel = kKernel;
  const std::vector<double> times{0.0, 0.1};
  fve::Rng a(12), b(12);
  const auto traj = fve::simulate(cfg, 0.1, times, a);
  auto s = fve::init_system(8, cfg.initial, kKernel, 1.0, fve::Model::lookdown, b);
  ASSERT_EQ(traj.records.size(), 2u);
  EXPECT_EQ(traj.records[0].time, 0.0);
  EXPECT_EQ(traj.records[0].positions, s.positions);
  EXPECT_EQ(traj.records[0].lineage_count, 8u);
  EXPECT_NEAR(traj.records[1].measure.total_mass, 1.0, 1e-12);
}

TEST(Lookdown, ZeroEpsilonPositionsFollowAncestry) {
  fve::SimulationConfig cfg;
  cfg.m = 16;
  cfg.kernel = fve::KernelSpec::gaussian(1.0, 1.0, 0.0);
  cfg.initial = fve::InitialLaw::normal(0.0, 1.0);
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.05 * k);
  fve::Rng rng(13);
  const auto traj = fve::simulate(cfg, 1.0, times, rng);
  ASSERT_FALSE(traj.failed);
  for (std::size_t r = 1; r < traj.records.size(); ++r) {
    EXPECT_LE(traj.records[r].lineage_count, traj.records[r - 1].lineage_count);
    const auto& x = traj.records[r].positions;
    const auto& a = traj.records[r].ancestors;
    for (std::size_t i = 0; i < cfg.m; ++i)
      for (std::size_t j = i + 1; j < cfg.m; ++j) EXPECT_EQ(x[i] == x[j], a[i] == a[j]);
    EXPECT_EQ(traj.records[r].measure.atom_count(), traj.records[r].lineage_count);
  }
}

TEST(Lookdown, Deterministic) {
  fve::SimulationConfig cfg;
  cfg.m = 32;
  cfg.kernel = kKernel;
  const std::vector<double> times{0.25, 0.5};
  fve::Rng a(14), b(14);
  const auto x = fve::simulate(cfg, 0.5, times, a);
  const auto y = fve::simulate(cfg, 0.5, times, b);
  EXPECT_EQ(x.records.back().positions, y.records.back().positions);
  EXPECT_EQ(x.events, y.events);
}

TEST(Lookdown, LineageLawMatchesDeathChain) {
  fve::SimulationConfig cfg;
  cfg.m = 6;
  cfg.kernel = kKernel;
  cfg.dt_max = 0.05;
  const std::vector<double> times{0.4};
  std::vector<double> emp(6, 0.0);
  const int n = 4000;
  for (int r = 0; r < n; ++r) {
    fve::Rng rng = fve::Rng::for_replicate(15, r);
    const auto traj = fve::simulate(cfg, 0.4, times, rng);
    emp[traj.records[0].lineage_count - 1] += 1.0 / n;
  }
  const auto exact = fve::death_chain_marginal(6, 1.0, 0.4);
  EXPECT_LT(fve::tv_distance(emp, exact), 0.03);
}

TEST(Lookdown, SharedNoiseCorrelationWithoutEvents) {
  fve::SimulationConfig cfg;
  cfg.m = 2;
  cfg.gamma = 0.0;
  cfg.kernel = fve::KernelSpec::gaussian(1.0, 1.0, 0.0);
  cfg.initial = fve::InitialLaw::point(0.0);
  cfg.dt_max = 0.01;
  const std::vector<double> times{0.01};
  std::vector<double> u, v;
  for (int r = 0; r < 20000; ++r) {
    fve::Rng rng = fve::Rng::for_replicate(16, r);
    const auto traj = fve::simulate(cfg, 0.01, times, rng);
    u.push_back(traj.records[0].positions[0]);
    v.push_back(traj.records[0].positions[1]);
  }
  // Coincident start with no individual noise: increments are identical.
  EXPECT_NEAR(fve::correlation(u, v), 1.0, 1e-12);
}

}  // namespace
