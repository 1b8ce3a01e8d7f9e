#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fve/error.hpp"
#include "fve/runner.hpp"

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fve_runner_test" / name;
  fs::remove_all(dir);
  return dir;
}

fve::RunConfig small_lookdown() {
  fve::RunConfig c;
  c.m = 16;
  c.horizon = 0.2;
  c.record_times = {0.1, 0.2};
  c.dt_max = 0.01;
  c.n_reps = 12;
  return c;
}

TEST(Runner, KeyedNames) {
  EXPECT_EQ(fve::keyed("phi", 0.5), "phi@0.5");
  EXPECT_EQ(fve::keyed("mass", 0.25), "mass@0.25");
}

TEST(Runner, LookdownOutputsAreWorkerIndependent) {
  auto c = small_lookdown();
  const fs::path first = scratch("a");
  c.out_dir = first.string();
  fve::run(c, {1, true});
  c.out_dir = scratch("b").string();
  const auto r = fve::run(c, {3, true});
  for (const char* f : {"summary.json", "trajectories.csv"}) {
    EXPECT_EQ(slurp(first / f), slurp(fs::path(c.out_dir) / f)) << f;
  }
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "timing.json"));
  EXPECT_EQ(r.replicates.size(), 12u);
  EXPECT_TRUE(r.pooled.count("mean_x2@0.2"));
  EXPECT_TRUE(r.extra.contains("lineage_law_exact"));
}

TEST(Runner, DiagnoseReadsTrajectories) {
  auto c = small_lookdown();
  c.kernel.epsilon = 0.0;
  c.out_dir = scratch("traj").string();
  fve::run(c, {1, true});
  fve::RunConfig d;
  d.experiment = fve::Experiment::diagnose;
  d.diagnose.input = (fs::path(c.out_dir) / "trajectories.csv").string();
  d.out_dir = scratch("diag").string();
  const auto r = fve::run(d, {1, true});
  EXPECT_TRUE(fs::exists(fs::path(d.out_dir) / "report.json"));
  EXPECT_EQ(r.replicates.size(), 12u);
  const auto& z = r.pooled.at("atom_statistic@0.2");
  EXPECT_GE(z.mean, 1.0 / 16.0);
  EXPECT_LE(z.mean, 1.0);
}

TEST(Runner, DiagnoseRejectsMalformedInput) {
  const auto dir = scratch("bad");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "t.csv");
    out << "replicate,time,position,mass\n0,0.1,abc,1\n";
  }
  fve::RunConfig d;
  d.experiment = fve::Experiment::diagnose;
  d.diagnose.input = (dir / "t.csv").string();
  d.out_dir = (dir / "out").string();
  EXPECT_THROW(fve::run(d, {1, false}), fve::ConfigError);
}

TEST(Runner, LookdownSecondMomentMatchesHeatFlow) {
  fve::RunConfig c;
  c.m = 128;
  c.n_reps = 400;
  c.horizon = 0.5;
  c.record_times = {0.5};
  const auto r = fve::run(c, {fve::worker_count(), false});
  const auto& e = r.pooled.at("mean_x2@0.5");
  const double exact = r.extra.at("rho_eps").get<double>() * 0.5;
  EXPECT_NEAR(exact, 1.0112, 1e-4);
  EXPECT_NEAR(e.mean, exact, 4.0 * e.std_error);
}

TEST(Runner, DualSpdeSdsmSmallRuns) {
  fve::RunConfig dual;
  dual.experiment = fve::Experiment::dual;
  dual.m = 2;
  dual.order = 2;
  dual.horizon = 0.1;
  dual.record_times = {0.1};
  dual.dt_max = 0.01;
  dual.n_reps = 20;
  dual.phi = fve::TestFunction::bump(1.0, 0.0, 1.0);
  const auto rd = fve::run(dual, {1, false});
  EXPECT_EQ(rd.replicates.size(), 20u);

  fve::RunConfig spde;
  spde.experiment = fve::Experiment::spde;
  spde.spde.dx = 0.2;
  spde.horizon = 0.05;
  spde.record_times = {0.05};
  spde.n_reps = 4;
  spde.out_dir = scratch("spde").string();
  const auto rs = fve::run(spde, {1, true});
  EXPECT_TRUE(fs::exists(fs::path(spde.out_dir) / "fields.csv"));
  EXPECT_NEAR(rs.pooled.at("phi@0.05").mean, rs.pooled.at("mean_x2@0.05").mean, 1e-12);

  for (bool exact : {true, false}) {
    fve::RunConfig sd;
    sd.experiment = fve::Experiment::sdsm;
    sd.sdsm.n0 = 20;
    sd.sdsm.delta = 0.5;
    sd.sdsm.T = 0.05;
    sd.sdsm.exact_conditioning = exact;
    sd.horizon = 0.05;
    sd.record_times = {0.05};
    sd.dt_max = 0.01;
    sd.n_reps = 10;
    const auto r = fve::run(sd, {1, false});
    EXPECT_EQ(r.extra.at("conditioning").get<std::string>(), exact ? "exact" : "rejection");
    const double rate = r.extra.at("acceptance_rate").get<double>();
    EXPECT_GT(rate, 0.0);
    EXPECT_LE(rate, 1.0);
  }
}

}  // namespace
