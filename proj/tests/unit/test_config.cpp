#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "fve/config.hpp"
#include "fve/error.hpp"

namespace {

using nlohmann::json;

std::string config_error(const json& j) {
  try {
    fve::config_from_json(j).validate();
  } catch (const fve::ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsRoundTrip) {
  const fve::RunConfig c;
  const json j = fve::to_json(c);
  const fve::RunConfig back = fve::config_from_json(j);
  EXPECT_EQ(fve::to_json(back), j);
  EXPECT_EQ(fve::config_hash(back), fve::config_hash(c));
}

TEST(Config, FullRoundTrip) {
  const json j = json::parse(R"({
    "experiment": "spde",
    "kernel": {"family": "gaussian", "amplitude": 2.0, "bandwidth": 0.5, "epsilon": 0.25},
    "m": 64, "gamma": 2.0, "horizon": 1.0, "dt_max": 0.01, "record_times": [0.5, 1.0],
    "initial": {"family": "two_atoms", "x1": -1, "p": 0.3, "x2": 1},
    "phi": {"family": "bump", "amplitude": 1, "center": 0.5, "width": 2},
    "order": 2,
    "spde": {"L": 4, "dx": 0.1, "dt": 0.0001, "scheme": "euler_clip", "initial_sd": 0.2},
    "sdsm": {"n0": 100, "delta": 0.2, "T": 0.5, "exact_conditioning": false},
    "n_reps": 7, "master_seed": 99, "out_dir": "somewhere"
  })");
  const auto c = fve::config_from_json(j);
  EXPECT_EQ(c.experiment, fve::Experiment::spde);
  EXPECT_EQ(c.m, 64u);
  EXPECT_EQ(c.kernel.epsilon, 0.25);
  EXPECT_EQ(c.record_times, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(c.spde.scheme, fve::NoiseScheme::euler_clip);
  ASSERT_TRUE(c.spde.dt.has_value());
  EXPECT_EQ(*c.spde.dt, 1e-4);
  EXPECT_FALSE(c.sdsm.exact_conditioning);
  EXPECT_EQ(c.master_seed, 99u);
  EXPECT_NE(c.phi.bump_params(), nullptr);
  EXPECT_DOUBLE_EQ(c.initial.expect(fve::TestFunction::identity()), 0.4);
  const auto again = fve::config_from_json(fve::to_json(c));
  EXPECT_EQ(fve::to_json(again), fve::to_json(c));
  EXPECT_NE(fve::config_hash(c), fve::config_hash(fve::RunConfig{}));
}

TEST(Config, UnknownKeysAreNamed) {
  EXPECT_NE(config_error(json{{"mm", 3}}).find("config field 'mm'"), std::string::npos);
  EXPECT_NE(config_error(json{{"kernel", {{"eps", 0.1}}}}).find("kernel.eps"), std::string::npos);
  EXPECT_NE(config_error(json{{"initial", {{"family", "normal"}, {"mean", 0}}}}).find("initial.sd"),
            std::string::npos);
}

TEST(Config, InvalidValuesAreNamed) {
  EXPECT_NE(config_error(json{{"m", -4}}).find("'m'"), std::string::npos);
  EXPECT_NE(config_error(json{{"m", 1}}).find("'m'"), std::string::npos);
  EXPECT_NE(config_error(json{{"gamma", 0.0}}).find("'gamma'"), std::string::npos);
  EXPECT_NE(config_error(json{{"gamma", "fast"}}).find("'gamma'"), std::string::npos);
  EXPECT_NE(config_error(json{{"experiment", "nope"}}).find("'experiment'"), std::string::npos);
  EXPECT_NE(config_error(json{{"record_times", {0.4, 0.2}}}).find("record_times"), std::string::npos);
  EXPECT_NE(config_error(json{{"order", 4}}).find("'order'"), std::string::npos);
  EXPECT_NE(config_error(json{{"kernel", {{"family", "tabulated"}}}}).find("kernel.table"), std::string::npos);
}

TEST(Config, ExperimentNames) {
  for (auto e : {fve::Experiment::lookdown, fve::Experiment::moran, fve::Experiment::dual, fve::Experiment::spde,
                 fve::Experiment::sdsm, fve::Experiment::diagnose, fve::Experiment::verify}) {
    EXPECT_EQ(fve::experiment_from_string(fve::to_string(e)), e);
  }
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "fve_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"experiment": "dual", "m": 3})";
  }
  const auto c = fve::load_config(path);
  EXPECT_EQ(c.experiment, fve::Experiment::dual);
  EXPECT_EQ(c.m, 3u);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(fve::load_config(path), fve::ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(fve::load_config(path), fve::ConfigError);
}

TEST(Config, KernelBuild) {
  fve::KernelSection k;
  const auto spec = k.build();
  EXPECT_TRUE(spec.is_gaussian());
  EXPECT_DOUBLE_EQ(spec.epsilon(), 0.5);
}

}  // namespace
