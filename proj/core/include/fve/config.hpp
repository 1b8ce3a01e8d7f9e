#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fve/distributions.hpp"
#include "fve/kernel.hpp"
#include "fve/lookdown.hpp"
#include "fve/spde.hpp"

namespace fve {

enum class Experiment { lookdown, moran, dual, spde, sdsm, diagnose, verify };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct KernelSection {
  std::string family = "gaussian";  // gaussian | tabulated
  double amplitude = 1.0;
  double bandwidth = 1.0;
  std::string table;  // two-column file for the tabulated family
  double epsilon = 0.5;

  KernelSpec build() const;
};

struct SpdeSection {
  double half_width = 8.0;
  double dx = 0.05;
  std::optional<double> dt;  // default: the stability bound
  NoiseScheme scheme = NoiseScheme::feller_split;
  double initial_sd = 0.1;  // width of the smoothed point mass
};

struct SdsmSection {
  std::size_t n0 = 500;
  double delta = 0.1;
  double T = 0.3;
  bool exact_conditioning = true;  // false: rejection from unconditioned runs
};

struct DiagnoseSection {
  std::string input;               // trajectory CSV
  std::vector<double> eps_grid;    // empty: default grid
};

struct VerifySection {
  std::string suite = "all";
  double scale = 1.0;  // multiplies every replicate count
};

struct RunConfig {
  Experiment experiment = Experiment::lookdown;
  KernelSection kernel;
  std::size_t m = 128;
  double gamma = 1.0;
  double horizon = 0.5;
  double dt_max = 1e-3;
  std::vector<double> record_times{0.5};
  InitialLaw initial = InitialLaw::point(0.0);
  TestFunction phi = TestFunction::square();
  int order = 1;  // tensor order for moment estimates (1..3)
  SpdeSection spde;
  SdsmSection sdsm;
  DiagnoseSection diagnose;
  VerifySection verify;
  std::size_t n_reps = 100;
  std::uint64_t master_seed = 1;
  std::string out_dir = "fve_out";

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys take defaults; unknown keys and bad values throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const InitialLaw& law);
InitialLaw initial_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TestFunction& phi);
TestFunction test_function_from_json(const nlohmann::json& j);

/// Stable (per build) hash of the canonical serialization.
std::string config_hash(const RunConfig& config);

}  // namespace fve
