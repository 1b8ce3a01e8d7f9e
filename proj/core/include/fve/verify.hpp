#pragma once

// Acceptance suites. Each criterion produces one report line.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fve/ensemble.hpp"

namespace fve {

struct CriterionReport {
  int id = 0;
  std::string name;
  bool pass = false;
  bool warning = false;
  std::string detail;
  nlohmann::json numbers = nlohmann::json::object();
  double seconds = 0.0;
};

struct VerifyOptions {
  double scale = 1.0;  // multiplies replicate counts
  std::uint64_t master_seed = 1;
  std::size_t workers = worker_count();
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "fve_verify";
};

/// moments, duality, atomicity, spde, conditioning, flow, determinism, all.
const std::vector<std::string>& suite_names();

/// Criterion ids covered by a suite; throws ArgumentError for unknown names.
std::vector<int> suite_criteria(const std::string& suite);

/// Runs the suite; `on_report` is called as each criterion completes.
std::vector<CriterionReport> run_suite(const std::string& suite, const VerifyOptions& options,
                                       const std::function<void(const CriterionReport&)>& on_report = {});

std::string format_line(const CriterionReport& report);
nlohmann::json to_json(const CriterionReport& report);

}  // namespace fve
