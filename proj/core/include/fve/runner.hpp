#pragma once

// Dispatch of a RunConfig to its experiment, pooling, and persistence.
//
// Files written under out_dir:
//   summary.json       config, pooled estimates, per-replicate values
//   trajectories.csv   replicate,time,atom_position,atom_mass   (lookdown, moran, sdsm)
//   fields.csv         replicate,time,x,value                   (spde)
//   report.json        atom reports                             (diagnose)
//   timing.json        wall time; kept apart so the files above are
//                      byte-identical across reruns

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fve/config.hpp"
#include "fve/ensemble.hpp"
#include "fve/spde.hpp"

namespace fve {

struct RunOptions {
  std::size_t workers = worker_count();
  bool write_outputs = true;
};

struct EnsembleResult {
  Experiment experiment = Experiment::lookdown;
  std::vector<ReplicateSummary> replicates;
  std::map<std::string, Estimate> pooled;
  nlohmann::json extra = nlohmann::json::object();  // experiment-specific results
  std::string config_hash;
  std::string version;
  double wall_time_seconds = 0.0;
  std::vector<std::filesystem::path> files;
  bool passed = true;  // verify only
};

std::string code_version();

/// Key of a per-record-time value, e.g. "mean_x2@0.5".
std::string keyed(const std::string& name, double time);

/// Smoothed initial density for the SPDE: atoms become normals of sd `sd`.
DensityField initial_density(const InitialLaw& law, double half_width, double dx, double sd);

EnsembleResult run(const RunConfig& config, const RunOptions& options = {});

nlohmann::json summary_json(const RunConfig& config, const EnsembleResult& result);

}  // namespace fve
