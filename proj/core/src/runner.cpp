#include "fve/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fve/diagnostics.hpp"
#include "fve/dual.hpp"
#include "fve/error.hpp"
#include "fve/lookdown.hpp"
#include "fve/measure.hpp"
#include "fve/sdsm.hpp"
#include "fve/verify.hpp"

#ifndef FVE_VERSION
#define FVE_VERSION "0.0.0"
#endif

namespace fve {

using nlohmann::json;

std::string code_version() { return FVE_VERSION; }

std::string keyed(const std::string& name, double time) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s@%.6g", name.c_str(), time);
  return buf;
}

DensityField initial_density(const InitialLaw& law, double half_width, double dx, double sd) {
  auto normal_pdf = [](double x, double mean, double s) {
    const double u = (x - mean) / s;
    return std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * std::numbers::pi));
  };
  return std::visit(
      [&](const auto& f) -> DensityField {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, InitialLaw::Point>) {
          return DensityField::normal(half_width, dx, f.x, sd);
        } else if constexpr (std::is_same_v<F, InitialLaw::Normal>) {
          return DensityField::normal(half_width, dx, f.mean, std::sqrt(f.sd * f.sd + sd * sd));
        } else if constexpr (std::is_same_v<F, InitialLaw::Uniform>) {
          return DensityField::from_function(half_width, dx, [&](double x) { return x >= f.a && x <= f.b ? 1.0 : 0.0; });
        } else {
          return DensityField::from_function(half_width, dx, [&](double x) {
            return f.p * normal_pdf(x, f.x1, sd) + (1.0 - f.p) * normal_pdf(x, f.x2, sd);
          });
        }
      },
      law.form());
}

namespace {

using Rows = std::vector<std::string>;

void append_row(Rows& rows, std::size_t rep, double t, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", rep, t, a, b);
  rows.emplace_back(buf);
}

void append_measure(Rows& rows, std::size_t rep, double t, const EmpiricalMeasure& mu) {
  for (const Atom& a : mu.atoms) append_row(rows, rep, t, a.position, a.mass);
}

void write_csv(const std::filesystem::path& path, const std::string& header, const std::vector<Rows>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunFailed("cannot write " + path.string());
  out << header << '\n';
  for (const Rows& rows : blocks) {
    for (const std::string& r : rows) out << r;
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunFailed("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<double> effective_records(const RunConfig& c) {
  return c.record_times.empty() ? std::vector<double>{c.horizon} : c.record_times;
}

struct Output {
  std::vector<ReplicateSummary> replicates;
  std::vector<Rows> rows;
  std::string csv_name;
  std::string csv_header;
  json extra = json::object();
};

void positional_values(ReplicateSummary& s, double t, const EmpiricalMeasure& mu, const TestFunction& phi) {
  s.values[keyed("phi", t)] = mu.normalized_integral(phi);
  s.values[keyed("mean_x", t)] = mu.normalized_integral(TestFunction::identity());
  s.values[keyed("mean_x2", t)] = mu.normalized_integral(TestFunction::square());
}

json exact_first_moments(const RunConfig& c, const KernelSpec& kernel, const std::vector<double>& records) {
  json exact = json::object();
  for (double t : records) {
    exact[keyed("phi", t)] = first_moment_exact(c.initial, c.phi, t, kernel);
    exact[keyed("mean_x", t)] = first_moment_exact(c.initial, TestFunction::identity(), t, kernel);
    exact[keyed("mean_x2", t)] = first_moment_exact(c.initial, TestFunction::square(), t, kernel);
  }
  return exact;
}

Output run_particles(const RunConfig& c, const RunOptions& opt) {
  const KernelSpec kernel = c.kernel.build();
  SimulationConfig sim;
  sim.m = c.m;
  sim.gamma = c.gamma;
  sim.model = c.experiment == Experiment::moran ? Model::moran : Model::lookdown;
  sim.kernel = kernel;
  sim.initial = c.initial;
  sim.dt_max = c.dt_max;
  const std::vector<double> records = effective_records(c);

  Output out;
  out.rows.resize(c.n_reps);
  out.csv_name = "trajectories.csv";
  out.csv_header = "replicate,time,atom_position,atom_mass";
  out.replicates = run_replicates(
      c.n_reps, c.master_seed,
      [&](std::size_t k, Rng& rng) {
        const Trajectory tr = simulate(sim, c.horizon, records, rng);
        if (tr.failed) throw NumericError("replicate failed: " + tr.failure, 0.0);
        ReplicateSummary s;
        Rows rows;
        for (const TrajectoryRecord& r : tr.records) {
          positional_values(s, r.time, r.measure, c.phi);
          s.values[keyed("phi_tensor", r.time)] = tensor_u_statistic(r.positions, c.phi, c.order);
          s.values[keyed("lineages", r.time)] = static_cast<double>(r.lineage_count);
          s.values[keyed("atoms", r.time)] = static_cast<double>(r.measure.atom_count());
          s.values[keyed("atom_statistic", r.time)] = atom_statistic(r.measure);
          append_measure(rows, k, r.time, r.measure);
        }
        s.values["events"] = static_cast<double>(tr.events);
        out.rows[k] = std::move(rows);
        return s;
      },
      opt.workers);
  out.extra["exact"] = exact_first_moments(c, kernel, records);
  out.extra["rho_eps"] = kernel.rho_eps();
  json lineage_law = json::object();
  for (double t : records) lineage_law[keyed("lineages", t)] = death_chain_marginal(static_cast<int>(c.m), c.gamma, t);
  out.extra["lineage_law_exact"] = lineage_law;
  return out;
}

Output run_dual(const RunConfig& c, const RunOptions& opt) {
  const KernelSpec kernel = c.kernel.build();
  const double t = c.horizon;
  const MultiFunction f = tensor_power(c.phi);
  Output out;
  out.replicates = run_replicates(
      c.n_reps, c.master_seed,
      [&](std::size_t, Rng& rng) {
        const DualEstimate d = dual_moment_estimate(c.initial, f, c.order, t, kernel, c.gamma, 1, c.dt_max, rng);
        ReplicateSummary s;
        s.values[keyed("phi_tensor", t)] = d.estimate.mean;
        return s;
      },
      opt.workers);
  out.extra["exact_first_moment"] = first_moment_exact(c.initial, c.phi, t, kernel);
  if (c.order == 2) {
    Rng rng = Rng::for_replicate(c.master_seed, c.n_reps);
    const DualEstimate d = second_moment_dual(c.initial, c.phi, c.phi, t, kernel, c.gamma, c.n_reps, rng, c.dt_max);
    out.extra["stratified_second_moment"] = {{"mean", d.estimate.mean}, {"std_error", d.estimate.std_error}};
  }
  return out;
}

Output run_spde(const RunConfig& c, const RunOptions& opt) {
  const KernelSpec kernel = c.kernel.build();
  const double dt = c.spde.dt.value_or(stability_bound(kernel, c.spde.dx));
  const std::vector<double> records = effective_records(c);
  const DensityField init = initial_density(c.initial, c.spde.half_width, c.spde.dx, c.spde.initial_sd);
  Output out;
  out.rows.resize(c.n_reps);
  out.csv_name = "fields.csv";
  out.csv_header = "replicate,time,x,value";
  out.replicates = run_replicates(
      c.n_reps, c.master_seed,
      [&](std::size_t k, Rng& rng) {
        const SpdeRun run = solve_density(init, kernel, c.gamma, c.horizon, dt, rng, records, c.spde.scheme);
        ReplicateSummary s;
        Rows rows;
        for (const DensityField& f : run.snapshots) {
          const double p = density_moments(f, c.phi);
          s.values[keyed("phi", f.time)] = p;
          s.values[keyed("phi_sq", f.time)] = p * p;
          s.values[keyed("mean_x", f.time)] = density_moments(f, TestFunction::identity());
          s.values[keyed("mean_x2", f.time)] = density_moments(f, TestFunction::square());
          for (std::size_t i = 0; i < f.size(); ++i) append_row(rows, k, f.time, f.x(i), f.values[i]);
        }
        s.values["clipped_mass"] = run.clipped_mass;
        s.values["max_boundary_mass"] = run.max_boundary_mass;
        s.values["mass_drift_warnings"] = static_cast<double>(run.mass_drift_warnings);
        out.rows[k] = std::move(rows);
        return s;
      },
      opt.workers);
  out.extra["dt"] = dt;
  out.extra["stability_bound"] = stability_bound(kernel, c.spde.dx);
  out.extra["exact"] = exact_first_moments(c, kernel, records);
  return out;
}

/// Conditioned count path on [0, T], continued without conditioning to `horizon`.
MassPath conditioned_path(const ConditionedMassSampler& sampler, const RunConfig& c, Rng& rng) {
  MassPath path = sampler.sample(rng);
  if (c.horizon > c.sdsm.T) {
    const std::size_t n_T = path.count_at(c.sdsm.T);
    if (n_T > 0) {
      MassPath tail = sample_mass_path(n_T, c.gamma, c.horizon - c.sdsm.T, rng);
      for (MassEvent e : tail.events) path.events.push_back({e.time + c.sdsm.T, e.change});
    }
    path.horizon = c.horizon;
  }
  return path;
}

Output run_sdsm(const RunConfig& c, const RunOptions& opt) {
  SdsmConfig sc;
  sc.n0 = c.sdsm.n0;
  sc.gamma = c.gamma;
  sc.kernel = c.kernel.build();
  sc.initial = c.initial;
  sc.dt_max = c.dt_max;
  const std::vector<double> records = effective_records(c);

  std::optional<ConditionedMassSampler> sampler;
  if (c.sdsm.exact_conditioning) sampler.emplace(c.sdsm.n0, c.gamma, c.sdsm.T, c.sdsm.delta);

  Output out;
  out.rows.resize(c.n_reps);
  out.csv_name = "trajectories.csv";
  out.csv_header = "replicate,time,atom_position,atom_mass";
  out.replicates = run_replicates(
      c.n_reps, c.master_seed,
      [&](std::size_t k, Rng& rng) {
        const MassPath path = sampler ? conditioned_path(*sampler, c, rng)
                                      : sample_mass_path(c.sdsm.n0, c.gamma, c.horizon, rng);
        ReplicateSummary s;
        const bool accepted = path.sup_deviation(c.sdsm.T) < c.sdsm.delta;
        s.values["accepted"] = accepted ? 1.0 : 0.0;
        if (!accepted) return s;
        const SdsmTrajectory tr = simulate_sdsm_on_path(sc, path, records, rng);
        Rows rows;
        for (const SdsmRecord& r : tr.records) {
          s.values[keyed("mass", r.time)] = r.measure.total_mass;
          if (r.alive > 0) positional_values(s, r.time, r.measure, c.phi);
          append_measure(rows, k, r.time, r.measure);
        }
        out.rows[k] = std::move(rows);
        return s;
      },
      opt.workers);
  if (sampler) {
    out.extra["acceptance_rate"] = sampler->acceptance_probability();
    out.extra["conditioning"] = "exact";
  } else {
    double accepted = 0.0;
    for (const auto& r : out.replicates) accepted += r.failed ? 0.0 : r.values.at("accepted");
    if (accepted == 0.0) {
      throw RunFailed("sdsm: no trajectory accepted; raise sdsm.delta or n_reps");
    }
    out.extra["acceptance_rate"] = accepted / static_cast<double>(out.replicates.size());
    out.extra["conditioning"] = "rejection";
  }
  RunConfig baseline = c;
  baseline.experiment = Experiment::lookdown;
  baseline.m = c.sdsm.n0;
  json baseline_json = to_json(baseline);
  baseline_json.erase("out_dir");
  out.extra["fve_baseline"] = {{"config", baseline_json},
                               {"exact", exact_first_moments(c, sc.kernel, records)}};
  return out;
}

Output run_diagnose(const RunConfig& c, const RunOptions&) {
  std::ifstream in(c.diagnose.input);
  if (!in) throw ConfigError("config field 'diagnose.input': cannot open " + c.diagnose.input);
  std::map<std::pair<std::size_t, double>, std::vector<Atom>> groups;
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, x, w;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, x, ',') ||
        !std::getline(row, w)) {
      throw ConfigError("diagnose input line " + std::to_string(line_no) + ": expected 4 columns");
    }
    try {
      groups[{std::stoull(a), std::stod(b)}].push_back({std::stod(x), std::stod(w)});
    } catch (const std::exception&) {
      throw ConfigError("diagnose input line " + std::to_string(line_no) + ": not numeric");
    }
  }
  const std::vector<double> grid = c.diagnose.eps_grid.empty() ? default_eps_grid() : c.diagnose.eps_grid;
  Output out;
  json reports = json::array();
  std::map<std::size_t, ReplicateSummary> by_rep;
  for (auto& [key, atoms] : groups) {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& p, const Atom& q) { return p.position < q.position; });
    EmpiricalMeasure mu;
    for (const Atom& a : atoms) {
      if (!mu.atoms.empty() && mu.atoms.back().position == a.position) {
        mu.atoms.back().mass += a.mass;
      } else {
        mu.atoms.push_back(a);
      }
      mu.total_mass += a.mass;
    }
    const AtomReport r = atom_report(mu, grid);
    reports.push_back({{"replicate", key.first},
                       {"time", key.second},
                       {"atom_statistic", r.atom_statistic},
                       {"atom_count", r.atom_count},
                       {"largest_atom", r.largest_atom},
                       {"phi_profile", r.phi_profile}});
    ReplicateSummary& s = by_rep[key.first];
    s.index = key.first;
    s.values[keyed("atom_statistic", key.second)] = r.atom_statistic;
    s.values[keyed("atoms", key.second)] = static_cast<double>(r.atom_count);
    s.values[keyed("largest_atom", key.second)] = r.largest_atom;
  }
  for (auto& [k, s] : by_rep) out.replicates.push_back(std::move(s));
  out.extra["eps_grid"] = grid;
  out.extra["reports"] = std::move(reports);
  return out;
}

Output run_verify_experiment(const RunConfig& c, const RunOptions& opt, bool& passed) {
  VerifyOptions v;
  v.scale = c.verify.scale;
  v.master_seed = c.master_seed;
  v.workers = opt.workers;
  v.scratch = std::filesystem::path(c.out_dir) / "scratch";
  const std::vector<CriterionReport> reports = run_suite(c.verify.suite, v, [](const CriterionReport& r) {
    std::fputs((format_line(r) + "\n").c_str(), stdout);
    std::fflush(stdout);
  });
  Output out;
  json arr = json::array();
  passed = true;
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    passed = passed && r.pass;
  }
  out.extra["suite"] = c.verify.suite;
  out.extra["criteria"] = std::move(arr);
  out.extra["passed"] = passed;
  return out;
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}}; }

}  // namespace

nlohmann::json summary_json(const RunConfig& config, const EnsembleResult& result) {
  json pooled = json::object();
  for (const auto& [k, e] : result.pooled) pooled[k] = estimate_json(e);
  json reps = json::array();
  std::size_t failures = 0;
  for (const auto& r : result.replicates) {
    failures += r.failed ? 1 : 0;
    json entry = {{"index", r.index}, {"weight", r.weight}, {"values", r.values}};
    if (r.failed) {
      entry["failed"] = true;
      entry["failure"] = r.failure;
    }
    reps.push_back(std::move(entry));
  }
  json echoed = to_json(config);
  echoed.erase("out_dir");
  return {{"experiment", to_string(result.experiment)},
          {"version", result.version},
          {"config_hash", result.config_hash},
          {"config", echoed},
          {"failures", failures},
          {"pooled", pooled},
          {"results", result.extra},
          {"replicates", reps}};
}

EnsembleResult run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  EnsembleResult result;
  result.experiment = config.experiment;
  result.config_hash = config_hash(config);
  result.version = code_version();

  Output out;
  switch (config.experiment) {
    case Experiment::lookdown:
    case Experiment::moran:
      out = run_particles(config, options);
      break;
    case Experiment::dual:
      out = run_dual(config, options);
      break;
    case Experiment::spde:
      out = run_spde(config, options);
      break;
    case Experiment::sdsm:
      out = run_sdsm(config, options);
      break;
    case Experiment::diagnose:
      out = run_diagnose(config, options);
      break;
    case Experiment::verify:
      out = run_verify_experiment(config, options, result.passed);
      break;
  }
  result.replicates = std::move(out.replicates);
  result.pooled = pool(result.replicates);
  result.extra = std::move(out.extra);
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (options.write_outputs) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    const std::string base = config.experiment == Experiment::diagnose ? "report.json"
                             : config.experiment == Experiment::verify ? "verify.json"
                                                                       : "summary.json";
    write_json(dir / base, summary_json(config, result));
    result.files.push_back(dir / base);
    if (!out.csv_name.empty()) {
      write_csv(dir / out.csv_name, out.csv_header, out.rows);
      result.files.push_back(dir / out.csv_name);
    }
    write_json(dir / "timing.json", {{"wall_time_seconds", result.wall_time_seconds}, {"workers", options.workers}});
    result.files.push_back(dir / "timing.json");
  }
  return result;
}

}  // namespace fve
