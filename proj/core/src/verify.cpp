#include "fve/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "fve/diagnostics.hpp"
#include "fve/dual.hpp"
#include "fve/error.hpp"
#include "fve/lookdown.hpp"
#include "fve/runner.hpp"
#include "fve/sdsm.hpp"
#include "fve/spde.hpp"

namespace fve {

using nlohmann::json;

namespace {

CriterionReport make_report(int id, std::string name) {
  CriterionReport r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

using Reports = std::vector<CriterionReport>;

std::size_t scaled(std::size_t n, const VerifyOptions& opt, std::size_t floor = 2) {
  return std::max<std::size_t>(floor, static_cast<std::size_t>(std::llround(static_cast<double>(n) * opt.scale)));
}

std::uint64_t seed_for(const VerifyOptions& opt, std::uint64_t stream) { return derive_seed(opt.master_seed, stream); }

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}}; }

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

const KernelSpec& base_kernel() {
  static const KernelSpec k = KernelSpec::gaussian(1.0, 1.0, 0.5);
  return k;
}

SimulationConfig particle_config(std::size_t m, const KernelSpec& kernel, const InitialLaw& mu) {
  SimulationConfig sim;
  sim.m = m;
  sim.gamma = 1.0;
  sim.model = Model::lookdown;
  sim.kernel = kernel;
  sim.initial = mu;
  sim.dt_max = 1e-3;
  return sim;
}

Trajectory checked_simulate(const SimulationConfig& sim, double horizon, std::span<const double> records, Rng& rng) {
  Trajectory tr = simulate(sim, horizon, records, rng);
  if (tr.failed) throw NumericError("lookdown replicate failed: " + tr.failure, 0.0);
  return tr;
}

std::string overlap_text(const Estimate& a, const Estimate& b) {
  return fmt("%.5f +- %.5f vs %.5f +- %.5f", a.mean, 1.96 * a.std_error, b.mean, 1.96 * b.std_error);
}

// ---------------------------------------------------------------- moments

Reports moments_suite(const VerifyOptions& opt) {
  RunConfig c;
  c.experiment = Experiment::lookdown;
  c.m = 128;
  c.gamma = 1.0;
  c.kernel.epsilon = 0.5;
  c.horizon = 0.5;
  c.record_times = {0.5};
  c.initial = InitialLaw::point(0.0);
  c.n_reps = scaled(400, opt);
  c.master_seed = seed_for(opt, 1);
  const EnsembleResult r = run(c, {opt.workers, false});
  const Estimate x = r.pooled.at(keyed("mean_x", 0.5));
  const Estimate x2 = r.pooled.at(keyed("mean_x2", 0.5));
  const double target = base_kernel().rho_eps() * 0.5;

  CriterionReport c1 = make_report(1, "mean preservation");
  c1.pass = std::abs(x.mean) < 4.0 * x.std_error;
  c1.detail = fmt("E<Z,x> = %.5f, 4 se = %.5f, n = %zu", x.mean, 4.0 * x.std_error, x.n);
  c1.numbers = {{"estimate", estimate_json(x)}};

  CriterionReport c2 = make_report(2, "second moment growth");
  const double tol = std::max(4.0 * x2.std_error, 0.01 * target);
  c2.pass = std::abs(x2.mean - target) <= tol;
  c2.detail = fmt("E<Z,x^2> = %.5f vs rho_eps t = %.5f, |diff| = %.5f, tol = %.5f", x2.mean, target,
                  std::abs(x2.mean - target), tol);
  c2.numbers = {{"estimate", estimate_json(x2)}, {"target", target}, {"tolerance", tol}};
  return {c1, c2};
}

// ---------------------------------------------------------------- duality

Reports duality_suite(const VerifyOptions& opt) {
  const double t = 0.25;
  const TestFunction phi = TestFunction::bump(1.0, 0.0, 1.0);
  const InitialLaw mu = InitialLaw::point(0.0);
  const SimulationConfig sim = particle_config(256, base_kernel(), mu);
  const std::vector<double> records{t};

  const auto reps = run_replicates(
      scaled(400, opt), seed_for(opt, 3),
      [&](std::size_t, Rng& rng) {
        const Trajectory tr = checked_simulate(sim, t, records, rng);
        ReplicateSummary s;
        s.values["order2"] = tensor_u_statistic(tr.records.back().positions, phi, 2);
        s.values["order3"] = tensor_u_statistic(tr.records.back().positions, phi, 3);
        return s;
      },
      opt.workers);
  const auto pooled = pool(reps);
  const Estimate fwd2 = pooled.at("order2"), fwd3 = pooled.at("order3");

  const std::size_t n_dual = scaled(2000, opt);
  const auto duals = parallel_map<DualEstimate>(
      2,
      [&](std::size_t k) {
        Rng rng = Rng::for_replicate(seed_for(opt, 4), k);
        return dual_moment_estimate(mu, tensor_power(phi), static_cast<int>(k) + 2, t, base_kernel(), 1.0, n_dual,
                                    1e-3, rng);
      },
      opt.workers);
  Rng rng_s = Rng::for_replicate(seed_for(opt, 4), 2);
  const DualEstimate strat = second_moment_dual(mu, phi, phi, t, base_kernel(), 1.0, n_dual, rng_s);

  CriterionReport c = make_report(3, "duality");
  const bool ok2 = ci_overlap(fwd2, duals[0].estimate);
  const bool ok3 = ci_overlap(fwd3, duals[1].estimate);
  c.pass = ok2 && ok3;
  c.detail = fmt("pair: %s (%s); triple: %s (%s)", overlap_text(fwd2, duals[0].estimate).c_str(),
                 ok2 ? "overlap" : "no overlap", overlap_text(fwd3, duals[1].estimate).c_str(),
                 ok3 ? "overlap" : "no overlap");
  c.numbers = {{"forward_order2", estimate_json(fwd2)},
               {"dual_order2", estimate_json(duals[0].estimate)},
               {"forward_order3", estimate_json(fwd3)},
               {"dual_order3", estimate_json(duals[1].estimate)},
               {"stratified_order2", estimate_json(strat.estimate)},
               {"discarded", duals[0].discarded + duals[1].discarded}};
  return {c};
}

// ---------------------------------------------------------------- atomicity

Reports atomicity_suite(const VerifyOptions& opt) {
  const KernelSpec pure = KernelSpec::gaussian(1.0, 1.0, 0.0);
  const InitialLaw spread = InitialLaw::normal(0.0, 1.0);

  // Lineage-count law.
  CriterionReport c4 = make_report(4, "lineage law");
  {
    const std::size_t m = 64;
    const double t = 0.2;
    const SimulationConfig sim = particle_config(m, pure, spread);
    const std::vector<double> records{t};
    const std::size_t n = scaled(2000, opt);
    const auto counts = parallel_map<std::size_t>(
        n,
        [&](std::size_t k) {
          Rng rng = Rng::for_replicate(seed_for(opt, 5), k);
          return checked_simulate(sim, t, records, rng).records.back().lineage_count;
        },
        opt.workers);
    const LineageLawResult law = lineage_law_test(counts, m, 1.0, t);
    c4.pass = law.pass;
    c4.detail = fmt("TV = %.4f (threshold 0.05), n = %zu", law.tv_distance, n);
    c4.numbers = {{"tv_distance", law.tv_distance}, {"n", n}, {"empirical", law.empirical}, {"exact", law.exact}};
  }

  // Atom structure.
  CriterionReport c5 = make_report(5, "atomicity");
  {
    const std::size_t m = 64;
    std::vector<double> records;
    for (int k = 1; k <= 50; ++k) records.push_back(0.02 * k);
    const SimulationConfig sim0 = particle_config(m, pure, spread);
    SimulationConfig sim_eps = particle_config(m, base_kernel(), spread);
    const std::size_t n = scaled(100, opt);

    struct PathCheck {
      bool monotone = true;
      std::size_t decreases = 0;
      std::size_t ancestry_mismatches = 0;
      std::vector<double> z_star;
    };
    const auto checks = parallel_map<PathCheck>(
        n,
        [&](std::size_t k) {
          Rng rng = Rng::for_replicate(seed_for(opt, 6), k);
          const Trajectory tr = checked_simulate(sim0, records.back(), records, rng);
          PathCheck pc;
          long long previous = 0;
          for (const TrajectoryRecord& r : tr.records) {
            // Integer form of m^2 Z*: atom sizes are multiples of 1/m.
            long long sum_sq = 0;
            for (const Atom& a : r.measure.atoms) {
              const long long b = std::llround(a.mass * static_cast<double>(m));
              sum_sq += b * b;
            }
            if (sum_sq < previous) {
              pc.monotone = false;
              ++pc.decreases;
            }
            previous = sum_sq;
            pc.z_star.push_back(atom_statistic(r.measure));
            std::map<int, double> seen;
            for (std::size_t i = 0; i < r.positions.size(); ++i) {
              const auto [it, inserted] = seen.emplace(r.ancestors[i], r.positions[i]);
              if (!inserted && it->second != r.positions[i]) ++pc.ancestry_mismatches;
            }
          }
          return pc;
        },
        opt.workers);
    const auto distinct_failures = parallel_map<std::size_t>(
        n,
        [&](std::size_t k) {
          Rng rng = Rng::for_replicate(seed_for(opt, 7), k);
          const Trajectory tr = checked_simulate(sim_eps, records.back(), records, rng);
          std::size_t bad = 0;
          for (const TrajectoryRecord& r : tr.records) bad += r.measure.atom_count() != m ? 1 : 0;
          return bad;
        },
        opt.workers);

    std::size_t monotone_paths = 0, decreases = 0, mismatches = 0, distinct_bad = 0;
    std::vector<double> mean_z(records.size(), 0.0);
    for (const PathCheck& pc : checks) {
      monotone_paths += pc.monotone ? 1 : 0;
      decreases += pc.decreases;
      mismatches += pc.ancestry_mismatches;
      for (std::size_t i = 0; i < pc.z_star.size(); ++i) mean_z[i] += pc.z_star[i] / static_cast<double>(n);
    }
    for (std::size_t b : distinct_failures) distinct_bad += b;
    std::size_t mean_decreases = 0;
    for (std::size_t i = 1; i < mean_z.size(); ++i) mean_decreases += mean_z[i] < mean_z[i - 1] ? 1 : 0;

    c5.pass = monotone_paths == n && mismatches == 0 && distinct_bad == 0;
    c5.detail = fmt(
        "Z* non-decreasing on %zu/%zu paths (%zu decreases over %zu record steps); ancestry/position mismatches %zu; "
        "eps>0 records with coincident atoms %zu; ensemble-mean Z* %.4f -> %.4f with %zu decreases",
        monotone_paths, n, decreases, n * (records.size() - 1), mismatches, distinct_bad, mean_z.front(),
        mean_z.back(), mean_decreases);
    c5.numbers = {{"monotone_paths", monotone_paths},   {"paths", n},
                  {"decreases", decreases},             {"ancestry_mismatches", mismatches},
                  {"coincident_eps_records", distinct_bad}, {"mean_z_star", mean_z},
                  {"record_times", records}};
  }
  return {c4, c5};
}

// ---------------------------------------------------------------- spde

double heat_error(double dx) {
  const double sd0 = 0.5, horizon = 0.25;
  const KernelSpec kernel = KernelSpec::gaussian(0.0, 1.0, 1.0);
  auto pdf = [](double x, double var) { return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var); };
  const DensityField init = DensityField::from_function(8.0, dx, [&](double x) { return pdf(x, sd0 * sd0); });
  Rng rng(0);
  const SpdeRun run = solve_density(init, kernel, 0.0, horizon, stability_bound(kernel, dx), rng);
  const DensityField& f = run.snapshots.back();
  const double var = sd0 * sd0 + kernel.rho_eps() * horizon;
  double err = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(f.values[k] - pdf(f.x(k), var)));
  return err;
}

Reports spde_suite(const VerifyOptions& opt) {
  const double t = 0.25;
  const TestFunction phi = TestFunction::bump(1.0, 0.0, 1.0);
  const InitialLaw mu = InitialLaw::point(0.0);
  const std::vector<double> records{t};

  const SimulationConfig sim = particle_config(512, base_kernel(), mu);
  const auto particle = run_replicates(
      scaled(400, opt), seed_for(opt, 8),
      [&](std::size_t, Rng& rng) {
        const Trajectory tr = checked_simulate(sim, t, records, rng);
        ReplicateSummary s;
        s.values["first"] = tr.records.back().measure.normalized_integral(phi);
        s.values["second"] = tensor_u_statistic(tr.records.back().positions, phi, 2);
        return s;
      },
      opt.workers);

  const double dx = 0.05, half_width = 8.0;
  const double dt = stability_bound(base_kernel(), dx);
  const DensityField init = initial_density(mu, half_width, dx, 2.0 * dx);
  const auto fields = run_replicates(
      scaled(200, opt), seed_for(opt, 9),
      [&](std::size_t, Rng& rng) {
        const SpdeRun run = solve_density(init, base_kernel(), 1.0, t, dt, rng, records);
        const double p = density_moments(run.snapshots.back(), phi);
        ReplicateSummary s;
        s.values["first"] = p;
        s.values["second"] = p * p;
        s.values["clipped"] = run.clipped_mass;
        s.values["boundary"] = run.max_boundary_mass;
        return s;
      },
      opt.workers);
  const auto pp = pool(particle), pf = pool(fields);
  const Estimate p1 = pp.at("first"), p2 = pp.at("second"), f1 = pf.at("first"), f2 = pf.at("second");
  const double b1 = 0.05 * std::max(std::abs(p1.mean), std::abs(f1.mean));
  const double b2 = 0.05 * std::max(std::abs(p2.mean), std::abs(f2.mean));
  const bool ok1 = ci_overlap(p1, f1, b1), ok2 = ci_overlap(p2, f2, b2);

  const double e1 = heat_error(0.1), e2 = heat_error(0.05), e3 = heat_error(0.025);
  const double r1 = std::log2(e1 / e2), r2 = std::log2(e2 / e3);
  const bool ok_order = r1 >= 1.8 && r2 >= 1.8;

  CriterionReport c = make_report(6, "spde consistency");
  c.pass = ok1 && ok2 && ok_order;
  c.detail = fmt("first %s (%s); second %s (%s); heat-equation orders %.2f, %.2f", overlap_text(p1, f1).c_str(),
                 ok1 ? "overlap" : "no overlap", overlap_text(p2, f2).c_str(), ok2 ? "overlap" : "no overlap", r1, r2);
  c.numbers = {{"particle_first", estimate_json(p1)},
               {"particle_second", estimate_json(p2)},
               {"field_first", estimate_json(f1)},
               {"field_second", estimate_json(f2)},
               {"budget_first", b1},
               {"budget_second", b2},
               {"mean_clipped_mass", pf.at("clipped").mean},
               {"max_boundary_mass", pf.at("boundary").mean},
               {"heat_errors", {e1, e2, e3}},
               {"heat_orders", {r1, r2}},
               {"dt", dt}};
  return {c};
}

// ---------------------------------------------------------------- conditioning

Reports conditioning_suite(const VerifyOptions& opt) {
  const std::size_t n0 = 500;
  const double T = 0.3;
  const std::vector<double> records{T};
  const std::vector<double> deltas{0.3, 0.2, 0.1};
  SdsmConfig sc;
  sc.n0 = n0;
  sc.gamma = 1.0;
  sc.kernel = base_kernel();
  sc.initial = InitialLaw::point(0.0);
  sc.dt_max = 1e-3;

  const SimulationConfig sim = particle_config(n0, base_kernel(), sc.initial);
  const auto base = run_replicates(
      scaled(400, opt), seed_for(opt, 10),
      [&](std::size_t, Rng& rng) {
        ReplicateSummary s;
        s.values["x2"] = checked_simulate(sim, T, records, rng).records.back().measure.normalized_integral(
            TestFunction::square());
        return s;
      },
      opt.workers);
  const Estimate baseline = pool(base).at("x2");

  const std::size_t n_accept = scaled(300, opt);
  std::vector<Estimate> conditioned;
  std::vector<double> acceptance, gaps;
  json rungs = json::array();
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    const ConditionedMassSampler sampler(n0, 1.0, T, deltas[d]);
    const auto reps = run_replicates(
        n_accept, seed_for(opt, 11 + d),
        [&](std::size_t, Rng& rng) {
          const MassPath path = sampler.sample(rng);
          if (!(path.sup_deviation(T) < deltas[d])) throw NumericError("conditioned path left the band", 0.0);
          const SdsmTrajectory tr = simulate_sdsm_on_path(sc, path, records, rng);
          ReplicateSummary s;
          s.values["x2"] = tr.records.back().measure.normalized_integral(TestFunction::square());
          return s;
        },
        opt.workers);
    const Estimate e = pool(reps).at("x2");
    conditioned.push_back(e);
    acceptance.push_back(sampler.acceptance_probability());
    gaps.push_back(std::abs(e.mean - baseline.mean));
    rungs.push_back({{"delta", deltas[d]},
                     {"estimate", estimate_json(e)},
                     {"accepted", e.n},
                     {"acceptance_probability", sampler.acceptance_probability()},
                     {"gap", gaps.back()}});
  }

  // Rejection cross-check of the acceptance probability at the widest band.
  const std::size_t n_paths = scaled(4000, opt, 100);
  const auto hits = parallel_map<int>(
      n_paths,
      [&](std::size_t k) {
        Rng rng = Rng::for_replicate(seed_for(opt, 15), k);
        return sample_mass_path(n0, 1.0, T, rng).sup_deviation(T) < deltas[0] ? 1 : 0;
      },
      opt.workers);
  const double rate = static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0)) / static_cast<double>(n_paths);
  const double rate_se = std::sqrt(std::max(acceptance[0] * (1.0 - acceptance[0]), 1e-300) / static_cast<double>(n_paths));
  const bool rate_ok = std::abs(rate - acceptance[0]) <= 4.0 * rate_se;

  const bool trend = gaps[0] >= gaps[1] && gaps[1] >= gaps[2];
  const bool overlap = ci_overlap(conditioned.back(), baseline);
  const bool enough = std::all_of(conditioned.begin(), conditioned.end(), [](const Estimate& e) { return e.n >= 200; });

  CriterionReport c = make_report(7, "conditioning");
  c.pass = overlap && enough;
  c.warning = !trend || !rate_ok;
  c.detail = fmt(
      "baseline %.5f +- %.5f; gaps %.5f, %.5f, %.5f at delta 0.3, 0.2, 0.1 (%s); delta 0.1: %s (%s); "
      "acceptance %.3g, %.3g, %.3g; rejection check %.4f vs %.4f (%s)",
      baseline.mean, 1.96 * baseline.std_error, gaps[0], gaps[1], gaps[2], trend ? "monotone" : "not monotone",
      overlap_text(conditioned.back(), baseline).c_str(), overlap ? "overlap" : "no overlap", acceptance[0],
      acceptance[1], acceptance[2], rate, acceptance[0], rate_ok ? "consistent" : "inconsistent");
  c.numbers = {{"baseline", estimate_json(baseline)},
               {"rungs", rungs},
               {"monotone_trend", trend},
               {"rejection_rate", rate},
               {"rejection_paths", n_paths},
               {"exact_value", base_kernel().rho_eps() * T}};
  return {c};
}

// ---------------------------------------------------------------- flow

Reports flow_suite(const VerifyOptions& opt) {
  const KernelSpec pure = KernelSpec::gaussian(1.0, 1.0, 0.0);
  const double wide_b = 1e6;
  const KernelSpec rigid = KernelSpec::gaussian(1.0 / std::sqrt(wide_b * std::sqrt(std::numbers::pi)), wide_b, 0.0);
  std::vector<double> spaced(20);
  for (std::size_t i = 0; i < spaced.size(); ++i) spaced[i] = 0.5 * static_cast<double>(i) - 4.75;
  const std::vector<double> coincident(20, 0.3);
  const double horizon = 0.5, dt = 0.25;
  const std::size_t n = scaled(200, opt, 10);

  const auto paired = parallel_map<PairedCrossings>(
      n,
      [&](std::size_t k) {
        Rng rng = Rng::for_replicate(seed_for(opt, 16), k);
        return paired_crossing_counts(pure, spaced, horizon, dt, rng);
      },
      opt.workers);
  std::size_t not_worse = 0, strictly = 0, coarse_total = 0, fine_total = 0;
  for (const auto& p : paired) {
    not_worse += p.fine <= p.coarse ? 1 : 0;
    strictly += p.fine < p.coarse ? 1 : 0;
    coarse_total += p.coarse;
    fine_total += p.fine;
  }
  auto zero_runs = [&](const KernelSpec& kernel, const std::vector<double>& pts, std::uint64_t stream) {
    const auto counts = parallel_map<std::size_t>(
        n,
        [&](std::size_t k) {
          Rng rng = Rng::for_replicate(seed_for(opt, stream), k);
          return order_preservation_test(kernel, pts, horizon, dt, rng).crossing_count;
        },
        opt.workers);
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  };
  const std::size_t coincident_crossings = zero_runs(pure, coincident, 17);
  const std::size_t rigid_crossings = zero_runs(rigid, spaced, 18);

  CriterionReport c = make_report(8, "flow order preservation");
  const double frac = static_cast<double>(not_worse) / static_cast<double>(n);
  c.pass = frac >= 0.9 && coincident_crossings == 0 && rigid_crossings == 0;
  c.detail = fmt(
      "dt/2 count <= dt count in %zu/%zu paired runs (%.1f%%; strictly fewer in %zu); mean crossings %.3f -> %.3f; "
      "coincident crossings %zu; fully correlated crossings %zu",
      not_worse, n, 100.0 * frac, strictly, static_cast<double>(coarse_total) / static_cast<double>(n),
      static_cast<double>(fine_total) / static_cast<double>(n), coincident_crossings, rigid_crossings);
  c.numbers = {{"not_worse", not_worse},        {"runs", n},
               {"strictly_fewer", strictly},    {"coarse_total", coarse_total},
               {"fine_total", fine_total},      {"coincident_crossings", coincident_crossings},
               {"rigid_crossings", rigid_crossings}, {"dt", dt}};
  return {c};
}

// ---------------------------------------------------------------- determinism

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Reports determinism_suite(const VerifyOptions& opt) {
  std::vector<RunConfig> configs(3);
  configs[0].experiment = Experiment::lookdown;
  configs[0].m = 16;
  configs[0].horizon = 0.1;
  configs[0].record_times = {0.05, 0.1};
  configs[0].n_reps = 8;
  configs[1].experiment = Experiment::spde;
  configs[1].horizon = 0.02;
  configs[1].record_times = {0.02};
  configs[1].spde.half_width = 4.0;
  configs[1].spde.dx = 0.1;
  configs[1].n_reps = 4;
  configs[2].experiment = Experiment::sdsm;
  configs[2].sdsm = {20, 0.5, 0.05, true};
  configs[2].horizon = 0.05;
  configs[2].record_times = {0.05};
  configs[2].n_reps = 4;

  std::size_t compared = 0, identical = 0;
  json files = json::array();
  for (std::size_t k = 0; k < configs.size(); ++k) {
    RunConfig& c = configs[k];
    c.master_seed = seed_for(opt, 20 + k);
    std::vector<std::filesystem::path> outputs[2];
    for (int pass = 0; pass < 2; ++pass) {
      c.out_dir = (opt.scratch / ("run" + std::to_string(k) + (pass ? "b" : "a"))).string();
      std::filesystem::remove_all(c.out_dir);
      // The second pass also changes the worker count.
      const EnsembleResult r = run(c, {pass == 0 ? std::size_t{1} : std::max<std::size_t>(2, opt.workers), true});
      for (const auto& f : r.files) {
        if (f.filename() != "timing.json") outputs[pass].push_back(f);
      }
    }
    for (std::size_t i = 0; i < outputs[0].size(); ++i) {
      ++compared;
      const bool same = slurp(outputs[0][i]) == slurp(outputs[1][i]);
      identical += same ? 1 : 0;
      files.push_back({{"file", outputs[0][i].filename().string()}, {"experiment", to_string(c.experiment)},
                       {"identical", same}});
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(opt.scratch, ec);

  // Pooling under shuffled replicate order.
  std::vector<ReplicateSummary> reps(200);
  Rng rng = Rng::for_replicate(seed_for(opt, 30), 0);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    reps[k].index = k;
    reps[k].weight = 0.5 + rng.uniform();
    reps[k].values["a"] = rng.normal();
    reps[k].values["b"] = rng.exponential(2.0);
  }
  const auto reference = pool(reps);
  std::size_t shuffle_mismatch = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(reps.begin(), reps.end(), rng.engine());
    const auto again = pool(reps);
    for (const auto& [key, e] : reference) {
      const Estimate& o = again.at(key);
      if (o.mean != e.mean || o.std_error != e.std_error || o.n != e.n) ++shuffle_mismatch;
    }
  }

  // Stream independence smoke test.
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    Rng a = Rng::for_replicate(opt.master_seed, k), b = Rng::for_replicate(opt.master_seed, k + 1);
    std::vector<double> u(10000), v(10000);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = a.uniform();
      v[i] = b.uniform();
    }
    worst = std::max(worst, std::abs(correlation(u, v)));
  }

  CriterionReport c = make_report(9, "determinism and merge invariance");
  c.pass = compared > 0 && identical == compared && shuffle_mismatch == 0 && worst < 0.05;
  c.detail = fmt("%zu/%zu output files byte-identical across reruns; shuffled pooling mismatches %zu; "
                 "max |corr| between adjacent streams %.4f",
                 identical, compared, shuffle_mismatch, worst);
  c.numbers = {{"files", files}, {"shuffle_mismatches", shuffle_mismatch}, {"max_stream_correlation", worst}};
  return {c};
}

struct Suite {
  std::string name;
  std::vector<int> criteria;
  Reports (*run)(const VerifyOptions&);
};

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all = {
      {"moments", {1, 2}, moments_suite},         {"duality", {3}, duality_suite},
      {"atomicity", {4, 5}, atomicity_suite},     {"spde", {6}, spde_suite},
      {"conditioning", {7}, conditioning_suite},  {"flow", {8}, flow_suite},
      {"determinism", {9}, determinism_suite},
  };
  return all;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Suite& s : suites()) n.push_back(s.name);
    n.push_back("all");
    return n;
  }();
  return names;
}

std::vector<int> suite_criteria(const std::string& suite) {
  std::vector<int> ids;
  for (const Suite& s : suites()) {
    if (suite == "all" || suite == s.name) ids.insert(ids.end(), s.criteria.begin(), s.criteria.end());
  }
  if (ids.empty()) throw ArgumentError("unknown suite '" + suite + "'");
  return ids;
}

std::vector<CriterionReport> run_suite(const std::string& suite, const VerifyOptions& options,
                                       const std::function<void(const CriterionReport&)>& on_report) {
  suite_criteria(suite);
  std::vector<CriterionReport> out;
  for (const Suite& s : suites()) {
    if (suite != "all" && suite != s.name) continue;
    const auto start = std::chrono::steady_clock::now();
    Reports reports;
    try {
      reports = s.run(options);
    } catch (const std::exception& e) {
      for (int id : s.criteria) {
        CriterionReport r = make_report(id, s.name);
        r.pass = false;
        r.detail = std::string("error: ") + e.what();
        reports.push_back(r);
      }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (CriterionReport& r : reports) {
      r.seconds = seconds / static_cast<double>(reports.size());
      if (on_report) on_report(r);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string format_line(const CriterionReport& r) {
  const char* status = r.pass ? (r.warning ? "PASS (warning)" : "PASS") : "FAIL";
  return fmt("[%s] C%d %s: %s [%.1fs]", status, r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
}

nlohmann::json to_json(const CriterionReport& r) {
  return {{"id", r.id},           {"name", r.name},       {"pass", r.pass},          {"warning", r.warning},
          {"detail", r.detail},   {"numbers", r.numbers}, {"seconds", r.seconds}};
}

}  // namespace fve
