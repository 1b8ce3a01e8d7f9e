// fve <subcommand> --config <path> [--seed N] [--reps N] [--out DIR]
//
// Exit codes: 0 ok, 1 acceptance failure or failed run, 2 usage or config error.
// FVE_WORKERS overrides the worker count.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fve/config.hpp"
#include "fve/error.hpp"
#include "fve/runner.hpp"
#include "fve/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::string> out;
  std::optional<std::string> suite;
  std::optional<double> scale;
};

void add_common(CLI::App* sub, Options& o, bool config_required) {
  auto* c = sub->add_option("--config", o.config, "JSON run configuration");
  if (config_required) c->required();
  c->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--reps", o.reps, "number of replicates")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output directory");
}

int execute(fve::Experiment experiment, const Options& o) {
  fve::RunConfig config;
  if (!o.config.empty()) config = fve::load_config(o.config);
  config.experiment = experiment;
  if (o.seed) config.master_seed = *o.seed;
  if (o.reps) config.n_reps = *o.reps;
  if (o.out) config.out_dir = *o.out;
  if (o.suite) config.verify.suite = *o.suite;
  if (o.scale) config.verify.scale = *o.scale;
  if (experiment == fve::Experiment::verify) fve::suite_criteria(config.verify.suite);
  config.validate();

  const fve::EnsembleResult result = fve::run(config);
  for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
  if (experiment == fve::Experiment::verify) {
    std::size_t passed = 0, total = 0;
    for (const auto& c : result.extra.at("criteria")) {
      ++total;
      passed += c.at("pass").get<bool>() ? 1 : 0;
    }
    std::cout << "verify " << config.verify.suite << ": " << passed << "/" << total << " criteria passed\n";
    return result.passed ? kOk : kFail;
  }
  for (const auto& [key, e] : result.pooled) {
    std::printf("%-28s %.6g +- %.3g (n=%zu)\n", key.c_str(), e.mean, 1.96 * e.std_error, e.n);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleming-Viot processes in an environment: simulators and acceptance suites"};
  app.set_version_flag("--version", fve::code_version());
  app.require_subcommand(1);

  Options options;
  const std::pair<const char*, const char*> commands[] = {
      {"lookdown", "lookdown particle system"}, {"moran", "Moran particle system"},
      {"dual", "dual moment estimates"},        {"spde", "density SPDE solver"},
      {"sdsm", "conditioned branching system"}, {"diagnose", "atom reports for a trajectory CSV"},
      {"verify", "acceptance suites"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    const bool is_verify = std::string(name) == "verify";
    add_common(sub, options, !is_verify);
    if (is_verify) {
      sub->add_option("--suite", options.suite, "moments|duality|atomicity|spde|conditioning|flow|determinism|all");
      sub->add_option("--scale", options.scale, "multiplier on replicate counts")->check(CLI::PositiveNumber);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (const auto& [name, help] : commands) {
      if (app.got_subcommand(name)) return execute(fve::experiment_from_string(name), options);
    }
  } catch (const fve::ConfigError& e) {
    std::cerr << "fve: " << e.what() << '\n';
    return kUsage;
  } catch (const fve::ArgumentError& e) {
    std::cerr << "fve: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "fve: run failed: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
