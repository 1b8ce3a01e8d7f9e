#include <benchmark/benchmark.h>

#include <vector>

#include "fve/diffusion_window.hpp"
#include "fve/kernel.hpp"
#include "fve/lookdown.hpp"
#include "fve/spde.hpp"

namespace {

const fve::KernelSpec kKernel = fve::KernelSpec::gaussian(1.0, 1.0, 0.5);

std::vector<double> spread_points(std::size_t m) {
  fve::Rng rng(1);
  std::vector<double> x(m);
  for (double& v : x) v = rng.normal();
  return x;
}

void BM_FactorEigen(benchmark::State& state) {
  const auto x = spread_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fve::factor_noise(kKernel, x, fve::FactorMethod::eigen));
}
BENCHMARK(BM_FactorEigen)->RangeMultiplier(2)->Range(16, 256);

void BM_FactorPivotedCholesky(benchmark::State& state) {
  const auto x = spread_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fve::factor_noise(kKernel, x, fve::FactorMethod::pivoted_cholesky));
  }
}
BENCHMARK(BM_FactorPivotedCholesky)->RangeMultiplier(2)->Range(16, 1024);

void BM_JointIncrement(benchmark::State& state) {
  const auto x = spread_points(static_cast<std::size_t>(state.range(0)));
  fve::Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(fve::sample_joint_increment(kKernel, x, 1e-3, rng));
}
BENCHMARK(BM_JointIncrement)->RangeMultiplier(4)->Range(16, 1024);

void BM_WindowEvents(benchmark::State& state) {
  const auto x = spread_points(static_cast<std::size_t>(state.range(0)));
  fve::Rng rng(3);
  std::vector<double> out;
  for (auto _ : state) {
    fve::DiffusionWindow w(kKernel, x, 0.0, rng);
    for (int k = 0; k < 100; ++k) {
      const double t = 9e-6 * (k + 1);
      const std::size_t i = rng.index(x.size());
      std::size_t j = rng.index(x.size() - 1);
      if (j >= i) ++j;
      w.copy(i, j, t);
    }
    w.finish(1e-3, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_WindowEvents)->Arg(128)->Arg(512);

void BM_Lookdown(benchmark::State& state) {
  fve::SimulationConfig cfg;
  cfg.m = static_cast<std::size_t>(state.range(0));
  cfg.kernel = kKernel;
  const std::vector<double> times{0.1};
  fve::Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(fve::simulate(cfg, 0.1, times, rng));
}
BENCHMARK(BM_Lookdown)->Arg(64)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SpdeStep(benchmark::State& state) {
  const double dx = 0.05;
  const auto f = fve::DensityField::normal(8.0, dx, 0.0, 0.1);
  const double dt = fve::stability_bound(kKernel, dx);
  fve::Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(fve::solve_density(f, kKernel, 1.0, 100 * dt, dt, rng));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SpdeStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
