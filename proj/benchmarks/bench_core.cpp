#include <benchmark/benchmark.h>

#include "blindcal/geometry.hpp"
#include "blindcal/rng.hpp"
#include "blindcal/sensing.hpp"
#include "blindcal/solver.hpp"
#include "blindcal/wavelet.hpp"

namespace {

Eigen::VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed) {
  blindcal::RandomStream stream(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = stream.gaussian();
  return v;
}

void BM_HardThreshold(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::VectorXd u = gaussian_vector(n, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(blindcal::hard_threshold(u, n / 16));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_HardThreshold)->Range(1 << 10, 1 << 18);

void BM_ProjectGainBox(benchmark::State& state) {
  const Eigen::Index m = state.range(0);
  const Eigen::VectorXd v =
      Eigen::VectorXd::Ones(m) + 2.0 * gaussian_vector(m, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(blindcal::project_gain_box(v, 0.5));
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_ProjectGainBox)->Range(1 << 6, 1 << 14);

void BM_WaveletAnalyze(benchmark::State& state) {
  const Eigen::Index side = state.range(0);
  const blindcal::WaveletBasis basis(side);
  const Eigen::VectorXd x = gaussian_vector(basis.pixel_count(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(basis.analyze(x));
  state.SetItemsProcessed(state.iterations() * basis.pixel_count());
}
BENCHMARK(BM_WaveletAnalyze)->RangeMultiplier(2)->Range(16, 256);

void BM_WaveletRoundTrip(benchmark::State& state) {
  const Eigen::Index side = state.range(0);
  const blindcal::WaveletBasis basis(side);
  const Eigen::VectorXd x = gaussian_vector(basis.pixel_count(), 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(basis.synthesize(basis.analyze(x)));
  state.SetItemsProcessed(state.iterations() * basis.pixel_count());
}
BENCHMARK(BM_WaveletRoundTrip)->RangeMultiplier(2)->Range(16, 256);

void BM_Synthesize(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const blindcal::Dimensions dims{n, n / 2, 4, n / 16};
  const blindcal::SensingEnsemble ensemble = blindcal::draw_ensemble(dims, 5);
  const Eigen::VectorXd x = blindcal::draw_sparse_signal(dims.n, dims.k, 6);
  const Eigen::VectorXd g = blindcal::draw_gains(dims.m, 0.5, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(blindcal::synthesize(ensemble, x, g));
  state.SetItemsProcessed(state.iterations() * dims.m * dims.n * dims.p);
}
BENCHMARK(BM_Synthesize)->RangeMultiplier(4)->Range(64, 1024);

void BM_SeededRegeneration(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const blindcal::SeededSnapshotSource source(n / 2, n, 4, 8);
  Eigen::VectorXd sink = Eigen::VectorXd::Zero(n / 2);
  const Eigen::VectorXd x = gaussian_vector(n, 9);
  for (auto _ : state) {
    source.with_matrix(0, [&](const Eigen::MatrixXd& a) { sink = a * x; });
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(state.iterations() * (n / 2) * n);
}
BENCHMARK(BM_SeededRegeneration)->RangeMultiplier(4)->Range(64, 1024);

void BM_SolveBlindCalibration(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const blindcal::Dimensions dims{n, n / 2, 6, n / 16};
  const blindcal::ProblemInstance inst =
      blindcal::generate_instance(dims, 0.5, 10);
  blindcal::SolverConfig config;
  config.k = dims.k;
  config.rho = 0.5;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        blindcal::solve_bc_iht(inst.ensemble, inst.snapshots, config));
}
BENCHMARK(BM_SolveBlindCalibration)->RangeMultiplier(2)->Range(64, 256)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
