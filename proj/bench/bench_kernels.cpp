// Serial reference vs OpenMP for the heavy kernels. Same inputs, same
// results; only wall time differs. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "covphase/detector.hpp"
#include "covphase/divergence.hpp"

using namespace covphase;

namespace {

const ChannelParams kChan(1.2, 0.0, 1.0);

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_KlMonteCarlo(benchmark::State& st) {
  const auto c = CodebookSpec::psk2n(3);
  for (auto _ : st) {
    benchmark::DoNotOptimize(kl_mc(c, kChan, 0.3, 50, 50000, Rng(1, 0), exec_of(st)));
  }
  st.SetItemsProcessed(st.iterations() * 50000);
}

void BM_QuadratureGrid(benchmark::State& st) {
  const std::vector<double> angles = {kPi / 4, kPi / 2, 3 * kPi / 4, kPi};
  for (auto _ : st) {
    benchmark::DoNotOptimize(single_letter_kl_grid(angles, kChan, 0.5, 256, exec_of(st)));
  }
}

void BM_PsiMoments(benchmark::State& st) {
  const ChannelParams unit(1.0, 0.0, 1.0);
  for (auto _ : st) {
    benchmark::DoNotOptimize(psi_moments_mc(unit, 3, 0.2, 10, 100000, Rng(1, 0), exec_of(st)));
  }
  st.SetItemsProcessed(st.iterations() * 100000);
}

void BM_Detector(benchmark::State& st) {
  const auto c = CodebookSpec::nbpsk(2);
  for (auto _ : st) {
    benchmark::DoNotOptimize(simulate_optimal_test(c, kChan, 0.3, 100, 10000, Rng(1, 0), exec_of(st)));
  }
  st.SetItemsProcessed(st.iterations() * 20000);
}

}  // namespace

BENCHMARK(BM_KlMonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadratureGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PsiMoments)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Detector)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
