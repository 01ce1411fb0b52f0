#include <benchmark/benchmark.h>

#include "dyncop/copula.hpp"
#include "dyncop/gof.hpp"
#include "dyncop/pseudo.hpp"

namespace {

using namespace dyncop;

// The test statistic dominates every detector's runtime; the window length
// and the Monte-Carlo draw count are the two knobs that matter.

void BM_info_matrix_test(benchmark::State& state) {
  const CopulaSpec spec = state.range(0) == 0 ? CopulaSpec::gaussian(0.5)
                                              : CopulaSpec::student_t(0.5, 2.2);
  const PseudoSample ps =
      pseudo_observations(sample(spec, static_cast<int>(state.range(1)), 3));
  GofConfig cfg;
  cfg.mc_draws = static_cast<int>(state.range(2));
  for (auto _ : state)
    benchmark::DoNotOptimize(info_matrix_test(ps, spec, cfg));
}
BENCHMARK(BM_info_matrix_test)
    ->Args({0, 500, 4096})
    ->Args({0, 500, 16384})
    ->Args({1, 500, 4096})
    ->Args({0, 2000, 4096})
    ->Unit(benchmark::kMillisecond);

void BM_d_bar(benchmark::State& state) {
  const CopulaSpec spec = CopulaSpec::student_t(0.5, 2.2);
  const PseudoSample ps = pseudo_observations(sample(spec, 500, 3));
  for (auto _ : state) benchmark::DoNotOptimize(d_bar(ps, spec));
}
BENCHMARK(BM_d_bar)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
