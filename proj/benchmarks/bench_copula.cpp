#include <benchmark/benchmark.h>

#include "dyncop/copula.hpp"
#include "dyncop/fit.hpp"
#include "dyncop/pseudo.hpp"

namespace {

using namespace dyncop;

const CopulaSpec kSpecs[3] = {
    CopulaSpec::gaussian(0.5),
    CopulaSpec::student_t(0.5, 2.2),
    CopulaSpec::clayton(0.5),
};

void BM_log_density(benchmark::State& state) {
  const CopulaSpec& spec = kSpecs[state.range(0)];
  const Eigen::ArrayX2d u = sample(spec, 1024, 7);
  int i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_density(spec, u(i & 1023, 0), u(i & 1023, 1)));
    ++i;
  }
}
BENCHMARK(BM_log_density)->Arg(0)->Arg(1)->Arg(2);

void BM_log_density_grad(benchmark::State& state) {
  const CopulaSpec& spec = kSpecs[state.range(0)];
  const Eigen::ArrayX2d u = sample(spec, 1024, 7);
  int i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        log_density_grad(spec, u(i & 1023, 0), u(i & 1023, 1)));
    ++i;
  }
}
BENCHMARK(BM_log_density_grad)->Arg(0)->Arg(1)->Arg(2);

void BM_sample(benchmark::State& state) {
  const CopulaSpec& spec = kSpecs[state.range(0)];
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(sample(spec, 1000, seed++));
}
BENCHMARK(BM_sample)->Arg(0)->Arg(1)->Arg(2);

void BM_fit_copula(benchmark::State& state) {
  const CopulaSpec& spec = kSpecs[state.range(0)];
  const PseudoSample ps = pseudo_observations(sample(spec, 500, 11));
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_copula(ps, spec.family));
}
BENCHMARK(BM_fit_copula)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
