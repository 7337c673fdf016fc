#include <benchmark/benchmark.h>

#include "tgflow/models.hpp"
#include "tgflow/rng.hpp"
#include "tgflow/sampler.hpp"

using namespace tgflow;

static void BM_IntegrateRk4(benchmark::State& state) {
  const int n = 4;
  TgfmModel model = build_model(VariantKind::kGaugeFlow, n, 16, 3);
  Rng rng(9, 300);
  Tensor starts(64, n);
  for (double& x : starts.data) x = rng.normal();
  IntegratorSpec spec{IntegrateMethod::kRk4, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    Tensor out = integrate(model_velocity(model), starts, spec);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(BM_IntegrateRk4)->Arg(20)->Arg(100);
