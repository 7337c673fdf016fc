#include <benchmark/benchmark.h>

#include "tgflow/algebra.hpp"
#include "tgflow/rng.hpp"

using namespace tgflow;

static void BM_TensorContractRank3(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7, 100);
  CoeffTensor t(3, n, so_dimension(n));
  for (double& x : t.values) x = rng.uniform() - 0.5;
  std::vector<std::vector<double>> dirs(3, std::vector<double>(n));
  for (auto& d : dirs)
    for (double& x : d) x = rng.uniform() - 0.5;
  for (auto _ : state) {
    auto out = tensor_contract(t, dirs);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_TensorContractRank3)->Arg(2)->Arg(4)->Arg(8);

static void BM_LieAction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SkewBasis basis = so_basis(n);
  Rng rng(7, 101);
  std::vector<double> coeffs(basis.count());
  std::vector<double> v(n);
  for (double& x : coeffs) x = rng.uniform() - 0.5;
  for (double& x : v) x = rng.uniform() - 0.5;
  for (auto _ : state) {
    auto out = lie_action(coeffs, basis, v);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_LieAction)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
