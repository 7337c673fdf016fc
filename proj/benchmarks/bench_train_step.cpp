#include <benchmark/benchmark.h>

#include "tgflow/models.hpp"
#include "tgflow/rng.hpp"
#include "tgflow/training.hpp"

using namespace tgflow;

namespace {

CfmBatch random_batch(int rows, int n, uint64_t seed) {
  Rng rng(seed, 200);
  CfmBatch b;
  b.x_t = Tensor(rows, n);
  b.u_t = Tensor(rows, n);
  b.t_col = Tensor(rows, 1);
  for (int i = 0; i < rows; ++i) {
    b.t_col.at(i, 0) = rng.uniform();
    for (int j = 0; j < n; ++j) {
      b.x_t.at(i, j) = rng.normal();
      b.u_t.at(i, j) = rng.normal();
    }
  }
  return b;
}

void run_step(benchmark::State& state, VariantKind kind) {
  const int n = 4;
  TgfmModel model = build_model(kind, n, 16, 3);
  TrainConfig cfg;
  const CfmBatch batch = random_batch(256, n, 5);
  const AdamwConfig opt;
  for (auto _ : state) {
    Graph g;
    Binding binding = bind_params(g, model.params);
    LossBuild loss = build_total_loss(g, model, binding, batch, cfg);
    model.params.zero_grad();
    grad_params(loss.total, binding, model.params);
    clip_global_norm(model.params, cfg.clip_norm);
    adamw_step(model.params, opt);
    benchmark::DoNotOptimize(loss.total.scalar_value());
  }
}

}  // namespace

static void BM_TrainStepPlain(benchmark::State& state) {
  run_step(state, VariantKind::kPlainVf);
}
static void BM_TrainStepTensorGauge(benchmark::State& state) {
  run_step(state, VariantKind::kTensorVfTensorGauge);
}

BENCHMARK(BM_TrainStepPlain);
BENCHMARK(BM_TrainStepTensorGauge);
