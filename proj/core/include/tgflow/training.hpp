#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tgflow/models.hpp"
#include "tgflow/tensor.hpp"

namespace tgflow {

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-6;
  int batch_size = 256;
  int epochs = 180;
  double clip_norm = 1.0;
  double lambda_a = 1e-5;
  double lambda_cons = 1e-5;
  uint64_t seed = 0;
};

/// Straight-line interpolant between a base draw and a data draw.
struct CfmSample {
  std::vector<double> x0;
  std::vector<double> x1;
  double t = 0.0;
  std::vector<double> x_t;  // t*x1 + (1-t)*x0
  std::vector<double> u_t;  // x1 - x0
};

CfmSample cfm_pair(std::span<const double> x0, std::span<const double> x1, double t);

/// Batched interpolants ready for one loss evaluation.
struct CfmBatch {
  Tensor x_t;    // batch x n
  Tensor u_t;    // batch x n
  Tensor t_col;  // batch x 1
};

CfmBatch pack_batch(std::span<const CfmSample> samples, int n);

/// Loss nodes of one batch: total = fm + lambda_a * reg_a + lambda_cons * reg_cons.
struct LossBuild {
  Var total;
  Var fm;
  Var reg_a;
  Var reg_cons;
};

LossBuild build_total_loss(Graph& g, const TgfmModel& model, const Binding& binding,
                           const CfmBatch& batch, const TrainConfig& cfg);

/// Batch mean of (norm of the spatial input gradient + absolute time
/// derivative) of a per-sample scalar s built on leaves x and t_col. The
/// gradients are emitted as graph nodes, so the result stays differentiable.
Var gradient_penalty(Graph& g, Var s_per_sample, Var x, Var t_col);

// Value-only operation surfaces (each builds a throwaway graph).
double fm_loss(const TgfmModel& model, std::span<const CfmSample> batch);
double gauge_norm_reg(const TgfmModel& model, std::span<const CfmSample> batch);
double consistency_reg(const TgfmModel& model, std::span<const CfmSample> batch);
double total_loss(const TgfmModel& model, std::span<const CfmSample> batch,
                  const TrainConfig& cfg);

/// Flow-matching loss over a held-out split with draws frozen by eval_seed
/// (streams::kEvalTime / kEvalBase indexed by row), so repeated evaluations
/// and different models share the same noise.
double fm_test_loss_model(const TgfmModel& model, const Tensor& test_x, uint64_t eval_seed);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double train_fm = 0.0;
  double test_loss = 0.0;
  double seconds = 0.0;
};

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
};

/// Shuffled mini-batch AdamW training with fresh (t, x0) draws per sample,
/// gradient clipping at cfg.clip_norm and a frozen-draw test loss per epoch.
/// All randomness is derived from (cfg.seed, epoch), so a run resumed from
/// start_epoch reproduces the uninterrupted trajectory.
std::vector<EpochLog> train(TgfmModel& model, const Tensor& train_x, const Tensor& test_x,
                            const TrainConfig& cfg, int start_epoch = 0,
                            const TrainHooks& hooks = {});

}  // namespace tgflow
