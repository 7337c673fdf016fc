#include "tgflow/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tgflow/errors.hpp"
#include "tgflow/rng.hpp"

namespace tgflow {

CfmSample cfm_pair(std::span<const double> x0, std::span<const double> x1, double t) {
  if (x0.size() != x1.size()) throw ShapeError("cfm_pair: endpoint length mismatch");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("cfm_pair: t must be in [0,1]");
  CfmSample s;
  s.x0.assign(x0.begin(), x0.end());
  s.x1.assign(x1.begin(), x1.end());
  s.t = t;
  s.x_t.resize(x0.size());
  s.u_t.resize(x0.size());
  for (size_t i = 0; i < x0.size(); ++i) {
    s.x_t[i] = t * x1[i] + (1.0 - t) * x0[i];
    s.u_t[i] = x1[i] - x0[i];
  }
  return s;
}

CfmBatch pack_batch(std::span<const CfmSample> samples, int n) {
  if (samples.empty()) throw ShapeError("empty interpolant batch");
  CfmBatch b;
  const int rows = static_cast<int>(samples.size());
  b.x_t = Tensor(rows, n);
  b.u_t = Tensor(rows, n);
  b.t_col = Tensor(rows, 1);
  for (int i = 0; i < rows; ++i) {
    const CfmSample& s = samples[i];
    if (static_cast<int>(s.x_t.size()) != n) throw ShapeError("interpolant dimension mismatch");
    for (int j = 0; j < n; ++j) {
      b.x_t.at(i, j) = s.x_t[j];
      b.u_t.at(i, j) = s.u_t[j];
    }
    b.t_col.at(i, 0) = s.t;
  }
  return b;
}

Var gradient_penalty(Graph& g, Var s_per_sample, Var x, Var t_col) {
  if (s_per_sample.cols() != 1) throw ShapeError("gradient_penalty expects a column of scalars");
  Var total = sum_all(s_per_sample);
  const Var wrt[] = {x, t_col};
  std::vector<Var> grads = backward(total, wrt);
  Var spatial = sqrt_v(sum_cols(square(grads[0])));
  Var temporal = abs_v(grads[1]);
  return mean_all(add(spatial, temporal));
}

LossBuild build_total_loss(Graph& g, const TgfmModel& model, const Binding& binding,
                           const CfmBatch& batch, const TrainConfig& cfg) {
  Var x = constant(g, batch.x_t);
  Var t_col = constant(g, batch.t_col);
  Var u = constant(g, batch.u_t);

  VelocityParts parts = build_velocity_parts(g, model, binding, x, t_col);
  Var resid = sub(parts.veff, u);
  LossBuild out;
  out.fm = mean_all(sum_cols(square(resid)));

  if (!has_gauge(model.kind)) {
    out.reg_a = scalar_const(g, 0.0);
    out.reg_cons = scalar_const(g, 0.0);
    out.total = out.fm;
    return out;
  }

  Var basis_flat = constant(g, model.basis_flat);
  Var gauge_mat = matmul(parts.rank1_coeffs, basis_flat);
  out.reg_a = mean_all(sum_cols(square(gauge_mat)));
  out.reg_cons = gradient_penalty(g, sum_cols(parts.rank1_coeffs), x, t_col);
  out.total = add(out.fm, add(affine(out.reg_a, cfg.lambda_a, 0.0),
                              affine(out.reg_cons, cfg.lambda_cons, 0.0)));
  return out;
}

namespace {

LossBuild loss_for(const TgfmModel& model, std::span<const CfmSample> batch,
                   const TrainConfig& cfg, Graph& g) {
  CfmBatch packed = pack_batch(batch, model.dim_n);
  Binding binding = bind_params(g, model.params);
  return build_total_loss(g, model, binding, packed, cfg);
}

}  // namespace

double fm_loss(const TgfmModel& model, std::span<const CfmSample> batch) {
  Graph g;
  return loss_for(model, batch, TrainConfig{}, g).fm.scalar_value();
}

double gauge_norm_reg(const TgfmModel& model, std::span<const CfmSample> batch) {
  if (!has_gauge(model.kind)) return 0.0;
  Graph g;
  return loss_for(model, batch, TrainConfig{}, g).reg_a.scalar_value();
}

double consistency_reg(const TgfmModel& model, std::span<const CfmSample> batch) {
  if (!has_gauge(model.kind)) return 0.0;
  Graph g;
  return loss_for(model, batch, TrainConfig{}, g).reg_cons.scalar_value();
}

double total_loss(const TgfmModel& model, std::span<const CfmSample> batch,
                  const TrainConfig& cfg) {
  Graph g;
  return loss_for(model, batch, cfg, g).total.scalar_value();
}

namespace {

CfmBatch eval_batch(const Tensor& test_x, int first_row, int rows, uint64_t eval_seed) {
  const int n = test_x.cols;
  CfmBatch b;
  b.x_t = Tensor(rows, n);
  b.u_t = Tensor(rows, n);
  b.t_col = Tensor(rows, 1);
  for (int i = 0; i < rows; ++i) {
    const uint64_t row = static_cast<uint64_t>(first_row + i);
    const double t = Rng::uniform_at(eval_seed, streams::kEvalTime, row);
    b.t_col.at(i, 0) = t;
    for (int j = 0; j < n; ++j) {
      const double x0 = Rng::normal_at(eval_seed, streams::kEvalBase, row * n + j);
      const double x1 = test_x.at(first_row + i, j);
      b.x_t.at(i, j) = t * x1 + (1.0 - t) * x0;
      b.u_t.at(i, j) = x1 - x0;
    }
  }
  return b;
}

}  // namespace

double fm_test_loss_model(const TgfmModel& model, const Tensor& test_x, uint64_t eval_seed) {
  if (test_x.rows == 0) return 0.0;
  constexpr int kChunk = 256;
  double sq_sum = 0.0;
  for (int first = 0; first < test_x.rows; first += kChunk) {
    const int rows = std::min(kChunk, test_x.rows - first);
    CfmBatch b = eval_batch(test_x, first, rows, eval_seed);
    Graph g;
    Binding binding = bind_params(g, model.params);
    Var x = constant(g, b.x_t);
    Var t_col = constant(g, b.t_col);
    VelocityParts parts = build_velocity_parts(g, model, binding, x, t_col);
    const Tensor& v = parts.veff.value();
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < test_x.cols; ++j) {
        const double r = v.at(i, j) - b.u_t.at(i, j);
        sq_sum += r * r;
      }
  }
  return sq_sum / static_cast<double>(test_x.rows);
}

std::vector<EpochLog> train(TgfmModel& model, const Tensor& train_x, const Tensor& test_x,
                            const TrainConfig& cfg, int start_epoch, const TrainHooks& hooks) {
  if (train_x.cols != model.dim_n) throw ShapeError("training data dimension mismatch");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  const int n = model.dim_n;
  const int n_train = train_x.rows;
  const AdamwConfig opt{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay};

  std::vector<EpochLog> logs;
  std::vector<int> order(n_train);
  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t_start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(cfg.seed, derive_stream(streams::kShuffle, static_cast<uint64_t>(epoch)));
    for (int i = n_train - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.index(i + 1)]);
    Rng time_rng(cfg.seed, derive_stream(streams::kCfmTime, static_cast<uint64_t>(epoch)));
    Rng base_rng(cfg.seed, derive_stream(streams::kCfmBase, static_cast<uint64_t>(epoch)));

    double total_sum = 0.0;
    double fm_sum = 0.0;
    int batch_index = 0;
    for (int first = 0; first < n_train; first += cfg.batch_size, ++batch_index) {
      const int rows = std::min(cfg.batch_size, n_train - first);
      CfmBatch b;
      b.x_t = Tensor(rows, n);
      b.u_t = Tensor(rows, n);
      b.t_col = Tensor(rows, 1);
      for (int i = 0; i < rows; ++i) {
        const double t = time_rng.uniform();
        b.t_col.at(i, 0) = t;
        const int row = order[first + i];
        for (int j = 0; j < n; ++j) {
          const double x0 = base_rng.normal();
          const double x1 = train_x.at(row, j);
          b.x_t.at(i, j) = t * x1 + (1.0 - t) * x0;
          b.u_t.at(i, j) = x1 - x0;
        }
      }

      Graph g;
      Binding binding = bind_params(g, model.params);
      LossBuild loss;
      try {
        loss = build_total_loss(g, model, binding, b, cfg);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      const double total_value = loss.total.scalar_value();
      if (!std::isfinite(total_value))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch_index));
      model.params.zero_grad();
      grad_params(loss.total, binding, model.params);
      clip_global_norm(model.params, cfg.clip_norm);
      adamw_step(model.params, opt);

      total_sum += total_value * rows;
      fm_sum += loss.fm.scalar_value() * rows;
    }

    EpochLog row;
    row.epoch = epoch;
    row.train_loss = total_sum / static_cast<double>(n_train);
    row.train_fm = fm_sum / static_cast<double>(n_train);
    row.test_loss = fm_test_loss_model(model, test_x, cfg.seed);
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    logs.push_back(row);
    if (hooks.on_epoch) hooks.on_epoch(row);
  }
  return logs;
}

}  // namespace tgflow
