#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "tgflow/models.hpp"
#include "tgflow/tensor.hpp"

namespace tgflow {

enum class IntegrateMethod { kEuler, kRk4 };

const char* method_name(IntegrateMethod m);
IntegrateMethod method_from(std::string_view name);

struct IntegratorSpec {
  IntegrateMethod method = IntegrateMethod::kRk4;
  int steps = 100;
};

/// Batched velocity field: rows of states at a shared time.
using VelocityFn = std::function<Tensor(const Tensor& x, double t)>;

/// Fixed-step integration of dx/dt = f(x, t) from t = 0 to t = 1 for every
/// row of x0. Throws NumericError with the step index on a non-finite state.
Tensor integrate(const VelocityFn& f, Tensor x0, const IntegratorSpec& spec);

/// Single start point through the model's effective velocity.
std::vector<double> integrate_point(const TgfmModel& model, std::span<const double> x0,
                                    const IntegratorSpec& spec);

/// Adapter; the model must outlive the returned callable.
VelocityFn model_velocity(const TgfmModel& model);

struct EvalMetrics {
  double fm_test_loss = 0.0;
  int64_t param_count = 0;
};

EvalMetrics evaluate(const TgfmModel& model, const Tensor& test_x, uint64_t eval_seed);
EvalMetrics evaluate_fn(const VelocityFn& velocity, int64_t param_count, const Tensor& test_x,
                        uint64_t eval_seed);

struct MetricPoint {
  int n = 0;
  VariantKind kind = VariantKind::kPlainVf;
  double value = 0.0;
};

struct RatioPoint {
  int n = 0;
  VariantKind kind = VariantKind::kPlainVf;
  double value = 0.0;
  double ratio = 0.0;
};

/// Divides every value by the plain-VF + tensor-gauge value of the same n;
/// the reference rows come out exactly 1.0. Throws MissingInputError when a
/// group lacks the reference variant.
std::vector<RatioPoint> normalize_report(std::span<const MetricPoint> points);

}  // namespace tgflow
