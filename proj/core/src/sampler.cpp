#include "tgflow/sampler.hpp"

#include <cmath>
#include <string>

#include "tgflow/errors.hpp"
#include "tgflow/training.hpp"

namespace tgflow {

const char* method_name(IntegrateMethod m) {
  return m == IntegrateMethod::kEuler ? "euler" : "rk4";
}

IntegrateMethod method_from(std::string_view name) {
  if (name == "euler") return IntegrateMethod::kEuler;
  if (name == "rk4") return IntegrateMethod::kRk4;
  throw ConfigError("unknown integrator method: " + std::string(name));
}

namespace {

Tensor axpy(const Tensor& x, double a, const Tensor& y) {
  Tensor out = x;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] += a * y.data[i];
  return out;
}

}  // namespace

Tensor integrate(const VelocityFn& f, Tensor x0, const IntegratorSpec& spec) {
  if (spec.steps < 1) throw ConfigError("integrator needs at least one step");
  Tensor x = std::move(x0);
  const double h = 1.0 / static_cast<double>(spec.steps);
  for (int s = 0; s < spec.steps; ++s) {
    const double t = s * h;
    if (spec.method == IntegrateMethod::kEuler) {
      x = axpy(x, h, f(x, t));
    } else {
      const Tensor k1 = f(x, t);
      const Tensor k2 = f(axpy(x, h / 2.0, k1), t + h / 2.0);
      const Tensor k3 = f(axpy(x, h / 2.0, k2), t + h / 2.0);
      const Tensor k4 = f(axpy(x, h, k3), t + h);
      for (size_t i = 0; i < x.size(); ++i)
        x.data[i] += h / 6.0 * (k1.data[i] + 2.0 * k2.data[i] + 2.0 * k3.data[i] + k4.data[i]);
    }
    if (!x.all_finite())
      throw NumericError("non-finite state at integration step " + std::to_string(s));
  }
  return x;
}

std::vector<double> integrate_point(const TgfmModel& model, std::span<const double> x0,
                                    const IntegratorSpec& spec) {
  Tensor start = Tensor::row(x0);
  return integrate(model_velocity(model), std::move(start), spec).row_vector(0);
}

VelocityFn model_velocity(const TgfmModel& model) {
  const TgfmModel* m = &model;
  return [m](const Tensor& x, double t) {
    Graph g;
    Binding binding = bind_params(g, m->params);
    Var xv = constant(g, x);
    Var tv = constant(g, Tensor::full(x.rows, 1, t));
    return build_velocity_parts(g, *m, binding, xv, tv).veff.value();
  };
}

EvalMetrics evaluate(const TgfmModel& model, const Tensor& test_x, uint64_t eval_seed) {
  return {fm_test_loss_model(model, test_x, eval_seed), model.params.total_params()};
}

EvalMetrics evaluate_fn(const VelocityFn& velocity, int64_t param_count, const Tensor& test_x,
                        uint64_t eval_seed) {
  if (test_x.rows == 0) return {0.0, param_count};
  const int n = test_x.cols;
  double sq_sum = 0.0;
  constexpr int kChunk = 256;
  for (int first = 0; first < test_x.rows; first += kChunk) {
    const int rows = std::min(kChunk, test_x.rows - first);
    // Frozen per-row draws, matching the model evaluation protocol, except
    // the velocity has to be evaluated per sample since times differ by row.
    for (int i = 0; i < rows; ++i) {
      const uint64_t row = static_cast<uint64_t>(first + i);
      const double t = Rng::uniform_at(eval_seed, streams::kEvalTime, row);
      Tensor x_t(1, n);
      std::vector<double> u(n);
      for (int j = 0; j < n; ++j) {
        const double x0 = Rng::normal_at(eval_seed, streams::kEvalBase, row * n + j);
        const double x1 = test_x.at(first + i, j);
        x_t.at(0, j) = t * x1 + (1.0 - t) * x0;
        u[j] = x1 - x0;
      }
      const Tensor v = velocity(x_t, t);
      for (int j = 0; j < n; ++j) {
        const double r = v.at(0, j) - u[j];
        sq_sum += r * r;
      }
    }
  }
  return {sq_sum / static_cast<double>(test_x.rows), param_count};
}

std::vector<RatioPoint> normalize_report(std::span<const MetricPoint> points) {
  std::vector<RatioPoint> out;
  out.reserve(points.size());
  for (const MetricPoint& p : points) {
    double ref = 0.0;
    bool found = false;
    for (const MetricPoint& q : points)
      if (q.n == p.n && q.kind == VariantKind::kPlainVfTensorGauge) {
        ref = q.value;
        found = true;
        break;
      }
    if (!found)
      throw MissingInputError("normalize_report: reference variant missing for n=" +
                              std::to_string(p.n));
    out.push_back({p.n, p.kind, p.value, p.value / ref});
  }
  return out;
}

}  // namespace tgflow
