#include "tgflow/models.hpp"

#include <cmath>
#include <string>

#include "tgflow/errors.hpp"

namespace tgflow {

namespace {

constexpr double kDirectionFloor = 1e-8;

int64_t ipow(int base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void require_finite(Var v, const char* net_name) {
  if (!v.value().all_finite())
    throw NumericError(std::string("non-finite values in ") + net_name);
}

}  // namespace

const char* variant_name(VariantKind kind) {
  switch (kind) {
    case VariantKind::kPlainVf: return "plain_vf";
    case VariantKind::kGaugeFlow: return "gauge_flow";
    case VariantKind::kTensorVfPlainGauge: return "tensor_vf_plain_gauge";
    case VariantKind::kPlainVfTensorGauge: return "plain_vf_tensor_gauge";
    case VariantKind::kTensorVfTensorGauge: return "tensor_vf_tensor_gauge";
  }
  return "unknown";
}

std::optional<VariantKind> variant_from(std::string_view name) {
  for (VariantKind k : kAllVariants)
    if (name == variant_name(k)) return k;
  return std::nullopt;
}

bool has_gauge(VariantKind kind) { return kind != VariantKind::kPlainVf; }

bool has_tensor_vf(VariantKind kind) {
  return kind == VariantKind::kTensorVfPlainGauge || kind == VariantKind::kTensorVfTensorGauge;
}

std::vector<int> gauge_ranks(VariantKind kind) {
  switch (kind) {
    case VariantKind::kPlainVf:
      return {};
    case VariantKind::kGaugeFlow:
    case VariantKind::kTensorVfPlainGauge:
      return {1};
    case VariantKind::kPlainVfTensorGauge:
    case VariantKind::kTensorVfTensorGauge:
      return {1, 2, 3};
  }
  return {};
}

TgfmModel build_model(VariantKind kind, int n, int width, uint64_t init_seed) {
  if (n < 1) throw ConfigError("model dimension must be >= 1");
  if (has_gauge(kind) && n < 2)
    throw ConfigError("gauge variants need n >= 2 (so(1) is trivial)");
  if (width < 1) throw ConfigError("model width must be >= 1");

  TgfmModel m;
  m.kind = kind;
  m.dim_n = n;
  m.width = width;
  m.init_seed = init_seed;
  m.basis = so_basis(n);
  m.basis_flat = flatten_basis(m.basis);

  Rng init(init_seed, streams::kWeightInit);
  const int in = n + 1;
  const int w = width;
  const int so_dim = m.basis.count();

  m.v_main = add_mlp(m.params, "v_main", MlpSpec{in, n, {w, w}}, init);
  if (!has_gauge(kind)) return m;

  m.v_aux = add_mlp(m.params, "v_aux", MlpSpec{in, n, {w, w}}, init);
  m.alpha_net = add_mlp(m.params, "alpha", MlpSpec{in, 1, {w, w}}, init);
  m.gauge_trunk = add_mlp(m.params, "gauge.trunk", MlpSpec{in, w, {w}, true}, init);
  for (int k : gauge_ranks(kind)) {
    const int out = static_cast<int>(ipow(n, k)) * so_dim;
    m.gauge_heads.push_back(
        add_mlp(m.params, "gauge.head" + std::to_string(k), MlpSpec{w, out, {}}, init));
  }
  if (has_tensor_vf(kind)) {
    m.t_hat_trunk = add_mlp(m.params, "t_hat.trunk", MlpSpec{in, w, {w}, true}, init);
    for (int k = 1; k <= 2; ++k) {
      const int out = static_cast<int>(ipow(n, k)) * n;
      m.t_hat_heads.push_back(
          add_mlp(m.params, "t_hat.head" + std::to_string(k), MlpSpec{w, out, {}}, init));
    }
  }
  return m;
}

int64_t variant_param_count(VariantKind kind, int n, int width) {
  const int in = n + 1;
  const int w = width;
  const int so_dim = so_dimension(n);
  int64_t total = mlp_param_count(MlpSpec{in, n, {w, w}});
  if (!has_gauge(kind)) return total;
  total += mlp_param_count(MlpSpec{in, n, {w, w}});   // v_aux
  total += mlp_param_count(MlpSpec{in, 1, {w, w}});   // alpha
  total += mlp_param_count(MlpSpec{in, w, {w}});      // gauge trunk
  for (int k : gauge_ranks(kind))
    total += mlp_param_count(MlpSpec{w, static_cast<int>(ipow(n, k)) * so_dim, {}});
  if (has_tensor_vf(kind)) {
    total += mlp_param_count(MlpSpec{in, w, {w}});
    for (int k = 1; k <= 2; ++k)
      total += mlp_param_count(MlpSpec{w, static_cast<int>(ipow(n, k)) * n, {}});
  }
  return total;
}

WidthPlan match_parameters(int64_t budget, VariantKind kind, int n) {
  if (budget < 1) throw ConfigError("parameter budget must be positive");
  const int64_t lo = budget - budget / 10;
  const int64_t hi = budget + budget / 10;
  WidthPlan plan;
  for (int w = 4; w <= 4096; w += 4) {
    const int64_t count = variant_param_count(kind, n, w);
    if (count >= lo && count <= hi && count >= plan.param_count) {
      plan.width = w;
      plan.param_count = count;
    }
    if (count > hi) break;
  }
  if (plan.width == 0)
    throw ConfigError("parameter budget " + std::to_string(budget) + " infeasible for " +
                      variant_name(kind) + " at n=" + std::to_string(n));
  plan.per_net["v_main"] = plan.width;
  if (has_gauge(kind)) {
    plan.per_net["v_aux"] = plan.width;
    plan.per_net["alpha"] = plan.width;
    plan.per_net["gauge"] = plan.width;
    if (has_tensor_vf(kind)) plan.per_net["t_hat"] = plan.width;
  }
  return plan;
}

namespace {

/// Contract the k leading spatial indices of a batched coefficient block
/// (batch x n^k * rep) against k copies of the direction rows.
Var contract_spatial(Var coeffs, Var dir, int k, int n, int rep) {
  Var cur = coeffs;
  for (int i = 0; i < k; ++i) {
    const int rest = static_cast<int>(ipow(n, k - 1 - i)) * rep;
    cur = contract_lead(cur, dir, n, rest);
  }
  return cur;
}

}  // namespace

VelocityParts build_velocity_parts(Graph& g, const TgfmModel& model, const Binding& binding,
                                   Var x, Var t_col, bool check_finite) {
  const int n = model.dim_n;
  if (x.cols() != n) throw ShapeError("velocity input width mismatch");
  if (t_col.cols() != 1 || t_col.rows() != x.rows())
    throw ShapeError("time column shape mismatch");

  VelocityParts p;
  p.input = concat_cols(x, t_col);
  p.v_main = apply_mlp(g, model.v_main, binding, p.input);
  if (check_finite) require_finite(p.v_main, "v_main");
  if (!has_gauge(model.kind)) {
    p.veff = p.v_main;
    return p;
  }

  p.v_aux = apply_mlp(g, model.v_aux, binding, p.input);
  if (check_finite) require_finite(p.v_aux, "v_aux");

  // Unit direction field from the auxiliary velocity; exactly zero when the
  // auxiliary norm falls below the floor.
  Var aux_norm = sqrt_v(sum_cols(square(p.v_aux)));
  Var mask = step_ge(aux_norm, kDirectionFloor);
  Var denom = max_with(aux_norm, kDirectionFloor);
  p.direction = mul(p.v_aux, broadcast_cols(div(mask, denom), n));

  if (has_tensor_vf(model.kind)) {
    Var trunk = apply_mlp(g, model.t_hat_trunk, binding, p.input);
    Var acc;
    for (size_t i = 0; i < model.t_hat_heads.size(); ++i) {
      const int k = static_cast<int>(i) + 1;
      Var coeffs = apply_mlp(g, model.t_hat_heads[i], binding, trunk);
      Var term = contract_spatial(coeffs, p.v_aux, k, n, n);
      acc = acc.valid() ? add(acc, term) : term;
    }
    p.t_hat = acc;
    if (check_finite) require_finite(p.t_hat, "t_hat");
  } else {
    p.t_hat = p.v_aux;
  }

  Var trunk = apply_mlp(g, model.gauge_trunk, binding, p.input);
  Var basis_flat = constant(g, model.basis_flat);
  const std::vector<int> ranks = gauge_ranks(model.kind);
  Var corr;
  for (size_t i = 0; i < ranks.size(); ++i) {
    const int k = ranks[i];
    Var coeffs = apply_mlp(g, model.gauge_heads[i], binding, trunk);
    if (check_finite)
      require_finite(coeffs, ("gauge.head" + std::to_string(k)).c_str());
    Var s = contract_spatial(coeffs, p.direction, k, n, model.basis.count());
    if (k == 1) p.rank1_coeffs = s;
    // (sum_a s_a L_a) t_hat, batched through the flattened basis.
    Var term = contract_trail(matmul(s, basis_flat), p.t_hat, n, n);
    corr = corr.valid() ? add(corr, term) : term;
  }

  p.alpha = apply_mlp(g, model.alpha_net, binding, p.input);
  if (check_finite) require_finite(p.alpha, "alpha");
  p.correction = mul(broadcast_cols(p.alpha, n), corr);
  p.veff = sub(p.v_main, p.correction);
  if (check_finite) require_finite(p.veff, "effective velocity");
  return p;
}

namespace {

VelocityParts single_sample_parts(Graph& g, const TgfmModel& model,
                                  std::span<const double> x, double t) {
  if (static_cast<int>(x.size()) != model.dim_n)
    throw ShapeError("state length does not match model dimension");
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("non-finite state");
  if (!std::isfinite(t)) throw NumericError("non-finite time");
  Binding binding = bind_params(g, model.params);
  Var xv = constant(g, Tensor::row(x));
  Var tv = scalar_const(g, t);
  return build_velocity_parts(g, model, binding, xv, tv);
}

}  // namespace

std::vector<double> t_hat(const TgfmModel& model, std::span<const double> x, double t) {
  if (!has_gauge(model.kind))
    throw ConfigError("t_hat is undefined for the plain flow model");
  Graph g;
  return single_sample_parts(g, model, x, t).t_hat.value().row_vector(0);
}

std::vector<double> gauge_correction(const TgfmModel& model, std::span<const double> x,
                                     double t) {
  if (!has_gauge(model.kind))
    throw ConfigError("gauge_correction is undefined for the plain flow model");
  Graph g;
  return single_sample_parts(g, model, x, t).correction.value().row_vector(0);
}

std::vector<double> effective_velocity(const TgfmModel& model, std::span<const double> x,
                                       double t) {
  Graph g;
  return single_sample_parts(g, model, x, t).veff.value().row_vector(0);
}

Tensor gauge_matrix(const TgfmModel& model, std::span<const double> x, double t) {
  if (!has_gauge(model.kind))
    throw ConfigError("gauge_matrix is undefined for the plain flow model");
  Graph g;
  std::vector<double> coeffs =
      single_sample_parts(g, model, x, t).rank1_coeffs.value().row_vector(0);
  const int n = model.dim_n;
  Tensor out(n, n);
  for (int a = 0; a < model.basis.count(); ++a) {
    const Tensor& gen = model.basis.generators[a];
    for (size_t i = 0; i < gen.size(); ++i)
      if (gen.data[i] != 0.0) out.data[i] += coeffs[a] * gen.data[i];
  }
  return out;
}

}  // namespace tgflow
