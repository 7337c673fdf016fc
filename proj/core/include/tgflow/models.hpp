#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgflow/algebra.hpp"
#include "tgflow/graph.hpp"
#include "tgflow/nn.hpp"

namespace tgflow {

/// The five model families, order fixed.
enum class VariantKind {
  kPlainVf,
  kGaugeFlow,
  kTensorVfPlainGauge,
  kPlainVfTensorGauge,
  kTensorVfTensorGauge,
};

inline constexpr std::array<VariantKind, 5> kAllVariants = {
    VariantKind::kPlainVf,          VariantKind::kGaugeFlow,
    VariantKind::kTensorVfPlainGauge, VariantKind::kPlainVfTensorGauge,
    VariantKind::kTensorVfTensorGauge,
};

const char* variant_name(VariantKind kind);
std::optional<VariantKind> variant_from(std::string_view name);

bool has_gauge(VariantKind kind);
bool has_tensor_vf(VariantKind kind);
/// Active spatial ranks of the gauge field: {} for the plain flow,
/// {1} for plain gauge fields, {1,2,3} for tensor gauge fields.
std::vector<int> gauge_ranks(VariantKind kind);

/// Flow model on R^n whose velocity is the main field minus a weighted
/// so(n) gauge correction. Sub-networks are MLPs over (x, t); the gauge and
/// tensor-field coefficient heads are linear layers on a shared SiLU trunk.
struct TgfmModel {
  VariantKind kind = VariantKind::kPlainVf;
  int dim_n = 0;
  int width = 0;
  uint64_t init_seed = 0;
  SkewBasis basis;
  Tensor basis_flat;  // so_dim x n*n
  ParamStore params;
  Mlp v_main;
  Mlp v_aux;
  Mlp alpha_net;
  Mlp gauge_trunk;
  std::vector<Mlp> gauge_heads;  // aligned with gauge_ranks(kind)
  Mlp t_hat_trunk;
  std::vector<Mlp> t_hat_heads;  // ranks 1 and 2, tensor-VF variants only
};

/// All sub-networks use two hidden layers of the given width.
TgfmModel build_model(VariantKind kind, int n, int width, uint64_t init_seed);

int64_t variant_param_count(VariantKind kind, int n, int width);

struct WidthPlan {
  int width = 0;
  int64_t param_count = 0;
  std::map<std::string, int> per_net;
};

/// Largest width (scanned in increments of 4) whose total parameter count
/// lands within 10% of the budget. Throws ConfigError when no width does.
WidthPlan match_parameters(int64_t budget, VariantKind kind, int n);

/// Intermediate nodes of one batched velocity evaluation.
struct VelocityParts {
  Var input;         // batch x (n+1)
  Var v_main;        // batch x n
  Var v_aux;         // invalid for the plain flow
  Var direction;     // unit v_aux, zero below norm 1e-8
  Var t_hat;         // batch x n
  Var alpha;         // batch x 1
  Var rank1_coeffs;  // batch x so_dim, gauge coefficients after direction contraction
  Var correction;    // batch x n, alpha already applied
  Var veff;          // batch x n
};

VelocityParts build_velocity_parts(Graph& g, const TgfmModel& model, const Binding& binding,
                                   Var x, Var t_col, bool check_finite = true);

/// Single-sample operation surfaces.
std::vector<double> t_hat(const TgfmModel& model, std::span<const double> x, double t);
std::vector<double> gauge_correction(const TgfmModel& model, std::span<const double> x, double t);
std::vector<double> effective_velocity(const TgfmModel& model, std::span<const double> x,
                                       double t);
Tensor gauge_matrix(const TgfmModel& model, std::span<const double> x, double t);

}  // namespace tgflow
