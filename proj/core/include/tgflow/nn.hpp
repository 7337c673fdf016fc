#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tgflow/graph.hpp"
#include "tgflow/rng.hpp"
#include "tgflow/tensor.hpp"

namespace tgflow {

struct ParamEntry {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // first Adam moment
  Tensor v;  // second Adam moment
};

/// Ordered, named collection of trainable arrays with gradient slots and
/// optimizer moments. Iteration order is creation order and deterministic.
class ParamStore {
 public:
  int add(const std::string& name, Tensor init);
  int find(const std::string& name) const;  // -1 when absent
  ParamEntry& entry(int id) { return entries_[id]; }
  const ParamEntry& entry(int id) const { return entries_[id]; }
  int count() const { return static_cast<int>(entries_.size()); }
  int64_t total_params() const;
  void zero_grad();
  int64_t step() const { return step_; }
  void set_step(int64_t s) { step_ = s; }

 private:
  std::vector<ParamEntry> entries_;
  std::unordered_map<std::string, int> index_;
  int64_t step_ = 0;
};

/// Leaf nodes for every store entry in one graph, aligned with entry ids.
struct Binding {
  const ParamStore* store = nullptr;
  std::vector<Var> leaves;
};

Binding bind_params(Graph& g, const ParamStore& store);

/// Reverse-mode gradients of `loss` accumulated into the store's grad slots.
/// Parameters the loss does not depend on receive zero contributions.
void grad_params(Var loss, const Binding& binding, ParamStore& store);

struct AdamwConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;
};

/// Decoupled-weight-decay Adam with bias correction; increments the store's
/// step counter. Throws NumericError naming the entry on a non-finite gradient.
void adamw_step(ParamStore& store, const AdamwConfig& cfg);

/// Scales all gradients by max_norm/g when their joint 2-norm g exceeds
/// max_norm; returns the factor applied (1.0 when untouched).
double clip_global_norm(ParamStore& store, double max_norm);

struct MlpSpec {
  int in = 0;
  int out = 0;
  std::vector<int> hidden;
  bool silu_output = false;  // trunks keep the nonlinearity on their output
};

int64_t mlp_param_count(const MlpSpec& spec);

/// Fully-connected network with SiLU on hidden layers and a linear output
/// (unless silu_output). Weights live in a ParamStore; this struct only
/// holds entry ids.
struct Mlp {
  MlpSpec spec;
  std::vector<int> weights;
  std::vector<int> biases;
};

/// Creates parameters named <prefix>.w<l>/<prefix>.b<l>; weights uniform in
/// +-sqrt(6/(fan_in+fan_out)), biases zero.
Mlp add_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& init);

Var apply_mlp(Graph& g, const Mlp& net, const Binding& binding, Var input);

/// Single-sample forward pass on input [x, t].
std::vector<double> mlp_forward(const Mlp& net, const ParamStore& store,
                                std::span<const double> x, double t);

/// Builds f on constant leaves for x (1 x n) and t (1 x 1) and returns the
/// exact reverse-mode input gradients (d/dx, d/dt) of the scalar output.
std::pair<std::vector<double>, double> grad_input(
    const std::function<Var(Graph&, Var x, Var t)>& f, std::span<const double> x, double t);

}  // namespace tgflow
