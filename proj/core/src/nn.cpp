#include "tgflow/nn.hpp"

#include <cmath>

#include "tgflow/errors.hpp"

namespace tgflow {

int ParamStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  ParamEntry e;
  e.name = name;
  e.grad = Tensor(init.rows, init.cols);
  e.m = Tensor(init.rows, init.cols);
  e.v = Tensor(init.rows, init.cols);
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  const int id = static_cast<int>(entries_.size()) - 1;
  index_[name] = id;
  return id;
}

int ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int64_t ParamStore::total_params() const {
  int64_t n = 0;
  for (const auto& e : entries_) n += static_cast<int64_t>(e.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

Binding bind_params(Graph& g, const ParamStore& store) {
  Binding b;
  b.store = &store;
  b.leaves.reserve(store.count());
  for (int i = 0; i < store.count(); ++i) b.leaves.push_back(constant(g, store.entry(i).value));
  return b;
}

void grad_params(Var loss, const Binding& binding, ParamStore& store) {
  if (binding.store != &store) throw ConfigError("grad_params: binding belongs to another store");
  std::vector<Var> grads = backward(loss, binding.leaves);
  for (int i = 0; i < store.count(); ++i) {
    ParamEntry& e = store.entry(i);
    const Tensor& gv = grads[i].value();
    if (!gv.same_shape(e.grad)) throw ShapeError("gradient shape mismatch for " + e.name);
    for (size_t k = 0; k < gv.size(); ++k) e.grad.data[k] += gv.data[k];
  }
}

void adamw_step(ParamStore& store, const AdamwConfig& cfg) {
  store.set_step(store.step() + 1);
  const double t = static_cast<double>(store.step());
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (int i = 0; i < store.count(); ++i) {
    ParamEntry& e = store.entry(i);
    for (size_t k = 0; k < e.value.size(); ++k) {
      const double g = e.grad.data[k];
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + e.name);
      e.m.data[k] = cfg.beta1 * e.m.data[k] + (1.0 - cfg.beta1) * g;
      e.v.data[k] = cfg.beta2 * e.v.data[k] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = e.m.data[k] / bc1;
      const double v_hat = e.v.data[k] / bc2;
      e.value.data[k] = e.value.data[k] * (1.0 - cfg.lr * cfg.weight_decay) -
                        cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

double clip_global_norm(ParamStore& store, double max_norm) {
  double sq = 0.0;
  for (int i = 0; i < store.count(); ++i)
    for (double g : store.entry(i).grad.data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return 1.0;
  const double factor = max_norm / norm;
  for (int i = 0; i < store.count(); ++i)
    for (double& g : store.entry(i).grad.data) g *= factor;
  return factor;
}

int64_t mlp_param_count(const MlpSpec& spec) {
  int64_t total = 0;
  int prev = spec.in;
  for (int h : spec.hidden) {
    total += static_cast<int64_t>(prev) * h + h;
    prev = h;
  }
  total += static_cast<int64_t>(prev) * spec.out + spec.out;
  return total;
}

Mlp add_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& init) {
  if (spec.in < 1 || spec.out < 0) throw ConfigError("mlp spec dimensions invalid: " + prefix);
  Mlp net;
  net.spec = spec;
  std::vector<int> sizes;
  sizes.push_back(spec.in);
  for (int h : spec.hidden) sizes.push_back(h);
  sizes.push_back(spec.out);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    Tensor w(fan_in, fan_out);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : w.data) x = (2.0 * init.uniform() - 1.0) * bound;
    const std::string tag = std::to_string(l);
    net.weights.push_back(store.add(prefix + ".w" + tag, std::move(w)));
    net.biases.push_back(store.add(prefix + ".b" + tag, Tensor(1, fan_out)));
  }
  return net;
}

Var apply_mlp(Graph& g, const Mlp& net, const Binding& binding, Var input) {
  if (input.cols() != net.spec.in) throw ShapeError("mlp input width mismatch");
  Var h = input;
  const size_t layers = net.weights.size();
  for (size_t l = 0; l < layers; ++l) {
    h = add_rowvec(matmul(h, binding.leaves[net.weights[l]]), binding.leaves[net.biases[l]]);
    const bool last = l + 1 == layers;
    if (!last || net.spec.silu_output) h = silu(h);
  }
  return h;
}

std::vector<double> mlp_forward(const Mlp& net, const ParamStore& store,
                                std::span<const double> x, double t) {
  if (static_cast<int>(x.size()) != net.spec.in - 1)
    throw ShapeError("mlp_forward: state length must be declared input minus one");
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("mlp_forward: non-finite input");
  if (!std::isfinite(t)) throw NumericError("mlp_forward: non-finite time");

  Graph g;
  Binding binding = bind_params(g, store);
  Tensor in(1, net.spec.in);
  for (size_t i = 0; i < x.size(); ++i) in.at(0, static_cast<int>(i)) = x[i];
  in.at(0, net.spec.in - 1) = t;
  Var out = apply_mlp(g, net, binding, constant(g, std::move(in)));
  return out.value().row_vector(0);
}

std::pair<std::vector<double>, double> grad_input(
    const std::function<Var(Graph&, Var x, Var t)>& f, std::span<const double> x, double t) {
  Graph g;
  Var xv = constant(g, Tensor::row(x));
  Var tv = scalar_const(g, t);
  Var y = f(g, xv, tv);
  if (y.rows() != 1 || y.cols() != 1) throw ShapeError("grad_input expects a scalar function");
  const Var wrt[] = {xv, tv};
  std::vector<Var> grads = backward(y, wrt);
  return {grads[0].value().row_vector(0), grads[1].value().data[0]};
}

}  // namespace tgflow
