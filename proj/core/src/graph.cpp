#include "tgflow/graph.hpp"

#include <cmath>
#include <utility>

#include "tgflow/errors.hpp"

namespace tgflow {

namespace {

using Op = Graph::Op;
using Node = Graph::Node;

Graph& graph_of(Var a) {
  if (!a.valid()) throw ShapeError("operation on invalid graph handle");
  return *a.graph;
}

Graph& same_graph(Var a, Var b) {
  Graph& g = graph_of(a);
  if (!b.valid() || b.graph != &g) throw ShapeError("operands belong to different graphs");
  return g;
}

Var make(Graph& g, Node n) { return Var{&g, g.add_node(std::move(n))}; }

double sigmoid_stable(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double Var::scalar_value() const {
  const Tensor& t = value();
  if (t.rows != 1 || t.cols != 1) throw ShapeError("scalar_value on non-scalar node");
  return t.data[0];
}

Var constant(Graph& g, Tensor value) {
  Node n{Op::kConst};
  n.val = std::move(value);
  return make(g, std::move(n));
}

Var scalar_const(Graph& g, double value) { return constant(g, Tensor::scalar(value)); }

static Var elementwise2(Op op, Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) throw ShapeError("elementwise operands differ in shape");
  Node n{op, a.id, b.id};
  n.val = Tensor(av.rows, av.cols);
  switch (op) {
    case Op::kAdd:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = av.data[i] + bv.data[i];
      break;
    case Op::kSub:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = av.data[i] - bv.data[i];
      break;
    case Op::kMul:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = av.data[i] * bv.data[i];
      break;
    case Op::kDiv:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = av.data[i] / bv.data[i];
      break;
    default:
      throw ShapeError("not an elementwise op");
  }
  return make(g, std::move(n));
}

Var add(Var a, Var b) { return elementwise2(Op::kAdd, a, b); }
Var sub(Var a, Var b) { return elementwise2(Op::kSub, a, b); }
Var mul(Var a, Var b) { return elementwise2(Op::kMul, a, b); }
Var div(Var a, Var b) { return elementwise2(Op::kDiv, a, b); }

Var affine(Var a, double scale, double shift) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  Node n{Op::kAffine, a.id};
  n.c0 = scale;
  n.c1 = shift;
  n.val = Tensor(av.rows, av.cols);
  for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = scale * av.data[i] + shift;
  return make(g, std::move(n));
}

Var neg(Var a) { return affine(a, -1.0, 0.0); }

Var matmul(Var a, Var b, bool trans_a, bool trans_b) {
  Graph& g = same_graph(a, b);
  Node n{Op::kMatmul, a.id, b.id};
  n.i0 = trans_a ? 1 : 0;
  n.i1 = trans_b ? 1 : 0;
  n.val = matmul_plain(a.value(), b.value(), trans_a, trans_b);
  return make(g, std::move(n));
}

Var add_rowvec(Var m, Var row) {
  Graph& g = same_graph(m, row);
  const Tensor& mv = m.value();
  const Tensor& rv = row.value();
  if (rv.rows != 1 || rv.cols != mv.cols) throw ShapeError("add_rowvec: row shape mismatch");
  Node n{Op::kAddRow, m.id, row.id};
  n.val = Tensor(mv.rows, mv.cols);
  for (int i = 0; i < mv.rows; ++i)
    for (int j = 0; j < mv.cols; ++j) n.val.at(i, j) = mv.at(i, j) + rv.at(0, j);
  return make(g, std::move(n));
}

static Var elementwise1(Op op, Var a, double c0 = 0.0) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  Node n{op, a.id};
  n.c0 = c0;
  n.val = Tensor(av.rows, av.cols);
  switch (op) {
    case Op::kSigmoid:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = sigmoid_stable(av.data[i]);
      break;
    case Op::kSqrt:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = std::sqrt(av.data[i]);
      break;
    case Op::kAbs:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = std::fabs(av.data[i]);
      break;
    case Op::kSign:
      for (size_t i = 0; i < av.size(); ++i)
        n.val.data[i] = av.data[i] > 0.0 ? 1.0 : (av.data[i] < 0.0 ? -1.0 : 0.0);
      break;
    case Op::kMaxWith:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = std::fmax(av.data[i], c0);
      break;
    case Op::kStepGe:
      for (size_t i = 0; i < av.size(); ++i) n.val.data[i] = av.data[i] >= c0 ? 1.0 : 0.0;
      break;
    default:
      throw ShapeError("not a unary op");
  }
  return make(g, std::move(n));
}

Var sigmoid(Var a) { return elementwise1(Op::kSigmoid, a); }
Var silu(Var a) { return mul(a, sigmoid(a)); }
Var square(Var a) { return mul(a, a); }
Var sqrt_v(Var a) { return elementwise1(Op::kSqrt, a); }
Var abs_v(Var a) { return elementwise1(Op::kAbs, a); }
Var sign_v(Var a) { return elementwise1(Op::kSign, a); }
Var max_with(Var a, double floor_value) { return elementwise1(Op::kMaxWith, a, floor_value); }
Var step_ge(Var a, double threshold) { return elementwise1(Op::kStepGe, a, threshold); }

Var sum_all(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  Node n{Op::kSumAll, a.id};
  double acc = 0.0;
  for (double x : av.data) acc += x;
  n.val = Tensor::scalar(acc);
  return make(g, std::move(n));
}

Var sum_rows(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  Node n{Op::kSumRows, a.id};
  n.val = Tensor(1, av.cols);
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) n.val.at(0, j) += av.at(i, j);
  return make(g, std::move(n));
}

Var sum_cols(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  Node n{Op::kSumCols, a.id};
  n.val = Tensor(av.rows, 1);
  for (int i = 0; i < av.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < av.cols; ++j) acc += av.at(i, j);
    n.val.at(i, 0) = acc;
  }
  return make(g, std::move(n));
}

Var mean_all(Var a) {
  const Tensor& av = a.value();
  if (av.size() == 0) throw ShapeError("mean_all of empty tensor");
  return affine(sum_all(a), 1.0 / static_cast<double>(av.size()), 0.0);
}

Var broadcast_scalar(Var a, int rows, int cols) {
  Graph& g = graph_of(a);
  if (a.rows() != 1 || a.cols() != 1) throw ShapeError("broadcast_scalar expects a 1x1 node");
  Node n{Op::kBroadcastScalar, a.id};
  n.i0 = rows;
  n.i1 = cols;
  n.val = Tensor::full(rows, cols, a.value().data[0]);
  return make(g, std::move(n));
}

Var broadcast_rows(Var row, int rows) {
  Graph& g = graph_of(row);
  const Tensor& rv = row.value();
  if (rv.rows != 1) throw ShapeError("broadcast_rows expects a row vector");
  Node n{Op::kBroadcastRows, row.id};
  n.i0 = rows;
  n.val = Tensor(rows, rv.cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < rv.cols; ++j) n.val.at(i, j) = rv.at(0, j);
  return make(g, std::move(n));
}

Var broadcast_cols(Var col, int cols) {
  Graph& g = graph_of(col);
  const Tensor& cv = col.value();
  if (cv.cols != 1) throw ShapeError("broadcast_cols expects a column vector");
  Node n{Op::kBroadcastCols, col.id};
  n.i0 = cols;
  n.val = Tensor(cv.rows, cols);
  for (int i = 0; i < cv.rows; ++i)
    for (int j = 0; j < cols; ++j) n.val.at(i, j) = cv.at(i, 0);
  return make(g, std::move(n));
}

Var concat_cols(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows != bv.rows) throw ShapeError("concat_cols: row count mismatch");
  Node n{Op::kConcatCols, a.id, b.id};
  n.val = Tensor(av.rows, av.cols + bv.cols);
  for (int i = 0; i < av.rows; ++i) {
    for (int j = 0; j < av.cols; ++j) n.val.at(i, j) = av.at(i, j);
    for (int j = 0; j < bv.cols; ++j) n.val.at(i, av.cols + j) = bv.at(i, j);
  }
  return make(g, std::move(n));
}

Var slice_cols(Var a, int start, int count) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  if (start < 0 || count < 0 || start + count > av.cols)
    throw ShapeError("slice_cols out of range");
  Node n{Op::kSliceCols, a.id};
  n.i0 = start;
  n.i1 = count;
  n.val = Tensor(av.rows, count);
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < count; ++j) n.val.at(i, j) = av.at(i, start + j);
  return make(g, std::move(n));
}

Var pad_cols(Var a, int start, int total) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  if (start < 0 || start + av.cols > total) throw ShapeError("pad_cols out of range");
  Node n{Op::kPadCols, a.id};
  n.i0 = start;
  n.i1 = total;
  n.val = Tensor(av.rows, total);
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) n.val.at(i, start + j) = av.at(i, j);
  return make(g, std::move(n));
}

Var contract_lead(Var a, Var b, int lead, int rest) {
  Graph& g = same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols != lead * rest || bv.rows != av.rows || bv.cols != lead)
    throw ShapeError("contract_lead shape mismatch");
  Node n{Op::kContractLead, a.id, b.id};
  n.i0 = lead;
  n.i1 = rest;
  n.val = Tensor(av.rows, rest);
  for (int r = 0; r < av.rows; ++r) {
    const double* arow = &av.data[static_cast<size_t>(r) * av.cols];
    const double* brow = &bv.data[static_cast<size_t>(r) * lead];
    double* orow = &n.val.data[static_cast<size_t>(r) * rest];
    for (int l = 0; l < lead; ++l) {
      const double w = brow[l];
      const double* block = arow + static_cast<size_t>(l) * rest;
      for (int t = 0; t < rest; ++t) orow[t] += w * block[t];
    }
  }
  return make(g, std::move(n));
}

Var contract_trail(Var a, Var b, int lead, int rest) {
  Graph& g = same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols != lead * rest || bv.rows != av.rows || bv.cols != rest)
    throw ShapeError("contract_trail shape mismatch");
  Node n{Op::kContractTrail, a.id, b.id};
  n.i0 = lead;
  n.i1 = rest;
  n.val = Tensor(av.rows, lead);
  for (int r = 0; r < av.rows; ++r) {
    const double* arow = &av.data[static_cast<size_t>(r) * av.cols];
    const double* brow = &bv.data[static_cast<size_t>(r) * rest];
    double* orow = &n.val.data[static_cast<size_t>(r) * lead];
    for (int l = 0; l < lead; ++l) {
      const double* block = arow + static_cast<size_t>(l) * rest;
      double acc = 0.0;
      for (int t = 0; t < rest; ++t) acc += block[t] * brow[t];
      orow[l] = acc;
    }
  }
  return make(g, std::move(n));
}

Var expand_outer(Var trail, Var lead, int lead_dim, int rest_dim) {
  Graph& g = same_graph(trail, lead);
  const Tensor& pv = trail.value();
  const Tensor& qv = lead.value();
  if (pv.rows != qv.rows || pv.cols != rest_dim || qv.cols != lead_dim)
    throw ShapeError("expand_outer shape mismatch");
  Node n{Op::kExpandOuter, trail.id, lead.id};
  n.i0 = lead_dim;
  n.i1 = rest_dim;
  n.val = Tensor(pv.rows, lead_dim * rest_dim);
  for (int r = 0; r < pv.rows; ++r) {
    const double* prow = &pv.data[static_cast<size_t>(r) * rest_dim];
    const double* qrow = &qv.data[static_cast<size_t>(r) * lead_dim];
    double* orow = &n.val.data[static_cast<size_t>(r) * n.val.cols];
    for (int l = 0; l < lead_dim; ++l) {
      const double w = qrow[l];
      double* block = orow + static_cast<size_t>(l) * rest_dim;
      for (int t = 0; t < rest_dim; ++t) block[t] = w * prow[t];
    }
  }
  return make(g, std::move(n));
}

namespace {

void accumulate(std::vector<Var>& adj, int id, Var contrib) {
  if (id < 0 || static_cast<size_t>(id) >= adj.size()) return;
  adj[id] = adj[id].valid() ? add(adj[id], contrib) : contrib;
}

void propagate(Graph& g, int id, Var gbar, std::vector<Var>& adj) {
  // Copy the node header: creating adjoint nodes below may reallocate the
  // node storage and invalidate references into it.
  Node nd;
  {
    const Node& ref = g.node(id);
    nd.op = ref.op;
    nd.a = ref.a;
    nd.b = ref.b;
    nd.i0 = ref.i0;
    nd.i1 = ref.i1;
    nd.c0 = ref.c0;
    nd.c1 = ref.c1;
  }
  const Var va{&g, nd.a};
  const Var vb{&g, nd.b};
  const Var out{&g, id};
  switch (nd.op) {
    case Op::kConst:
      break;
    case Op::kAdd:
      accumulate(adj, nd.a, gbar);
      accumulate(adj, nd.b, gbar);
      break;
    case Op::kSub:
      accumulate(adj, nd.a, gbar);
      accumulate(adj, nd.b, neg(gbar));
      break;
    case Op::kMul:
      accumulate(adj, nd.a, mul(gbar, vb));
      accumulate(adj, nd.b, mul(gbar, va));
      break;
    case Op::kDiv:
      accumulate(adj, nd.a, div(gbar, vb));
      accumulate(adj, nd.b, neg(div(mul(gbar, out), vb)));
      break;
    case Op::kAffine:
      accumulate(adj, nd.a, affine(gbar, nd.c0, 0.0));
      break;
    case Op::kMatmul: {
      const bool ta = nd.i0 != 0;
      const bool tb = nd.i1 != 0;
      accumulate(adj, nd.a, ta ? matmul(vb, gbar, tb, true) : matmul(gbar, vb, false, !tb));
      accumulate(adj, nd.b, tb ? matmul(gbar, va, true, ta) : matmul(va, gbar, !ta, false));
      break;
    }
    case Op::kAddRow:
      accumulate(adj, nd.a, gbar);
      accumulate(adj, nd.b, sum_rows(gbar));
      break;
    case Op::kSigmoid:
      accumulate(adj, nd.a, mul(gbar, mul(out, affine(out, -1.0, 1.0))));
      break;
    case Op::kSqrt:
      accumulate(adj, nd.a, div(affine(gbar, 0.5, 0.0), out));
      break;
    case Op::kAbs:
      accumulate(adj, nd.a, mul(gbar, sign_v(va)));
      break;
    case Op::kSign:
    case Op::kStepGe:
      break;
    case Op::kMaxWith:
      accumulate(adj, nd.a, mul(gbar, step_ge(va, nd.c0)));
      break;
    case Op::kSumAll: {
      const int r = va.rows();
      const int c = va.cols();
      accumulate(adj, nd.a, broadcast_scalar(gbar, r, c));
      break;
    }
    case Op::kSumRows: {
      const int r = va.rows();
      accumulate(adj, nd.a, broadcast_rows(gbar, r));
      break;
    }
    case Op::kSumCols: {
      const int c = va.cols();
      accumulate(adj, nd.a, broadcast_cols(gbar, c));
      break;
    }
    case Op::kBroadcastScalar:
      accumulate(adj, nd.a, sum_all(gbar));
      break;
    case Op::kBroadcastRows:
      accumulate(adj, nd.a, sum_rows(gbar));
      break;
    case Op::kBroadcastCols:
      accumulate(adj, nd.a, sum_cols(gbar));
      break;
    case Op::kConcatCols: {
      const int ac = va.cols();
      const int bc = vb.cols();
      accumulate(adj, nd.a, slice_cols(gbar, 0, ac));
      accumulate(adj, nd.b, slice_cols(gbar, ac, bc));
      break;
    }
    case Op::kSliceCols: {
      const int ac = va.cols();
      accumulate(adj, nd.a, pad_cols(gbar, nd.i0, ac));
      break;
    }
    case Op::kPadCols: {
      const int ac = va.cols();
      accumulate(adj, nd.a, slice_cols(gbar, nd.i0, ac));
      break;
    }
    case Op::kContractLead:
      accumulate(adj, nd.a, expand_outer(gbar, vb, nd.i0, nd.i1));
      accumulate(adj, nd.b, contract_trail(va, gbar, nd.i0, nd.i1));
      break;
    case Op::kContractTrail:
      accumulate(adj, nd.a, expand_outer(vb, gbar, nd.i0, nd.i1));
      accumulate(adj, nd.b, contract_lead(va, gbar, nd.i0, nd.i1));
      break;
    case Op::kExpandOuter:
      accumulate(adj, nd.a, contract_lead(gbar, vb, nd.i0, nd.i1));
      accumulate(adj, nd.b, contract_trail(gbar, va, nd.i0, nd.i1));
      break;
  }
}

}  // namespace

std::vector<Var> backward(Var loss, std::span<const Var> wrt) {
  Graph& g = graph_of(loss);
  if (loss.rows() != 1 || loss.cols() != 1) throw ShapeError("backward expects a scalar loss");
  const int top = loss.id;
  std::vector<Var> adj(static_cast<size_t>(top) + 1);
  adj[top] = scalar_const(g, 1.0);
  for (int id = top; id >= 0; --id) {
    if (!adj[id].valid()) continue;
    propagate(g, id, adj[id], adj);
  }
  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (!w.valid() || w.graph != &g) throw ShapeError("backward target from a different graph");
    if (w.id <= top && adj[w.id].valid())
      out.push_back(adj[w.id]);
    else
      out.push_back(constant(g, Tensor(w.rows(), w.cols())));
  }
  return out;
}

}  // namespace tgflow
