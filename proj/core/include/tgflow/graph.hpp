#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgflow/tensor.hpp"

namespace tgflow {

class Graph;

/// Handle to one node of a Graph; invalid by default, cheap to copy.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Tensor& value() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
  double scalar_value() const;
};

/// Eagerly evaluated computation graph for reverse-mode differentiation.
///
/// backward() emits its vector-Jacobian products as ordinary graph nodes, so
/// a gradient is itself differentiable. The consistency regularizer relies on
/// this: input gradients of the gauge coefficients appear inside the training
/// loss and are differentiated once more with respect to the parameters.
class Graph {
 public:
  enum class Op : uint8_t {
    kConst,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kAffine,           // c0 * a + c1
    kMatmul,           // transpose flags in i0, i1
    kAddRow,           // matrix + broadcast row vector
    kSigmoid,
    kSqrt,
    kAbs,
    kSign,
    kMaxWith,          // max(a, c0)
    kStepGe,           // 1 where a >= c0 else 0
    kSumAll,
    kSumRows,          // m x n -> 1 x n
    kSumCols,          // m x n -> m x 1
    kBroadcastScalar,  // 1 x 1 -> i0 x i1
    kBroadcastRows,    // 1 x n -> i0 x n
    kBroadcastCols,    // m x 1 -> m x i0
    kConcatCols,
    kSliceCols,        // columns [i0, i0 + i1)
    kPadCols,          // embed into i1 columns at offset i0
    kContractLead,     // A: r x (L*R), B: r x L -> r x R over the leading index
    kContractTrail,    // A: r x (L*R), B: r x R -> r x L over the trailing index
    kExpandOuter,      // P: r x R, Q: r x L -> r x (L*R), out = Q (x) P rowwise
  };

  struct Node {
    Op op = Op::kConst;
    int a = -1;
    int b = -1;
    int i0 = 0;
    int i1 = 0;
    double c0 = 0.0;
    double c1 = 0.0;
    Tensor val;
  };

  int add_node(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }
  const Node& node(int id) const { return nodes_[id]; }
  const Tensor& value(int id) const { return nodes_[id].val; }
  int size() const { return static_cast<int>(nodes_.size()); }
  void reserve(size_t n) { nodes_.reserve(n); }

 private:
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return graph->value(id); }

Var constant(Graph& g, Tensor value);
Var scalar_const(Graph& g, double value);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var affine(Var a, double scale, double shift);
Var neg(Var a);
Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
Var add_rowvec(Var m, Var row);
Var sigmoid(Var a);
Var silu(Var a);
Var square(Var a);
Var sqrt_v(Var a);
Var abs_v(Var a);
Var sign_v(Var a);
Var max_with(Var a, double floor_value);
Var step_ge(Var a, double threshold);
Var sum_all(Var a);
Var sum_rows(Var a);
Var sum_cols(Var a);
Var mean_all(Var a);
Var broadcast_scalar(Var a, int rows, int cols);
Var broadcast_rows(Var row, int rows);
Var broadcast_cols(Var col, int cols);
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, int start, int count);
Var pad_cols(Var a, int start, int total);
Var contract_lead(Var a, Var b, int lead, int rest);
Var contract_trail(Var a, Var b, int lead, int rest);
Var expand_outer(Var trail, Var lead, int lead_dim, int rest_dim);

/// Adjoints of `loss` (a 1x1 node) with respect to `wrt`, emitted as new
/// nodes. A handle whose node does not influence the loss gets an explicit
/// zero constant of matching shape.
std::vector<Var> backward(Var loss, std::span<const Var> wrt);

}  // namespace tgflow
