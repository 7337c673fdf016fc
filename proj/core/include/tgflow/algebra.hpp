#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "tgflow/tensor.hpp"

namespace tgflow {

/// dim so(n) = n(n-1)/2.
int so_dimension(int n);

/// Canonical basis of so(n): one generator per index pair (i, j) with i < j,
/// ordered lexicographically, with entry +1 at (i, j) and -1 at (j, i).
struct SkewBasis {
  int dim_n = 0;
  std::vector<Tensor> generators;

  int count() const { return static_cast<int>(generators.size()); }
};

SkewBasis so_basis(int n);

/// Generators stacked as rows: count x n*n, row a = generator a flattened
/// row-major. Convenient for batched contractions.
Tensor flatten_basis(const SkewBasis& basis);

/// (sum_a coeffs_a L_a) v, accumulated generator by generator.
std::vector<double> lie_action(std::span<const double> coeffs, const SkewBasis& basis,
                               std::span<const double> v);

/// Dense rank-k coefficient tensor T[mu_1..mu_k, a]: k spatial indices over
/// dim_n plus one trailing algebra/representation index, spatial-major with
/// the algebra index fastest.
struct CoeffTensor {
  int rank = 0;
  int dim_n = 0;
  int algebra_dim = 0;
  std::vector<double> values;

  CoeffTensor(int rank, int dim_n, int algebra_dim);
  size_t expected_size() const;
  double& at(std::span<const int> mu, int a);
  double at(std::span<const int> mu, int a) const;
};

/// result_a = sum over mu_1..mu_k of T[mu, a] * dirs[0][mu_1] ... dirs[k-1][mu_k].
std::vector<double> tensor_contract(const CoeffTensor& t,
                                    std::span<const std::vector<double>> dirs);

/// Graded vector: degree -> coefficient array; only nonzero degrees listed.
struct GradedVector {
  std::map<int, std::vector<double>> components;

  bool zero() const;
};

/// acc += c * x; degree-wise, sizes must agree where degrees overlap.
void graded_accumulate(GradedVector& acc, double c, const GradedVector& x);

/// Drop components that are exactly zero.
GradedVector graded_normalized(GradedVector v);

/// Multilinear bracket b_m: callback taking its m arguments.
using BracketFn = std::function<GradedVector(std::span<const GradedVector>)>;

/// Finite collection of brackets b_m, m = 2..max_arity, supplied by the
/// caller as evaluation callbacks together with the basis {e_a}.
struct LInftyBrackets {
  int max_arity = 2;
  std::map<int, BracketFn> brackets;
};

/// sum over m of sum_a coeffs_a * b_m(e_a, t_hat, ..., t_hat) with m-1 copies
/// of t_hat; accumulation order is m outer, a inner.
GradedVector linfty_action(std::span<const double> coeffs, const LInftyBrackets& br,
                           std::span<const GradedVector> basis_vectors,
                           const GradedVector& t_hat);

}  // namespace tgflow
