#include "tgflow/algebra.hpp"

#include <cmath>
#include <string>

#include "tgflow/errors.hpp"

namespace tgflow {

int so_dimension(int n) { return n * (n - 1) / 2; }

SkewBasis so_basis(int n) {
  if (n < 1) throw ShapeError("so_basis requires n >= 1");
  SkewBasis basis;
  basis.dim_n = n;
  basis.generators.reserve(so_dimension(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Tensor g(n, n);
      g.at(i, j) = 1.0;
      g.at(j, i) = -1.0;
      basis.generators.push_back(std::move(g));
    }
  }
  return basis;
}

Tensor flatten_basis(const SkewBasis& basis) {
  const int n = basis.dim_n;
  Tensor flat(basis.count(), n * n);
  for (int a = 0; a < basis.count(); ++a)
    for (int i = 0; i < n * n; ++i) flat.at(a, i) = basis.generators[a].data[i];
  return flat;
}

std::vector<double> lie_action(std::span<const double> coeffs, const SkewBasis& basis,
                               std::span<const double> v) {
  if (static_cast<int>(coeffs.size()) != basis.count())
    throw ShapeError("lie_action: coefficient count does not match basis");
  if (static_cast<int>(v.size()) != basis.dim_n)
    throw ShapeError("lie_action: vector length does not match basis dimension");
  const int n = basis.dim_n;
  std::vector<double> out(n, 0.0);
  for (int a = 0; a < basis.count(); ++a) {
    const Tensor& g = basis.generators[a];
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += g.at(i, j) * v[j];
      out[i] += coeffs[a] * dot;
    }
  }
  return out;
}

CoeffTensor::CoeffTensor(int rank_, int dim_n_, int algebra_dim_)
    : rank(rank_), dim_n(dim_n_), algebra_dim(algebra_dim_) {
  if (rank < 1 || rank > 3) throw ShapeError("coefficient tensor rank must be in {1,2,3}");
  if (dim_n < 1 || algebra_dim < 0) throw ShapeError("coefficient tensor dimensions invalid");
  values.assign(expected_size(), 0.0);
}

size_t CoeffTensor::expected_size() const {
  size_t s = static_cast<size_t>(algebra_dim);
  for (int i = 0; i < rank; ++i) s *= static_cast<size_t>(dim_n);
  return s;
}

static size_t flat_spatial(std::span<const int> mu, int dim_n, int rank) {
  if (static_cast<int>(mu.size()) != rank) throw ShapeError("coefficient tensor index arity mismatch");
  size_t f = 0;
  for (int i = 0; i < rank; ++i) {
    if (mu[i] < 0 || mu[i] >= dim_n) throw ShapeError("coefficient tensor index out of range");
    f = f * dim_n + mu[i];
  }
  return f;
}

double& CoeffTensor::at(std::span<const int> mu, int a) {
  return values[flat_spatial(mu, dim_n, rank) * algebra_dim + a];
}

double CoeffTensor::at(std::span<const int> mu, int a) const {
  return values[flat_spatial(mu, dim_n, rank) * algebra_dim + a];
}

std::vector<double> tensor_contract(const CoeffTensor& t,
                                    std::span<const std::vector<double>> dirs) {
  if (static_cast<int>(dirs.size()) != t.rank)
    throw ShapeError("tensor_contract: direction count does not match tensor rank");
  for (const auto& d : dirs)
    if (static_cast<int>(d.size()) != t.dim_n)
      throw ShapeError("tensor_contract: direction length does not match tensor dimension");
  if (t.values.size() != t.expected_size())
    throw ShapeError("tensor_contract: tensor payload size mismatch");

  const int n = t.dim_n;
  size_t spatial = 1;
  for (int i = 0; i < t.rank; ++i) spatial *= static_cast<size_t>(n);

  std::vector<double> out(t.algebra_dim, 0.0);
  std::vector<int> mu(t.rank, 0);
  for (size_t flat = 0; flat < spatial; ++flat) {
    size_t rem = flat;
    double prod = 1.0;
    for (int i = t.rank - 1; i >= 0; --i) {
      mu[i] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int i = 0; i < t.rank; ++i) prod *= dirs[i][mu[i]];
    const double* row = &t.values[flat * t.algebra_dim];
    for (int a = 0; a < t.algebra_dim; ++a) out[a] += row[a] * prod;
  }
  return out;
}

bool GradedVector::zero() const {
  for (const auto& [deg, comp] : components)
    for (double x : comp)
      if (x != 0.0) return false;
  return true;
}

void graded_accumulate(GradedVector& acc, double c, const GradedVector& x) {
  for (const auto& [deg, comp] : x.components) {
    auto it = acc.components.find(deg);
    if (it == acc.components.end()) {
      auto& slot = acc.components[deg];
      slot.assign(comp.size(), 0.0);
      for (size_t i = 0; i < comp.size(); ++i) slot[i] = c * comp[i];
    } else {
      if (it->second.size() != comp.size())
        throw ShapeError("graded component size mismatch at degree " + std::to_string(deg));
      for (size_t i = 0; i < comp.size(); ++i) it->second[i] += c * comp[i];
    }
  }
}

GradedVector graded_normalized(GradedVector v) {
  for (auto it = v.components.begin(); it != v.components.end();) {
    bool all_zero = true;
    for (double x : it->second)
      if (x != 0.0) {
        all_zero = false;
        break;
      }
    it = all_zero ? v.components.erase(it) : std::next(it);
  }
  return v;
}

GradedVector linfty_action(std::span<const double> coeffs, const LInftyBrackets& br,
                           std::span<const GradedVector> basis_vectors,
                           const GradedVector& t_hat) {
  if (coeffs.size() != basis_vectors.size())
    throw ShapeError("linfty_action: coefficient count does not match basis");
  if (br.max_arity < 2) throw ShapeError("linfty_action: max_arity must be >= 2");

  GradedVector out;
  for (int m = 2; m <= br.max_arity; ++m) {
    auto it = br.brackets.find(m);
    if (it == br.brackets.end())
      throw ShapeError("linfty_action: missing bracket of arity " + std::to_string(m));
    std::vector<GradedVector> args(m, t_hat);
    for (size_t a = 0; a < basis_vectors.size(); ++a) {
      args[0] = basis_vectors[a];
      graded_accumulate(out, coeffs[a], it->second(args));
    }
  }
  return graded_normalized(std::move(out));
}

}  // namespace tgflow
