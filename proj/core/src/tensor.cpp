#include "tgflow/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tgflow/errors.hpp"

namespace tgflow {

Tensor::Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
  if (r < 0 || c < 0) throw ShapeError("tensor dimensions must be non-negative");
}

Tensor::Tensor(int r, int c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != static_cast<size_t>(r) * c) throw ShapeError("tensor payload size mismatch");
}

Tensor Tensor::full(int r, int c, double v) {
  Tensor t(r, c);
  std::fill(t.data.begin(), t.data.end(), v);
  return t;
}

Tensor Tensor::row(std::span<const double> v) {
  Tensor t(1, static_cast<int>(v.size()));
  std::copy(v.begin(), v.end(), t.data.begin());
  return t;
}

Tensor Tensor::column(std::span<const double> v) {
  Tensor t(static_cast<int>(v.size()), 1);
  std::copy(v.begin(), v.end(), t.data.begin());
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t(1, 1);
  t.data[0] = v;
  return t;
}

std::vector<double> Tensor::row_vector(int r) const {
  auto first = data.begin() + static_cast<size_t>(r) * cols;
  return std::vector<double>(first, first + cols);
}

bool Tensor::all_finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

bool bits_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  if (a.data.empty()) return true;
  return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

Tensor matmul_plain(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  const int m = trans_a ? a.cols : a.rows;
  const int k = trans_a ? a.rows : a.cols;
  const int k2 = trans_b ? b.cols : b.rows;
  const int n = trans_b ? b.rows : b.cols;
  if (k != k2) throw ShapeError("matmul inner dimension mismatch");
  Tensor out(m, n);
  if (!trans_a && !trans_b) {
    for (int i = 0; i < m; ++i) {
      const double* arow = &a.data[static_cast<size_t>(i) * k];
      double* orow = &out.data[static_cast<size_t>(i) * n];
      for (int p = 0; p < k; ++p) {
        const double r = arow[p];
        if (r == 0.0) continue;
        const double* brow = &b.data[static_cast<size_t>(p) * n];
        for (int j = 0; j < n; ++j) orow[j] += r * brow[j];
      }
    }
  } else if (trans_a && !trans_b) {
    for (int p = 0; p < k; ++p) {
      const double* arow = &a.data[static_cast<size_t>(p) * m];
      const double* brow = &b.data[static_cast<size_t>(p) * n];
      for (int i = 0; i < m; ++i) {
        const double r = arow[i];
        if (r == 0.0) continue;
        double* orow = &out.data[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) orow[j] += r * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    for (int i = 0; i < m; ++i) {
      const double* arow = &a.data[static_cast<size_t>(i) * k];
      double* orow = &out.data[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) {
        const double* brow = &b.data[static_cast<size_t>(j) * k];
        double acc = 0.0;
        for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
        orow[j] = acc;
      }
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double* brow = &b.data[static_cast<size_t>(j) * k];
      for (int p = 0; p < k; ++p) {
        const double r = brow[p];
        if (r == 0.0) continue;
        const double* arow = &a.data[static_cast<size_t>(p) * m];
        for (int i = 0; i < m; ++i) out.data[static_cast<size_t>(i) * n + j] += arow[i] * r;
      }
    }
  }
  return out;
}

}  // namespace tgflow
