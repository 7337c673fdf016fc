#pragma once

#include <span>
#include <vector>

namespace tgflow {

/// Dense row-major matrix of doubles. Row vectors are 1xN, column vectors Nx1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c);
  Tensor(int r, int c, std::vector<double> values);

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v);
  static Tensor row(std::span<const double> v);
  static Tensor column(std::span<const double> v);
  static Tensor scalar(double v);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  std::vector<double> row_vector(int r) const;
  bool all_finite() const;
};

/// True when shapes match and the payloads are byte-identical.
bool bits_equal(const Tensor& a, const Tensor& b);

/// out = op(a) * op(b) with optional transposes. Plain loops, specialized per
/// transpose case for contiguous access; fast enough at desk scale.
Tensor matmul_plain(const Tensor& a, const Tensor& b, bool trans_a = false,
                    bool trans_b = false);

}  // namespace tgflow
