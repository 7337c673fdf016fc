#pragma once

#include <cstdint>
#include <filesystem>

#include "tgflow/tensor.hpp"

namespace tgflow {

/// Isotropic Gaussian mixture with deterministically placed means.
struct MixtureSpec {
  int n = 2;
  int k = 10000;
  double alpha = 250.0;
  double sigma2 = 0.5;
  uint64_t seed = 1;
};

/// K x N matrix of component means. Pure function of (k, n, alpha):
///  1. primary axis a1 = k mod N gets +-alpha by parity of k;
///  2. secondary axis a2 = (k + floor(K/2)) mod N, when distinct from a1,
///     gets +-alpha/2 by parity of k+1;
///  3. for K > N and k >= N, axis b = (a1 + floor(k/N)) mod N accumulates
///     a signed offset 0.1 * alpha * floor(k/N), sign + iff k mod 3 = 0.
Tensor mixture_means(const MixtureSpec& spec);

/// count x N samples: component uniform over K, then Gaussian noise with
/// per-coordinate variance sigma2. Component picks use stream
/// streams::kMixtureComponent indexed by row; noise uses
/// streams::kMixtureNoise indexed by (row * N + column).
Tensor sample_mixture(const MixtureSpec& spec, int count, uint64_t seed);

/// Binary matrix format: 16-byte header (magic "TGFD", u32 version, u32
/// column count, u32 row count, little-endian) followed by row-major
/// little-endian 64-bit floats.
void write_tgfd(const std::filesystem::path& path, const Tensor& rows);
Tensor read_tgfd(const std::filesystem::path& path);

/// Plain CSV dump for inspection, one row per line, 17 significant digits.
void write_csv_matrix(const std::filesystem::path& path, const Tensor& rows);

}  // namespace tgflow
