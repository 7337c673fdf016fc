#include "tgflow/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "tgflow/errors.hpp"
#include "tgflow/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset files are written little-endian via memcpy");

namespace tgflow {

namespace {
constexpr char kMagic[4] = {'T', 'G', 'F', 'D'};
constexpr uint32_t kVersion = 1;
}  // namespace

Tensor mixture_means(const MixtureSpec& spec) {
  if (spec.n < 1) throw ConfigError("mixture dimension must be >= 1");
  if (spec.k < 1) throw ConfigError("mixture component count must be >= 1");
  const int n = spec.n;
  const int big_k = spec.k;
  const double alpha = spec.alpha;
  Tensor mu(big_k, n);
  for (int k = 0; k < big_k; ++k) {
    const int a1 = k % n;
    mu.at(k, a1) = (k % 2 == 0 ? 1.0 : -1.0) * alpha;
    const int a2 = (k + big_k / 2) % n;
    if (a2 != a1) mu.at(k, a2) = 0.5 * alpha * ((k + 1) % 2 == 0 ? 1.0 : -1.0);
    if (big_k > n && k >= n) {
      const int b = (a1 + k / n) % n;
      const double sign = (k % 3 == 0) ? 1.0 : -1.0;
      mu.at(k, b) += sign * 0.1 * alpha * static_cast<double>(k / n);
    }
  }
  return mu;
}

Tensor sample_mixture(const MixtureSpec& spec, int count, uint64_t seed) {
  if (count < 0) throw ConfigError("sample count must be >= 0");
  const Tensor mu = mixture_means(spec);
  const double noise_scale = std::sqrt(spec.sigma2);
  Tensor out(count, spec.n);
  for (int i = 0; i < count; ++i) {
    const uint64_t word = Rng::word_at(seed, streams::kMixtureComponent, static_cast<uint64_t>(i));
    const int comp = static_cast<int>(word % static_cast<uint64_t>(spec.k));
    for (int j = 0; j < spec.n; ++j) {
      const uint64_t idx = static_cast<uint64_t>(i) * spec.n + j;
      const double z = Rng::normal_at(seed, streams::kMixtureNoise, idx);
      out.at(i, j) = mu.at(comp, j) + noise_scale * z;
    }
  }
  return out;
}

void write_tgfd(const std::filesystem::path& path, const Tensor& rows) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw MissingInputError("cannot open for writing: " + path.string());
  f.write(kMagic, 4);
  const uint32_t version = kVersion;
  const uint32_t n = static_cast<uint32_t>(rows.cols);
  const uint32_t count = static_cast<uint32_t>(rows.rows);
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&n), 4);
  f.write(reinterpret_cast<const char*>(&count), 4);
  if (!rows.data.empty())
    f.write(reinterpret_cast<const char*>(rows.data.data()),
            static_cast<std::streamsize>(rows.data.size() * sizeof(double)));
  if (!f) throw MissingInputError("write failed: " + path.string());
}

Tensor read_tgfd(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingInputError("cannot open: " + path.string());
  char magic[4];
  uint32_t version = 0, n = 0, count = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&n), 4);
  f.read(reinterpret_cast<char*>(&count), 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("not a TGFD file: " + path.string());
  if (version != kVersion)
    throw ConfigError("unsupported TGFD version in " + path.string());
  Tensor rows(static_cast<int>(count), static_cast<int>(n));
  if (!rows.data.empty()) {
    f.read(reinterpret_cast<char*>(rows.data.data()),
           static_cast<std::streamsize>(rows.data.size() * sizeof(double)));
    if (!f) throw ConfigError("truncated TGFD file: " + path.string());
  }
  return rows;
}

void write_csv_matrix(const std::filesystem::path& path, const Tensor& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw MissingInputError("cannot open for writing: " + path.string());
  char buf[64];
  for (int i = 0; i < rows.rows; ++i) {
    for (int j = 0; j < rows.cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", rows.at(i, j));
      f << buf << (j + 1 == rows.cols ? "" : ",");
    }
    f << "\n";
  }
}

}  // namespace tgflow
