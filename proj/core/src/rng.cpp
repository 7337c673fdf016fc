#include "tgflow/rng.hpp"

#include <cmath>

namespace tgflow {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

uint64_t mix64(uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t derive_stream(uint64_t base, uint64_t index) {
  return mix64(base * kGolden + index + 1);
}

uint64_t Rng::word_at(uint64_t seed, uint64_t stream, uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

double Rng::uniform_at(uint64_t seed, uint64_t stream, uint64_t counter) {
  return static_cast<double>(word_at(seed, stream, counter) >> 11) * 0x1.0p-53;
}

double Rng::normal_at(uint64_t seed, uint64_t stream, uint64_t draw_index) {
  // u1 in (0, 1] so the log is finite.
  const double u1 =
      static_cast<double>((word_at(seed, stream, 2 * draw_index) >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(word_at(seed, stream, 2 * draw_index + 1) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

uint64_t Rng::next_u64() { return word_at(seed_, stream_, counter_++); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const uint64_t base = counter_;
  counter_ += 2;
  const double u1 = static_cast<double>((word_at(seed_, stream_, base) >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(word_at(seed_, stream_, base + 1) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

int Rng::index(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

}  // namespace tgflow
