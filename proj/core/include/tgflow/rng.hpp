#pragma once

#include <cstdint>

namespace tgflow {

/// Stateless counter-based random source: every output is a hash of
/// (seed, stream, counter) through the SplitMix64 finalizer, so any draw can
/// be reproduced or parallelized by index and results are identical across
/// platforms.
///
/// Stream ids used across the project (see also derive_stream for per-epoch
/// substreams):
namespace streams {
inline constexpr uint64_t kMixtureComponent = 1;  ///< mixture component picks
inline constexpr uint64_t kMixtureNoise = 2;      ///< gaussian noise per sample coordinate
inline constexpr uint64_t kWeightInit = 3;        ///< network weight initialization
inline constexpr uint64_t kShuffle = 4;           ///< train index shuffle, per epoch
inline constexpr uint64_t kCfmTime = 5;           ///< interpolation times, per epoch
inline constexpr uint64_t kCfmBase = 6;           ///< base draws x0, per epoch
inline constexpr uint64_t kEvalTime = 7;          ///< frozen evaluation times
inline constexpr uint64_t kEvalBase = 8;          ///< frozen evaluation base draws
inline constexpr uint64_t kSampleInit = 9;        ///< ODE sampling start points
}  // namespace streams

/// SplitMix64 finalizer.
uint64_t mix64(uint64_t z);

/// Deterministic substream id, e.g. derive_stream(kShuffle, epoch).
uint64_t derive_stream(uint64_t base, uint64_t index);

class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

  uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Standard normal via Box-Muller; consumes exactly two counters per call.
  double normal();
  /// Uniform integer in [0, n).
  int index(int n);

  // Stateless access by draw index.
  static uint64_t word_at(uint64_t seed, uint64_t stream, uint64_t counter);
  static double uniform_at(uint64_t seed, uint64_t stream, uint64_t counter);
  static double normal_at(uint64_t seed, uint64_t stream, uint64_t draw_index);

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t counter_ = 0;
};

}  // namespace tgflow
