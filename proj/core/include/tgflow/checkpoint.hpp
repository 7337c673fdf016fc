#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "tgflow/models.hpp"

namespace tgflow {

struct CheckpointMeta {
  std::string variant;
  int n = 0;
  int width = 0;
  uint64_t seed = 0;
  int epochs_done = 0;
  int64_t adam_step = 0;
  std::map<std::string, std::string> config;
};

/// Binary checkpoint: magic "TGFC", u32 version, u64 header length, a JSON
/// header carrying the metadata plus a parameter manifest (name, rows, cols,
/// byte offset), then the concatenated little-endian 64-bit float arrays.
/// Parameter values and both Adam moments are stored, so a resumed run
/// continues the exact optimizer trajectory.
void save_checkpoint(const std::filesystem::path& path, const TgfmModel& model,
                     const CheckpointMeta& meta);

/// Header only.
CheckpointMeta peek_checkpoint(const std::filesystem::path& path);

/// Restores all arrays into a model that was built with the same variant,
/// dimension and width; returns the stored metadata.
CheckpointMeta load_checkpoint(const std::filesystem::path& path, TgfmModel& model);

}  // namespace tgflow
