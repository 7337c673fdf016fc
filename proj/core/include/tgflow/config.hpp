#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tgflow/dataset.hpp"
#include "tgflow/models.hpp"
#include "tgflow/sampler.hpp"
#include "tgflow/training.hpp"

namespace tgflow {

/// One experiment grid: every (n, variant, seed) cell shares the dataset,
/// optimizer schedule and parameter budget. A config file fully determines a
/// run; unknown keys are rejected.
struct ExperimentConfig {
  std::string run_id = "run";
  std::string output_dir = "out";
  std::vector<int> dims = {2};
  std::vector<VariantKind> variants{kAllVariants.begin(), kAllVariants.end()};
  std::vector<uint64_t> seeds = {1, 2, 3};
  int64_t budget = 24000;

  // dataset.*
  int data_k = 10000;
  double data_alpha = 250.0;
  double data_sigma2 = 0.5;
  uint64_t data_seed = 1;
  int n_train = 45000;
  int n_test = 15000;

  // train.*
  TrainConfig train;       // per-cell seed filled from `seeds`
  bool standardize = false;  // rescale data by 1/alpha at training time

  // sample.*
  int sample_count = 2000;
  int sample_steps = 100;
  IntegrateMethod sample_method = IntegrateMethod::kRk4;

  MixtureSpec mixture(int n) const;
};

/// Flat `key = value` text with section prefixes (train.lr, dataset.k, ...).
/// '#' starts a comment. The TGFLOW_SEED environment variable, when set,
/// overrides the seed list with that single seed.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Key -> value echo of an already-validated config, for headers and logs.
std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg);

void validate_config(const ExperimentConfig& cfg);

}  // namespace tgflow
