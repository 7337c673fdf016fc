#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgflow/checkpoint.hpp"
#include "tgflow/config.hpp"

namespace tgflow {

struct Cell {
  int n = 0;
  VariantKind kind = VariantKind::kPlainVf;
  uint64_t seed = 0;
};

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg);

std::filesystem::path run_dir(const ExperimentConfig& cfg);
std::filesystem::path data_dir(const ExperimentConfig& cfg, int n);
std::filesystem::path cell_dir(const ExperimentConfig& cfg, const Cell& cell);

/// One parsed training-log row; columns mirror log.csv.
struct LogRow {
  std::string run_id;
  std::string variant;
  int n = 0;
  uint64_t seed = 0;
  int epoch = 0;
  double train_loss = 0.0;
  double train_fm = 0.0;
  double test_loss = 0.0;
  int64_t param_count = 0;
  double seconds = 0.0;
};

std::vector<LogRow> read_log_csv(const std::filesystem::path& path);

/// Writes train/test splits plus a metadata JSON for every configured n.
void cmd_gen_data(const ExperimentConfig& cfg);

/// Trains one cell; writes a checkpoint and a log row per epoch. With resume,
/// continues from the stored epoch count and reproduces the uninterrupted
/// trajectory.
void run_train_cell(const ExperimentConfig& cfg, const Cell& cell, bool resume);

/// Runs every cell on a small worker pool; one writer per cell directory.
void cmd_train(const ExperimentConfig& cfg, int jobs, bool resume);

/// Metrics (frozen-draw test loss, parameter count) per cell into
/// metrics.csv / metrics.json.
void cmd_eval(const ExperimentConfig& cfg);

/// Integrates sample.count starts through each cell's flow and exports them
/// in the dataset binary format plus a nearest-mean diagnostic JSON.
void cmd_sample(const ExperimentConfig& cfg);

struct ReportEntry {
  int n = 0;
  VariantKind kind = VariantKind::kPlainVf;
  int seed_count = 0;
  double median_train_fm = 0.0;
  double median_test_fm = 0.0;
  double min_test_fm = 0.0;
  double max_test_fm = 0.0;
  double train_ratio = 0.0;
  double test_ratio = 0.0;
  int64_t param_count = 0;
};

struct ReportData {
  std::vector<ReportEntry> entries;       // grouped by n, variant order fixed
  std::vector<std::string> gaps;          // missing or incomplete cells
  std::vector<int> ordering_pass_dims;    // tensor-gauge medians beat both baselines
  std::vector<int> ordering_fail_dims;
  bool budget_ok = true;                  // every variant within 10% of budget
  std::vector<std::string> budget_violations;
  bool plain_vf_largest = true;           // informational, mirrors the params figure
  std::vector<std::string> informational_flags;
};

/// Aggregates completed logs into medians, ratios and ordering checks.
/// Incomplete cells become gaps rather than errors.
ReportData build_report(const ExperimentConfig& cfg);

/// build_report + report.json, report.csv, loss_train.svg, loss_test.svg,
/// params.svg under the run directory.
ReportData cmd_report(const ExperimentConfig& cfg);

/// Grouped bar chart; bars carry data-n/data-variant/data-value attributes
/// and heights proportional to value.
std::string bar_chart_svg(const std::string& title, const ReportData& report, bool use_test,
                          bool params_chart);

}  // namespace tgflow
