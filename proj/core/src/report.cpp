#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tgflow/errors.hpp"
#include "tgflow/harness.hpp"
#include "tgflow/sampler.hpp"

namespace tgflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kPalette[5] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};

double entry_value(const ReportEntry& e, bool use_test, bool params_chart) {
  if (params_chart) return static_cast<double>(e.param_count);
  return use_test ? e.test_ratio : e.train_ratio;
}

}  // namespace

ReportData build_report(const ExperimentConfig& cfg) {
  ReportData data;
  struct CellLogs {
    std::vector<double> train_fm;
    std::vector<double> test_fm;
    int64_t param_count = 0;
  };
  std::map<std::pair<int, int>, CellLogs> groups;  // (n, variant index)

  for (const Cell& cell : enumerate_cells(cfg)) {
    const fs::path log_path = cell_dir(cfg, cell) / "log.csv";
    const std::string label = std::to_string(cell.n) + "/" + variant_name(cell.kind) +
                              "/seed" + std::to_string(cell.seed);
    if (!fs::exists(log_path)) {
      data.gaps.push_back(label + ": log missing");
      continue;
    }
    const std::vector<LogRow> rows = read_log_csv(log_path);
    if (rows.empty() || rows.back().epoch != cfg.train.epochs - 1) {
      data.gaps.push_back(label + ": incomplete (" + std::to_string(rows.size()) + "/" +
                          std::to_string(cfg.train.epochs) + " epochs)");
      continue;
    }
    CellLogs& cl = groups[{cell.n, static_cast<int>(cell.kind)}];
    cl.train_fm.push_back(rows.back().train_fm);
    cl.test_fm.push_back(rows.back().test_loss);
    cl.param_count = rows.back().param_count;
  }

  std::vector<MetricPoint> train_points;
  std::vector<MetricPoint> test_points;
  for (int n : cfg.dims) {
    for (VariantKind kind : cfg.variants) {
      auto it = groups.find({n, static_cast<int>(kind)});
      if (it == groups.end()) continue;
      ReportEntry e;
      e.n = n;
      e.kind = kind;
      e.seed_count = static_cast<int>(it->second.test_fm.size());
      e.median_train_fm = median(it->second.train_fm);
      e.median_test_fm = median(it->second.test_fm);
      e.min_test_fm = *std::min_element(it->second.test_fm.begin(), it->second.test_fm.end());
      e.max_test_fm = *std::max_element(it->second.test_fm.begin(), it->second.test_fm.end());
      e.param_count = it->second.param_count;
      data.entries.push_back(e);
      train_points.push_back({n, kind, e.median_train_fm});
      test_points.push_back({n, kind, e.median_test_fm});
    }
  }

  // Ratios against the plain-VF + tensor-gauge reference, per dimension.
  try {
    const auto train_ratios = normalize_report(train_points);
    const auto test_ratios = normalize_report(test_points);
    for (size_t i = 0; i < data.entries.size(); ++i) {
      data.entries[i].train_ratio = train_ratios[i].ratio;
      data.entries[i].test_ratio = test_ratios[i].ratio;
    }
  } catch (const MissingInputError& e) {
    data.gaps.push_back(std::string("ratios unavailable: ") + e.what());
  }

  auto find_entry = [&](int n, VariantKind kind) -> const ReportEntry* {
    for (const ReportEntry& e : data.entries)
      if (e.n == n && e.kind == kind) return &e;
    return nullptr;
  };

  for (int n : cfg.dims) {
    const ReportEntry* plain = find_entry(n, VariantKind::kPlainVf);
    const ReportEntry* gauge = find_entry(n, VariantKind::kGaugeFlow);
    const ReportEntry* pvtg = find_entry(n, VariantKind::kPlainVfTensorGauge);
    const ReportEntry* tvtg = find_entry(n, VariantKind::kTensorVfTensorGauge);
    if (!plain || !gauge || !pvtg || !tvtg) continue;
    const double baseline = std::min(plain->median_test_fm, gauge->median_test_fm);
    const bool ok = pvtg->median_test_fm <= plain->median_test_fm &&
                    pvtg->median_test_fm <= gauge->median_test_fm &&
                    tvtg->median_test_fm <= plain->median_test_fm &&
                    tvtg->median_test_fm <= gauge->median_test_fm;
    (ok ? data.ordering_pass_dims : data.ordering_fail_dims).push_back(n);
    if (!ok)
      data.informational_flags.push_back(
          "reproduction failure at n=" + std::to_string(n) +
          ": tensor-gauge median test loss above baseline " + fmt(baseline));
  }

  for (const ReportEntry& e : data.entries) {
    const int64_t lo = cfg.budget - cfg.budget / 10;
    const int64_t hi = cfg.budget + cfg.budget / 10;
    if (e.param_count < lo || e.param_count > hi) {
      data.budget_ok = false;
      data.budget_violations.push_back(std::to_string(e.n) + "/" + variant_name(e.kind) + ": " +
                                       std::to_string(e.param_count));
    }
  }

  for (int n : cfg.dims) {
    const ReportEntry* plain = find_entry(n, VariantKind::kPlainVf);
    if (!plain) continue;
    for (VariantKind kind : {VariantKind::kPlainVfTensorGauge, VariantKind::kTensorVfTensorGauge}) {
      const ReportEntry* e = find_entry(n, kind);
      if (e && e->param_count > plain->param_count) {
        data.plain_vf_largest = false;
        data.informational_flags.push_back("informational: " + std::string(variant_name(kind)) +
                                           " at n=" + std::to_string(n) +
                                           " uses more parameters than plain_vf");
      }
    }
  }
  return data;
}

std::string bar_chart_svg(const std::string& title, const ReportData& report, bool use_test,
                          bool params_chart) {
  const int width = 720, height = 400;
  const int margin_left = 60, margin_bottom = 60, margin_top = 40, margin_right = 20;
  const int plot_w = width - margin_left - margin_right;
  const int plot_h = height - margin_top - margin_bottom;

  std::vector<int> dims;
  for (const ReportEntry& e : report.entries)
    if (std::find(dims.begin(), dims.end(), e.n) == dims.end()) dims.push_back(e.n);
  double maxv = 0.0;
  for (const ReportEntry& e : report.entries)
    maxv = std::max(maxv, entry_value(e, use_test, params_chart));
  if (maxv <= 0.0) maxv = 1.0;
  maxv *= 1.1;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  svg << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h << "\" x2=\""
      << margin_left + plot_w << "\" y2=\"" << margin_top + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\"" << margin_left
      << "\" y2=\"" << margin_top + plot_h << "\" stroke=\"black\"/>\n";

  if (!params_chart) {
    const double ref_y = margin_top + plot_h - plot_h / maxv;
    svg << "<line x1=\"" << margin_left << "\" y1=\"" << ref_y << "\" x2=\""
        << margin_left + plot_w << "\" y2=\"" << ref_y
        << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    svg << "<text x=\"" << margin_left - 6 << "\" y=\"" << ref_y + 4
        << "\" text-anchor=\"end\" font-size=\"11\">1.0</text>\n";
  }

  const int groups = std::max<size_t>(dims.size(), 1);
  const double group_w = static_cast<double>(plot_w) / groups;
  for (size_t gi = 0; gi < dims.size(); ++gi) {
    const int n = dims[gi];
    std::vector<const ReportEntry*> bars;
    for (const ReportEntry& e : report.entries)
      if (e.n == n) bars.push_back(&e);
    const double bar_w = group_w / (bars.size() + 1.5);
    for (size_t bi = 0; bi < bars.size(); ++bi) {
      const ReportEntry& e = *bars[bi];
      const double v = entry_value(e, use_test, params_chart);
      const double h = plot_h * v / maxv;
      const double x = margin_left + gi * group_w + (bi + 0.75) * bar_w;
      const double y = margin_top + plot_h - h;
      const int color = static_cast<int>(e.kind) % 5;
      char rect[512];
      std::snprintf(rect, sizeof(rect),
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\" "
                    "data-n=\"%d\" data-variant=\"%s\" data-value=\"%.10g\"/>\n",
                    x, y, bar_w, h, kPalette[color], e.n, variant_name(e.kind), v);
      svg << rect;
    }
    svg << "<text x=\"" << margin_left + gi * group_w + group_w / 2 << "\" y=\""
        << margin_top + plot_h + 18 << "\" text-anchor=\"middle\" font-size=\"12\">n=" << n
        << "</text>\n";
  }

  // Legend.
  for (size_t i = 0; i < kAllVariants.size(); ++i) {
    const double x = margin_left + i * (plot_w / 5.0);
    const double y = height - 18;
    svg << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[i] << "\"/>\n";
    svg << "<text x=\"" << x + 14 << "\" y=\"" << y << "\" font-size=\"10\">"
        << variant_name(kAllVariants[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

ReportData cmd_report(const ExperimentConfig& cfg) {
  ReportData data = build_report(cfg);
  const fs::path dir = run_dir(cfg);
  fs::create_directories(dir);

  std::ofstream csv(dir / "report.csv", std::ios::trunc);
  csv << "n,variant,seed_count,median_train_fm,median_test_fm,train_ratio,test_ratio,"
         "min_test_fm,max_test_fm,param_count\n";
  for (const ReportEntry& e : data.entries)
    csv << e.n << ',' << variant_name(e.kind) << ',' << e.seed_count << ','
        << fmt(e.median_train_fm) << ',' << fmt(e.median_test_fm) << ',' << fmt(e.train_ratio)
        << ',' << fmt(e.test_ratio) << ',' << fmt(e.min_test_fm) << ',' << fmt(e.max_test_fm)
        << ',' << e.param_count << "\n";

  json j;
  j["run_id"] = cfg.run_id;
  j["budget"] = cfg.budget;
  j["entries"] = json::array();
  for (const ReportEntry& e : data.entries)
    j["entries"].push_back({{"n", e.n},
                            {"variant", variant_name(e.kind)},
                            {"seed_count", e.seed_count},
                            {"median_train_fm", e.median_train_fm},
                            {"median_test_fm", e.median_test_fm},
                            {"train_ratio", e.train_ratio},
                            {"test_ratio", e.test_ratio},
                            {"min_test_fm", e.min_test_fm},
                            {"max_test_fm", e.max_test_fm},
                            {"param_count", e.param_count}});
  j["gaps"] = data.gaps;
  j["ordering_pass_dims"] = data.ordering_pass_dims;
  j["ordering_fail_dims"] = data.ordering_fail_dims;
  j["budget_ok"] = data.budget_ok;
  j["budget_violations"] = data.budget_violations;
  j["plain_vf_largest"] = data.plain_vf_largest;
  j["informational_flags"] = data.informational_flags;
  std::ofstream jf(dir / "report.json", std::ios::trunc);
  jf << j.dump(2) << "\n";

  std::ofstream(dir / "loss_train.svg", std::ios::trunc)
      << bar_chart_svg("Training loss, normalized to plain_vf_tensor_gauge", data, false, false);
  std::ofstream(dir / "loss_test.svg", std::ios::trunc)
      << bar_chart_svg("Test loss, normalized to plain_vf_tensor_gauge", data, true, false);
  std::ofstream(dir / "params.svg", std::ios::trunc)
      << bar_chart_svg("Trainable parameters per model family", data, false, true);
  return data;
}

}  // namespace tgflow
