#include "tgflow/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tgflow/dataset.hpp"
#include "tgflow/errors.hpp"
#include "tgflow/rng.hpp"
#include "tgflow/sampler.hpp"
#include "tgflow/training.hpp"

namespace tgflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (int n : cfg.dims)
    for (VariantKind kind : cfg.variants)
      for (uint64_t seed : cfg.seeds) cells.push_back({n, kind, seed});
  return cells;
}

fs::path run_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.output_dir) / cfg.run_id;
}

fs::path data_dir(const ExperimentConfig& cfg, int n) {
  return run_dir(cfg) / "data" / std::to_string(n);
}

fs::path cell_dir(const ExperimentConfig& cfg, const Cell& cell) {
  return run_dir(cfg) / std::to_string(cell.n) / variant_name(cell.kind) /
         std::to_string(cell.seed);
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kLogHeader =
    "run_id,variant,n,seed,epoch,train_loss,train_fm_loss,test_loss,param_count,seconds";

void write_log_rows(const fs::path& path, const std::vector<LogRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw MissingInputError("cannot open for writing: " + path.string());
  f << kLogHeader << "\n";
  for (const LogRow& r : rows) {
    f << r.run_id << ',' << r.variant << ',' << r.n << ',' << r.seed << ',' << r.epoch << ','
      << fmt17(r.train_loss) << ',' << fmt17(r.train_fm) << ',' << fmt17(r.test_loss) << ','
      << r.param_count << ',' << fmt17(r.seconds) << "\n";
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Tensor load_split(const ExperimentConfig& cfg, int n, const char* name) {
  const fs::path path = data_dir(cfg, n) / name;
  if (!fs::exists(path))
    throw MissingInputError("dataset file missing (run gen-data first): " + path.string());
  Tensor rows = read_tgfd(path);
  if (cfg.standardize && cfg.data_alpha != 0.0)
    for (double& x : rows.data) x /= cfg.data_alpha;
  return rows;
}

}  // namespace

std::vector<LogRow> read_log_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw MissingInputError("cannot open log: " + path.string());
  std::vector<LogRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != kLogHeader) throw ConfigError("unexpected log header in " + path.string());
      continue;
    }
    const auto cols = split_csv_line(line);
    if (cols.size() != 10) throw ConfigError("malformed log row in " + path.string());
    LogRow r;
    r.run_id = cols[0];
    r.variant = cols[1];
    r.n = std::stoi(cols[2]);
    r.seed = std::stoull(cols[3]);
    r.epoch = std::stoi(cols[4]);
    r.train_loss = std::stod(cols[5]);
    r.train_fm = std::stod(cols[6]);
    r.test_loss = std::stod(cols[7]);
    r.param_count = std::stoll(cols[8]);
    r.seconds = std::stod(cols[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void cmd_gen_data(const ExperimentConfig& cfg) {
  for (int n : cfg.dims) {
    const fs::path dir = data_dir(cfg, n);
    fs::create_directories(dir);
    const MixtureSpec spec = cfg.mixture(n);
    const Tensor train_x = sample_mixture(spec, cfg.n_train, derive_stream(spec.seed, 0));
    const Tensor test_x = sample_mixture(spec, cfg.n_test, derive_stream(spec.seed, 1));
    write_tgfd(dir / "train.tgfd", train_x);
    write_tgfd(dir / "test.tgfd", test_x);
    write_csv_matrix(dir / "train.csv", train_x);

    json meta;
    meta["n"] = n;
    meta["k"] = spec.k;
    meta["alpha"] = spec.alpha;
    meta["sigma2"] = spec.sigma2;
    meta["seed"] = spec.seed;
    meta["n_train"] = cfg.n_train;
    meta["n_test"] = cfg.n_test;
    meta["standardize"] = cfg.standardize;
    std::ofstream mf(dir / "meta.json", std::ios::trunc);
    mf << meta.dump(2) << "\n";
  }
}

void run_train_cell(const ExperimentConfig& cfg, const Cell& cell, bool resume) {
  const Tensor train_x = load_split(cfg, cell.n, "train.tgfd");
  const Tensor test_x = load_split(cfg, cell.n, "test.tgfd");

  const WidthPlan plan = match_parameters(cfg.budget, cell.kind, cell.n);
  TgfmModel model = build_model(cell.kind, cell.n, plan.width, cell.seed);

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cell.seed;

  const fs::path dir = cell_dir(cfg, cell);
  fs::create_directories(dir);
  const fs::path ckpt_path = dir / "checkpoint.tgfc";
  const fs::path log_path = dir / "log.csv";

  CheckpointMeta meta;
  meta.variant = variant_name(cell.kind);
  meta.n = cell.n;
  meta.width = plan.width;
  meta.seed = cell.seed;
  meta.config = config_echo(cfg);

  int start_epoch = 0;
  std::vector<LogRow> rows;
  if (resume && fs::exists(ckpt_path)) {
    const CheckpointMeta stored = load_checkpoint(ckpt_path, model);
    start_epoch = stored.epochs_done;
    meta.adam_step = stored.adam_step;
    if (fs::exists(log_path))
      for (LogRow& r : read_log_csv(log_path))
        if (r.epoch < start_epoch) rows.push_back(std::move(r));
  } else {
    meta.epochs_done = 0;
    meta.adam_step = 0;
    save_checkpoint(ckpt_path, model, meta);
    write_log_rows(log_path, rows);
  }
  if (start_epoch >= cfg.train.epochs && cfg.train.epochs > 0) return;

  const int64_t param_count = model.params.total_params();
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochLog& e) {
    LogRow r;
    r.run_id = cfg.run_id;
    r.variant = variant_name(cell.kind);
    r.n = cell.n;
    r.seed = cell.seed;
    r.epoch = e.epoch;
    r.train_loss = e.train_loss;
    r.train_fm = e.train_fm;
    r.test_loss = e.test_loss;
    r.param_count = param_count;
    r.seconds = e.seconds;
    rows.push_back(std::move(r));
    write_log_rows(log_path, rows);
    meta.epochs_done = e.epoch + 1;
    meta.adam_step = model.params.step();
    save_checkpoint(ckpt_path, model, meta);
  };
  train(model, train_x, test_x, train_cfg, start_epoch, hooks);
}

void cmd_train(const ExperimentConfig& cfg, int jobs, bool resume) {
  const std::vector<Cell> cells = enumerate_cells(cfg);
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, static_cast<int>(cells.size()));

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::mutex out_mutex;

  auto worker = [&]() {
    while (!failed.load()) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      const Cell& cell = cells[i];
      try {
        run_train_cell(cfg, cell, resume);
        std::lock_guard<std::mutex> lock(out_mutex);
        std::cout << "trained " << cell.n << "/" << variant_name(cell.kind) << "/seed"
                  << cell.seed << "\n";
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  std::vector<std::thread> pool;
  for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

TgfmModel load_cell_model(const ExperimentConfig& cfg, const Cell& cell) {
  const fs::path ckpt_path = cell_dir(cfg, cell) / "checkpoint.tgfc";
  if (!fs::exists(ckpt_path))
    throw MissingInputError("checkpoint missing (run train first): " + ckpt_path.string());
  const CheckpointMeta meta = peek_checkpoint(ckpt_path);
  TgfmModel model = build_model(cell.kind, cell.n, meta.width, cell.seed);
  load_checkpoint(ckpt_path, model);
  return model;
}

}  // namespace

void cmd_eval(const ExperimentConfig& cfg) {
  json all = json::array();
  std::ofstream csv(run_dir(cfg) / "metrics.csv", std::ios::trunc);
  csv << "run_id,variant,n,seed,fm_test_loss,param_count\n";
  for (const Cell& cell : enumerate_cells(cfg)) {
    const TgfmModel model = load_cell_model(cfg, cell);
    const Tensor test_x = load_split(cfg, cell.n, "test.tgfd");
    const EvalMetrics m = evaluate(model, test_x, cell.seed);
    csv << cfg.run_id << ',' << variant_name(cell.kind) << ',' << cell.n << ',' << cell.seed
        << ',' << fmt17(m.fm_test_loss) << ',' << m.param_count << "\n";
    all.push_back({{"variant", variant_name(cell.kind)},
                   {"n", cell.n},
                   {"seed", cell.seed},
                   {"fm_test_loss", m.fm_test_loss},
                   {"param_count", m.param_count}});
  }
  std::ofstream jf(run_dir(cfg) / "metrics.json", std::ios::trunc);
  jf << all.dump(2) << "\n";
}

void cmd_sample(const ExperimentConfig& cfg) {
  for (const Cell& cell : enumerate_cells(cfg)) {
    const TgfmModel model = load_cell_model(cfg, cell);
    const int n = cell.n;
    Tensor starts(cfg.sample_count, n);
    for (int i = 0; i < starts.rows; ++i)
      for (int j = 0; j < n; ++j)
        starts.at(i, j) = Rng::normal_at(cell.seed, streams::kSampleInit,
                                         static_cast<uint64_t>(i) * n + j);
    IntegratorSpec spec{cfg.sample_method, cfg.sample_steps};
    Tensor endpoints = integrate(model_velocity(model), std::move(starts), spec);
    // Models train in standardized coordinates when the flag is on; exported
    // samples go back to data coordinates.
    if (cfg.standardize && cfg.data_alpha != 0.0)
      for (double& x : endpoints.data) x *= cfg.data_alpha;

    const fs::path dir = cell_dir(cfg, cell);
    fs::create_directories(dir);
    write_tgfd(dir / "samples.tgfd", endpoints);
    write_csv_matrix(dir / "samples.csv", endpoints);

    const Tensor means = mixture_means(cfg.mixture(n));
    double dist_sum = 0.0;
    for (int i = 0; i < endpoints.rows; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < means.rows; ++k) {
        double sq = 0.0;
        for (int j = 0; j < n; ++j) {
          const double d = endpoints.at(i, j) - means.at(k, j);
          sq += d * d;
        }
        best = std::min(best, sq);
      }
      dist_sum += std::sqrt(best);
    }
    json meta;
    meta["count"] = endpoints.rows;
    meta["steps"] = cfg.sample_steps;
    meta["method"] = method_name(cfg.sample_method);
    meta["mean_nearest_mean_distance"] =
        endpoints.rows ? dist_sum / endpoints.rows : 0.0;
    std::ofstream mf(dir / "samples_meta.json", std::ios::trunc);
    mf << meta.dump(2) << "\n";
  }
}

}  // namespace tgflow
