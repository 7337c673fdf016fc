#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tgflow/errors.hpp"
#include "tgflow/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitMissingInput = 4;

struct CommonOpts {
  std::string config_path;
  std::string output_override;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file")->required();
  cmd->add_option("--output", opts.output_override, "override output_dir from the config");
}

tgflow::ExperimentConfig load(const CommonOpts& opts) {
  tgflow::ExperimentConfig cfg = tgflow::load_config(opts.config_path);
  if (!opts.output_override.empty()) cfg.output_dir = opts.output_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor gauge flow experiment harness"};
  app.require_subcommand(1);

  CommonOpts opts;
  int jobs = 1;
  bool resume = false;

  CLI::App* gen = app.add_subcommand("gen-data", "write train/test mixture splits");
  add_common(gen, opts);

  CLI::App* train = app.add_subcommand("train", "train every (n, variant, seed) cell");
  add_common(train, opts);
  train->add_option("--jobs", jobs, "parallel cell workers")->check(CLI::PositiveNumber);
  train->add_flag("--resume", resume, "continue cells from their checkpoints");

  CLI::App* eval = app.add_subcommand("eval", "frozen-draw test metrics per cell");
  add_common(eval, opts);

  CLI::App* sample = app.add_subcommand("sample", "integrate flows and export samples");
  add_common(sample, opts);

  CLI::App* report = app.add_subcommand("report", "aggregate logs into tables and charts");
  add_common(report, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const tgflow::ExperimentConfig cfg = load(opts);
    if (gen->parsed()) {
      tgflow::cmd_gen_data(cfg);
    } else if (train->parsed()) {
      tgflow::cmd_train(cfg, jobs, resume);
    } else if (eval->parsed()) {
      tgflow::cmd_eval(cfg);
    } else if (sample->parsed()) {
      tgflow::cmd_sample(cfg);
    } else if (report->parsed()) {
      const tgflow::ReportData data = tgflow::cmd_report(cfg);
      for (const std::string& gap : data.gaps) std::cerr << "gap: " << gap << "\n";
      for (const std::string& f : data.informational_flags) std::cerr << f << "\n";
    }
    return kExitOk;
  } catch (const tgflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tgflow::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const tgflow::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
