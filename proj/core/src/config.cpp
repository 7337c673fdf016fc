#include "tgflow/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "tgflow/errors.hpp"

namespace tgflow {

MixtureSpec ExperimentConfig::mixture(int n) const {
  MixtureSpec spec;
  spec.n = n;
  spec.k = data_k;
  spec.alpha = data_alpha;
  spec.sigma2 = data_sigma2;
  spec.seed = data_seed;
  return spec;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"run_id", [&](const std::string&, const std::string& v) { cfg.run_id = v; }},
      {"output_dir", [&](const std::string&, const std::string& v) { cfg.output_dir = v; }},
      {"dims",
       [&](const std::string& k, const std::string& v) {
         cfg.dims.clear();
         for (const auto& item : split_list(v)) cfg.dims.push_back(static_cast<int>(parse_int(k, item)));
       }},
      {"variants",
       [&](const std::string& k, const std::string& v) {
         cfg.variants.clear();
         for (const auto& item : split_list(v)) {
           auto kind = variant_from(item);
           if (!kind) throw ConfigError("config key '" + k + "': unknown variant '" + item + "'");
           cfg.variants.push_back(*kind);
         }
       }},
      {"seeds",
       [&](const std::string& k, const std::string& v) {
         cfg.seeds.clear();
         for (const auto& item : split_list(v)) cfg.seeds.push_back(parse_u64(k, item));
       }},
      {"budget", [&](const std::string& k, const std::string& v) { cfg.budget = parse_int(k, v); }},
      {"dataset.k",
       [&](const std::string& k, const std::string& v) { cfg.data_k = static_cast<int>(parse_int(k, v)); }},
      {"dataset.alpha",
       [&](const std::string& k, const std::string& v) { cfg.data_alpha = parse_double(k, v); }},
      {"dataset.sigma2",
       [&](const std::string& k, const std::string& v) { cfg.data_sigma2 = parse_double(k, v); }},
      {"dataset.seed",
       [&](const std::string& k, const std::string& v) { cfg.data_seed = parse_u64(k, v); }},
      {"dataset.n_train",
       [&](const std::string& k, const std::string& v) { cfg.n_train = static_cast<int>(parse_int(k, v)); }},
      {"dataset.n_test",
       [&](const std::string& k, const std::string& v) { cfg.n_test = static_cast<int>(parse_int(k, v)); }},
      {"train.lr",
       [&](const std::string& k, const std::string& v) { cfg.train.lr = parse_double(k, v); }},
      {"train.weight_decay",
       [&](const std::string& k, const std::string& v) { cfg.train.weight_decay = parse_double(k, v); }},
      {"train.batch_size",
       [&](const std::string& k, const std::string& v) { cfg.train.batch_size = static_cast<int>(parse_int(k, v)); }},
      {"train.epochs",
       [&](const std::string& k, const std::string& v) { cfg.train.epochs = static_cast<int>(parse_int(k, v)); }},
      {"train.clip_norm",
       [&](const std::string& k, const std::string& v) { cfg.train.clip_norm = parse_double(k, v); }},
      {"train.lambda_a",
       [&](const std::string& k, const std::string& v) { cfg.train.lambda_a = parse_double(k, v); }},
      {"train.lambda_cons",
       [&](const std::string& k, const std::string& v) { cfg.train.lambda_cons = parse_double(k, v); }},
      {"train.standardize",
       [&](const std::string& k, const std::string& v) { cfg.standardize = parse_bool(k, v); }},
      {"sample.count",
       [&](const std::string& k, const std::string& v) { cfg.sample_count = static_cast<int>(parse_int(k, v)); }},
      {"sample.steps",
       [&](const std::string& k, const std::string& v) { cfg.sample_steps = static_cast<int>(parse_int(k, v)); }},
      {"sample.method",
       [&](const std::string& k, const std::string& v) { cfg.sample_method = method_from(v); }},
  };

  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }

  if (const char* env = std::getenv("TGFLOW_SEED")) {
    cfg.seeds = {parse_u64("TGFLOW_SEED", env)};
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.run_id.empty()) throw ConfigError("run_id must not be empty");
  for (char c : cfg.run_id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      throw ConfigError("run_id may contain only letters, digits, '_' and '-'");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (cfg.dims.empty()) throw ConfigError("dims must not be empty");
  for (int n : cfg.dims) {
    if (n < 1) throw ConfigError("dims entries must be >= 1");
    for (VariantKind k : cfg.variants)
      if (has_gauge(k) && n < 2)
        throw ConfigError("gauge variants require n >= 2 (got n=" + std::to_string(n) + ")");
  }
  if (cfg.variants.empty()) throw ConfigError("variants must not be empty");
  if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (cfg.budget < 1) throw ConfigError("budget must be positive");
  if (cfg.data_k < 1) throw ConfigError("dataset.k must be >= 1");
  if (cfg.data_sigma2 < 0) throw ConfigError("dataset.sigma2 must be >= 0");
  if (cfg.n_train < 0 || cfg.n_test < 0) throw ConfigError("split sizes must be >= 0");
  if (cfg.train.lr < 0) throw ConfigError("train.lr must be >= 0");
  if (cfg.train.weight_decay < 0) throw ConfigError("train.weight_decay must be >= 0");
  if (cfg.train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (cfg.train.epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (cfg.train.clip_norm <= 0) throw ConfigError("train.clip_norm must be positive");
  if (cfg.train.lambda_a < 0 || cfg.train.lambda_cons < 0)
    throw ConfigError("regularizer weights must be >= 0");
  if (cfg.sample_count < 0) throw ConfigError("sample.count must be >= 0");
  if (cfg.sample_steps < 1) throw ConfigError("sample.steps must be >= 1");
}

std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg) {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  auto join_ints = [](const auto& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
    return s;
  };
  std::string variants;
  for (size_t i = 0; i < cfg.variants.size(); ++i)
    variants += std::string(i ? "," : "") + variant_name(cfg.variants[i]);

  return {
      {"run_id", cfg.run_id},
      {"output_dir", cfg.output_dir},
      {"dims", join_ints(cfg.dims)},
      {"variants", variants},
      {"seeds", join_ints(cfg.seeds)},
      {"budget", std::to_string(cfg.budget)},
      {"dataset.k", std::to_string(cfg.data_k)},
      {"dataset.alpha", fmt(cfg.data_alpha)},
      {"dataset.sigma2", fmt(cfg.data_sigma2)},
      {"dataset.seed", std::to_string(cfg.data_seed)},
      {"dataset.n_train", std::to_string(cfg.n_train)},
      {"dataset.n_test", std::to_string(cfg.n_test)},
      {"train.lr", fmt(cfg.train.lr)},
      {"train.weight_decay", fmt(cfg.train.weight_decay)},
      {"train.batch_size", std::to_string(cfg.train.batch_size)},
      {"train.epochs", std::to_string(cfg.train.epochs)},
      {"train.clip_norm", fmt(cfg.train.clip_norm)},
      {"train.lambda_a", fmt(cfg.train.lambda_a)},
      {"train.lambda_cons", fmt(cfg.train.lambda_cons)},
      {"train.standardize", cfg.standardize ? "true" : "false"},
      {"sample.count", std::to_string(cfg.sample_count)},
      {"sample.steps", std::to_string(cfg.sample_steps)},
      {"sample.method", method_name(cfg.sample_method)},
  };
}

}  // namespace tgflow
