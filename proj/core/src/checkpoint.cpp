#include "tgflow/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "tgflow/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written little-endian via memcpy");

namespace tgflow {

namespace {

constexpr char kMagic[4] = {'T', 'G', 'F', 'C'};
constexpr uint32_t kVersion = 1;

using nlohmann::json;

struct ArrayRef {
  std::string name;
  const Tensor* tensor;
};

std::vector<ArrayRef> stored_arrays(const TgfmModel& model) {
  std::vector<ArrayRef> refs;
  for (int i = 0; i < model.params.count(); ++i) {
    const ParamEntry& e = model.params.entry(i);
    refs.push_back({e.name, &e.value});
    refs.push_back({e.name + "#m", &e.m});
    refs.push_back({e.name + "#v", &e.v});
  }
  return refs;
}

json header_json(const TgfmModel& model, const CheckpointMeta& meta, uint64_t& payload_bytes) {
  json manifest = json::array();
  uint64_t offset = 0;
  for (const ArrayRef& r : stored_arrays(model)) {
    manifest.push_back({{"name", r.name},
                        {"rows", r.tensor->rows},
                        {"cols", r.tensor->cols},
                        {"offset", offset}});
    offset += r.tensor->size() * sizeof(double);
  }
  payload_bytes = offset;
  json h;
  h["variant"] = meta.variant;
  h["n"] = meta.n;
  h["width"] = meta.width;
  h["seed"] = meta.seed;
  h["epochs_done"] = meta.epochs_done;
  h["adam_step"] = meta.adam_step;
  h["config"] = meta.config;
  h["manifest"] = manifest;
  h["payload_bytes"] = payload_bytes;
  return h;
}

json read_header(std::ifstream& f, const std::filesystem::path& path) {
  char magic[4];
  uint32_t version = 0;
  uint64_t header_len = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&header_len), 8);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("not a checkpoint file: " + path.string());
  if (version != kVersion)
    throw ConfigError("unsupported checkpoint version in " + path.string());
  std::string text(header_len, '\0');
  f.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!f) throw ConfigError("truncated checkpoint header: " + path.string());
  return json::parse(text);
}

CheckpointMeta meta_from(const json& h) {
  CheckpointMeta meta;
  meta.variant = h.at("variant").get<std::string>();
  meta.n = h.at("n").get<int>();
  meta.width = h.at("width").get<int>();
  meta.seed = h.at("seed").get<uint64_t>();
  meta.epochs_done = h.at("epochs_done").get<int>();
  meta.adam_step = h.at("adam_step").get<int64_t>();
  meta.config = h.at("config").get<std::map<std::string, std::string>>();
  return meta;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TgfmModel& model,
                     const CheckpointMeta& meta) {
  uint64_t payload_bytes = 0;
  const json h = header_json(model, meta, payload_bytes);
  const std::string text = h.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw MissingInputError("cannot open for writing: " + tmp.string());
    f.write(kMagic, 4);
    const uint32_t version = kVersion;
    const uint64_t header_len = text.size();
    f.write(reinterpret_cast<const char*>(&version), 4);
    f.write(reinterpret_cast<const char*>(&header_len), 8);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const ArrayRef& r : stored_arrays(model))
      if (!r.tensor->data.empty())
        f.write(reinterpret_cast<const char*>(r.tensor->data.data()),
                static_cast<std::streamsize>(r.tensor->size() * sizeof(double)));
    if (!f) throw MissingInputError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointMeta peek_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingInputError("cannot open checkpoint: " + path.string());
  return meta_from(read_header(f, path));
}

CheckpointMeta load_checkpoint(const std::filesystem::path& path, TgfmModel& model) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingInputError("cannot open checkpoint: " + path.string());
  const json h = read_header(f, path);
  const CheckpointMeta meta = meta_from(h);
  if (meta.variant != variant_name(model.kind) || meta.n != model.dim_n ||
      meta.width != model.width)
    throw ConfigError("checkpoint does not match the model shape: " + path.string());

  const auto payload_start = f.tellg();
  const uint64_t payload_bytes = h.at("payload_bytes").get<uint64_t>();
  std::vector<ArrayRef> refs = stored_arrays(model);
  const json& manifest = h.at("manifest");
  if (manifest.size() != refs.size())
    throw ConfigError("checkpoint manifest entry count mismatch: " + path.string());
  for (size_t i = 0; i < refs.size(); ++i) {
    const json& entry = manifest.at(i);
    const uint64_t offset = entry.at("offset").get<uint64_t>();
    const int rows = entry.at("rows").get<int>();
    const int cols = entry.at("cols").get<int>();
    const Tensor* t = refs[i].tensor;
    if (entry.at("name").get<std::string>() != refs[i].name || rows != t->rows ||
        cols != t->cols)
      throw ConfigError("checkpoint manifest mismatch at '" + refs[i].name + "'");
    if (offset + t->size() * sizeof(double) > payload_bytes)
      throw ConfigError("checkpoint manifest offset out of range: " + path.string());
    f.seekg(payload_start + static_cast<std::streamoff>(offset));
    f.read(reinterpret_cast<char*>(const_cast<double*>(t->data.data())),
           static_cast<std::streamsize>(t->size() * sizeof(double)));
    if (!f) throw ConfigError("truncated checkpoint payload: " + path.string());
  }
  model.params.set_step(meta.adam_step);
  return meta;
}

}  // namespace tgflow
