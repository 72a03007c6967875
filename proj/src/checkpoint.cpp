#include "fuzzyattn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace fuzzyattn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'F', 'C', 'K', 'P', 'T', '_', '0', '1'};

std::uint64_t manifest_blob_hash(const std::string& manifest_text,
                                 const std::vector<double>& values) {
  std::uint64_t h = fnv1a_bytes(manifest_text.data(), manifest_text.size());
  return fnv1a_bytes(values.data(), values.size() * sizeof(double), h);
}

}  // namespace

json encoder_config_to_json(const EncoderConfig& config) {
  json kinds = json::array();
  for (AttentionKind k : config.attention_kinds) kinds.push_back(to_string(k));
  return json{{"depth", config.depth},
              {"d_model", config.d_model},
              {"ffn_hidden", config.ffn_hidden},
              {"attention", std::move(kinds)},
              {"rules", config.rules},
              {"structure", to_string(config.structure)},
              {"max_tokens", config.max_tokens},
              {"token_features", config.token_features}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig config;
  config.depth = j.at("depth").get<int>();
  config.d_model = j.at("d_model").get<std::int64_t>();
  config.ffn_hidden = j.at("ffn_hidden").get<std::int64_t>();
  config.attention_kinds.clear();
  for (const auto& k : j.at("attention"))
    config.attention_kinds.push_back(attention_kind_from(k.get<std::string>()));
  config.rules = j.at("rules").get<std::int64_t>();
  config.structure = structure_from(j.at("structure").get<std::string>());
  config.max_tokens = j.at("max_tokens").get<std::int64_t>();
  config.token_features = j.at("token_features").get<std::int64_t>();
  return config;
}

json optim_config_to_json(const OptimConfig& config) {
  return json{{"base_lr", config.base_lr},
              {"batch_size", config.batch_size},
              {"max_epochs", config.max_epochs},
              {"warmup_epochs", config.warmup_epochs},
              {"weight_decay", config.weight_decay},
              {"beta1", config.beta1},
              {"beta2", config.beta2},
              {"eps", config.eps},
              {"lr_min", config.lr_min},
              {"seed", config.seed}};
}

OptimConfig optim_config_from_json(const json& j) {
  OptimConfig config;
  config.base_lr = j.at("base_lr").get<double>();
  config.batch_size = j.at("batch_size").get<std::int64_t>();
  config.max_epochs = j.at("max_epochs").get<int>();
  config.warmup_epochs = j.at("warmup_epochs").get<int>();
  config.weight_decay = j.at("weight_decay").get<double>();
  config.beta1 = j.at("beta1").get<double>();
  config.beta2 = j.at("beta2").get<double>();
  config.eps = j.at("eps").get<double>();
  config.lr_min = j.at("lr_min").get<double>();
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

void save_checkpoint(const std::string& path, const json& config,
                     const ParamList& params, const json& history_digest) {
  json manifest;
  manifest["format"] = "FCKPT";
  manifest["version"] = 1;
  manifest["config"] = config;
  manifest["config_hash"] = hash_hex(fnv1a_bytes(config.dump().data(), config.dump().size()));
  manifest["history"] = history_digest;

  json inventory = json::array();
  std::vector<double> values;
  for (const ParamRef& p : params) {
    inventory.push_back(json{{"name", p.name}, {"shape", p.tensor.shape()}, {"decay", p.decay}});
    values.insert(values.end(), p.tensor.data().begin(), p.tensor.data().end());
  }
  manifest["params"] = std::move(inventory);
  manifest["blob_doubles"] = values.size();

  manifest["manifest_hash"] = "";
  const std::string unhashed = manifest.dump();
  manifest["manifest_hash"] = hash_hex(manifest_blob_hash(unhashed, values));

  const std::string text = manifest.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("save_checkpoint: cannot open '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw ContractError("save_checkpoint: write failed for '" + path + "'");
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("load_checkpoint: cannot open '" + path + "'");

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ContractError("load_checkpoint: '" + path + "' is not a checkpoint");
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw ContractError("load_checkpoint: truncated manifest length");

  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw ContractError("load_checkpoint: truncated manifest");

  CheckpointData data;
  data.manifest = json::parse(text);
  const std::size_t blob_doubles = data.manifest.at("blob_doubles").get<std::size_t>();
  data.values.resize(blob_doubles);
  in.read(reinterpret_cast<char*>(data.values.data()),
          static_cast<std::streamsize>(blob_doubles * sizeof(double)));
  if (!in) throw ContractError("load_checkpoint: truncated parameter blob");

  const std::string stored = data.manifest.at("manifest_hash").get<std::string>();
  json unhashed = data.manifest;
  unhashed["manifest_hash"] = "";
  const std::string expected =
      hash_hex(manifest_blob_hash(unhashed.dump(), data.values));
  if (stored != expected) {
    throw ContractError("load_checkpoint: manifest hash mismatch (file corrupt "
                        "or edited)");
  }
  return data;
}

void apply_checkpoint(const CheckpointData& data, ParamList& params) {
  const json& inventory = data.manifest.at("params");
  if (inventory.size() != params.size()) {
    throw ContractError("apply_checkpoint: parameter count mismatch");
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& meta = inventory[i];
    if (meta.at("name").get<std::string>() != params[i].name) {
      throw ContractError("apply_checkpoint: parameter order mismatch at '" +
                          params[i].name + "'");
    }
    const Shape shape = meta.at("shape").get<Shape>();
    if (shape != params[i].tensor.shape()) {
      throw ContractError("apply_checkpoint: shape mismatch for '" + params[i].name + "'");
    }
    auto& value = params[i].tensor.data();
    if (offset + value.size() > data.values.size()) {
      throw ContractError("apply_checkpoint: parameter blob too short");
    }
    std::copy(data.values.begin() + static_cast<std::ptrdiff_t>(offset),
              data.values.begin() + static_cast<std::ptrdiff_t>(offset + value.size()),
              value.begin());
    offset += value.size();
  }
  if (offset != data.values.size()) {
    throw ContractError("apply_checkpoint: parameter blob size mismatch");
  }
}

}  // namespace fuzzyattn
