// Checkpoint file: 8-byte magic, little-endian u32 manifest length, JSON
// manifest (config echo, parameter inventory, history digest, hashes), then
// the raw float64 parameter blob in manifest order. The manifest hash covers
// the manifest text and the blob, and loading verifies it.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "fuzzyattn/encoder.hpp"
#include "fuzzyattn/hashing.hpp"
#include "fuzzyattn/optim.hpp"
#include "fuzzyattn/params.hpp"

namespace fuzzyattn {

nlohmann::json encoder_config_to_json(const EncoderConfig& config);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);
nlohmann::json optim_config_to_json(const OptimConfig& config);
OptimConfig optim_config_from_json(const nlohmann::json& j);

struct CheckpointData {
  nlohmann::json manifest;
  std::vector<double> values;  // all parameters, flattened in manifest order
};

void save_checkpoint(const std::string& path, const nlohmann::json& config,
                     const ParamList& params,
                     const nlohmann::json& history_digest);

// Verifies magic, manifest hash and blob length; throws ContractError.
CheckpointData load_checkpoint(const std::string& path);

// Copies values into the given parameters, verifying names and shapes
// against the manifest inventory.
void apply_checkpoint(const CheckpointData& data, ParamList& params);

}  // namespace fuzzyattn
