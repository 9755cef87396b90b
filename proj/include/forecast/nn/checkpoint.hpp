#pragma once

#include <filesystem>
#include <string>

#include "forecast/nn/tensor.hpp"
#include "json.hpp"

namespace forecast::nn {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  std::string component;
  ParamSet params;  // gradients are zero after loading
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json params_to_json(const ParamSet& params);

// Copies values from `j` into the already-declared entries of `params`.
// Names and shapes must match exactly.
void assign_params(ParamSet& params, const nlohmann::json& j);

std::string serialize_checkpoint(const std::string& component, const ParamSet& params,
                                 const nlohmann::json& config);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const std::string& component,
                     const ParamSet& params, const nlohmann::json& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace forecast::nn
