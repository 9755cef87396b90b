#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forecast/pipeline.hpp"
#include "forecast/protocol.hpp"
#include "forecast/training_log.hpp"
#include "json.hpp"

namespace forecast::cli {

nlohmann::json default_config();

// Sets the dotted `key` (e.g. "train.goal.epochs") to `value`. The value is
// read as JSON when it parses, otherwise as a string. Unknown keys and type
// changes are ConfigErrors.
void apply_override(nlohmann::json& config, std::string_view key, std::string_view value);

// Defaults, then the optional JSON file, then FORECAST_SEED, then overrides.
nlohmann::json resolve_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

struct SynthSettings {
  std::string kind = "junction";
  std::size_t count = 4;
  std::size_t demos = 60;
  SynthOptions options;
  double fps = 10.0;
  long frames_per_step = 4;
};

// Typed view of a resolved config.
struct RunConfig {
  nlohmann::json raw;
  std::uint64_t seed = 0;
  std::filesystem::path data_dir;
  std::filesystem::path checkpoint_dir;
  std::filesystem::path output_dir;
  Protocol protocol;
  std::size_t k = 20;
  std::size_t stride = 1;
  PlannerSettings planner;
  TrainHyper goal;
  TrainHyper irl;
  TrainHyper traj;
  SynthSettings synth;

  static RunConfig from_json(const nlohmann::json& config);
};

}  // namespace forecast::cli
