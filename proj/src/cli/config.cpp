#include "forecast/cli/config.hpp"

#include <cstdlib>

#include "forecast/errors.hpp"
#include "forecast/image_io.hpp"

namespace forecast::cli {

using nlohmann::json;

json default_config() {
  return json::parse(R"({
    "seed": 0,
    "paths": {"data": "data", "checkpoints": "checkpoints", "output": "out"},
    "protocol": {"rate_hz": 2.5, "t_obs": 8, "t_pred": 12, "long_side_cells": 64},
    "eval": {"k": 20, "stride": 4},
    "planner": {"tol": 1e-9, "max_sweeps": 0, "eps": 6.0, "r_max": 30.0, "rollout": "most_likely"},
    "train": {
      "goal": {"epochs": 30, "learning_rate": 0.003, "batch_size": 16, "seed": null},
      "irl": {"epochs": 15, "learning_rate": 0.001, "batch_size": 16, "seed": null},
      "traj": {"epochs": 40, "learning_rate": 0.003, "batch_size": 16, "seed": null}
    },
    "synth": {
      "kind": "junction", "count": 4, "demos": 60, "rows": 32, "cols": 32,
      "pixels_per_cell": 4, "cell_size": 4.0, "fps": 10.0, "frames_per_step": 4,
      "obstacle_fraction": 0.4
    }
  })");
}

namespace {

std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    parts.emplace_back(key.substr(start, dot == std::string_view::npos ? key.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

bool compatible(const json& old_value, const json& new_value) {
  if (old_value.is_null() || new_value.is_null()) return true;
  if (old_value.is_number() && new_value.is_number()) return true;
  return old_value.type() == new_value.type();
}

void merge(json& base, const json& update, const std::string& prefix) {
  if (!update.is_object()) throw ConfigError("config " + (prefix.empty() ? "root" : prefix) + " must be an object");
  for (const auto& [k, v] : update.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    if (!base.contains(k)) throw ConfigError("unknown config key " + path);
    if (base[k].is_object()) {
      merge(base[k], v, path);
    } else {
      if (!compatible(base[k], v)) throw ConfigError("config key " + path + " has the wrong type");
      base[k] = v;
    }
  }
}

}  // namespace

void apply_override(json& config, std::string_view key, std::string_view value) {
  if (key.empty()) throw ConfigError("empty override key");
  json* node = &config;
  for (const std::string& part : split_key(key)) {
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key " + std::string(key));
    node = &(*node)[part];
  }
  if (node->is_object()) throw ConfigError("config key " + std::string(key) + " is a section, not a value");
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = std::string(value);
  if (!compatible(*node, parsed)) {
    if (node->is_string() && !parsed.is_string()) {
      parsed = std::string(value);
    } else {
      throw ConfigError("config key " + std::string(key) + " cannot take value '" + std::string(value) + "'");
    }
  }
  *node = std::move(parsed);
}

json resolve_config(const std::optional<std::filesystem::path>& file,
                    const std::vector<std::pair<std::string, std::string>>& overrides) {
  json config = default_config();
  if (file) {
    json user = json::parse(read_file(*file), nullptr, false);
    if (user.is_discarded()) throw ConfigError("config file " + file->string() + " is not valid JSON");
    merge(config, user, "");
  }
  if (const char* env = std::getenv("FORECAST_SEED"); env != nullptr && *env != '\0') {
    apply_override(config, "seed", env);
    if (!config["seed"].is_number_unsigned()) throw ConfigError("FORECAST_SEED must be a non-negative integer");
  }
  for (const auto& [k, v] : overrides) apply_override(config, k, v);
  return config;
}

namespace {

template <typename T>
T get(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key ") + section + "." + key + " is missing or has the wrong type");
  }
}

TrainHyper hyper(const json& j, const char* which, std::uint64_t seed) {
  const json& h = j.at("train").at(which);
  json copy = h;
  if (copy.value("seed", json()).is_null()) copy["seed"] = seed;
  try {
    return TrainHyper::from_json(copy);
  } catch (const json::exception&) {
    throw ConfigError(std::string("config section train.") + which + " has a value of the wrong type");
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.raw = j;
  if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
  c.seed = j.at("seed").get<std::uint64_t>();
  c.data_dir = get<std::string>(j, "paths", "data");
  c.checkpoint_dir = get<std::string>(j, "paths", "checkpoints");
  c.output_dir = get<std::string>(j, "paths", "output");
  try {
    c.protocol = Protocol::from_json(j.at("protocol"));
  } catch (const json::exception&) {
    throw ConfigError("protocol section has a value of the wrong type");
  }
  c.k = get<std::size_t>(j, "eval", "k");
  c.stride = get<std::size_t>(j, "eval", "stride");
  if (c.k < 1) throw ConfigError("eval.k must be at least 1");
  if (c.stride < 1) throw ConfigError("eval.stride must be at least 1");

  c.planner.vi.tol = get<double>(j, "planner", "tol");
  c.planner.vi.max_sweeps = get<std::size_t>(j, "planner", "max_sweeps");
  const std::string rollout = get<std::string>(j, "planner", "rollout");
  if (rollout == "most_likely") {
    c.planner.rollout = RolloutMode::MostLikely;
  } else if (rollout == "sampled") {
    c.planner.rollout = RolloutMode::Sampled;
  } else {
    throw ConfigError("planner.rollout must be most_likely or sampled");
  }
  if (!(c.planner.vi.tol > 0.0)) throw ConfigError("planner.tol must be positive");

  c.goal = hyper(j, "goal", c.seed);
  c.irl = hyper(j, "irl", c.seed + 1);
  c.traj = hyper(j, "traj", c.seed + 2);

  SynthSettings& s = c.synth;
  s.kind = get<std::string>(j, "synth", "kind");
  s.count = get<std::size_t>(j, "synth", "count");
  s.demos = get<std::size_t>(j, "synth", "demos");
  s.options.rows = get<std::size_t>(j, "synth", "rows");
  s.options.cols = get<std::size_t>(j, "synth", "cols");
  s.options.pixels_per_cell = get<std::size_t>(j, "synth", "pixels_per_cell");
  s.options.cell_size = get<double>(j, "synth", "cell_size");
  s.options.obstacle_fraction = get<double>(j, "synth", "obstacle_fraction");
  s.options.eps = get<double>(j, "planner", "eps");
  s.options.r_max = get<double>(j, "planner", "r_max");
  s.fps = get<double>(j, "synth", "fps");
  s.frames_per_step = get<long>(j, "synth", "frames_per_step");
  if (!(s.fps > 0.0) || s.frames_per_step < 1) throw ConfigError("synth.fps and synth.frames_per_step must be positive");
  if (!(s.options.eps > 0.0) || !(s.options.r_max > s.options.eps)) {
    throw ConfigError("planner rewards need 0 < eps < r_max");
  }
  return c;
}

}  // namespace forecast::cli
