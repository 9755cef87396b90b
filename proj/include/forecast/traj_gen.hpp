#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forecast/geometry.hpp"
#include "forecast/nn/layers.hpp"
#include "forecast/nn/tensor.hpp"
#include "forecast/training_log.hpp"
#include "json.hpp"

namespace forecast {

inline constexpr const char* kTrajComponent = "traj_gen";

// GRU past encoder, bidirectional GRU waypoint encoder and an attention GRU
// decoder emitting one displacement per future step.
struct TrajGenerator {
  static constexpr std::size_t kPastHidden = 32;
  static constexpr std::size_t kWaypointHidden = 32;
  static constexpr std::size_t kKey = 2 * kWaypointHidden;
  static constexpr std::size_t kDecoderHidden = 64;
  static constexpr std::size_t kAttention = 32;

  nn::ParamSet params;

  TrajGenerator();  // all parameters zero
  explicit TrajGenerator(std::uint64_t seed);

  nlohmann::json config_json() const;
};

// Coordinates relative to `anchor`, divided by `scale`.
std::vector<nn::Vec> normalize_points(std::span<const Point> points, Point anchor, double scale);

// Decoder initial state from the past track's step displacements.
nn::Vec encode_past(const TrajGenerator& gen, std::span<const Point> past, double scale);

// key_i = [forward_i, backward_i] for normalized waypoints.
std::vector<nn::Vec> encode_waypoints(const TrajGenerator& gen, const std::vector<nn::Vec>& waypoints);

struct DecodeTrace {
  std::vector<nn::Vec> attention;  // weights per decode step
};

// Normalized displacements for t_pred steps; `first_input` is the last
// observed displacement (normalized).
std::vector<nn::Vec> decode_trajectory(const TrajGenerator& gen, const nn::Vec& h0,
                                       const std::vector<nn::Vec>& keys, const nn::Vec& first_input,
                                       std::size_t t_pred, DecodeTrace* trace = nullptr);

// Full forward pass in world units: the last past point plus the cumulative
// sum of decoded displacements.
Polyline generate_trajectory(const TrajGenerator& gen, std::span<const Point> past,
                             std::span<const Point> waypoints, std::size_t t_pred, double scale,
                             DecodeTrace* trace = nullptr);

struct TrajSample {
  std::string id;
  Polyline past;
  Polyline waypoints;
  Polyline future;
  double scale = 1.0;  // grid diagonal of the scene
};

// Mean squared error of future points in normalized coordinates, averaged
// over samples, steps and both axes.
double traj_loss(TrajGenerator& gen, std::span<const TrajSample> samples, bool accumulate_grad);

TrainingLog train_traj_gen(TrajGenerator& gen, const std::vector<TrajSample>& train,
                           const std::vector<TrajSample>& val, const TrainHyper& hyper);

void save_traj_gen(const std::filesystem::path& path, const TrajGenerator& gen,
                   const nlohmann::json& extra_config);
TrajGenerator load_traj_gen(const std::filesystem::path& path, nlohmann::json* config_out = nullptr);

}  // namespace forecast
