#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "forecast/geometry.hpp"
#include "forecast/grid_scene.hpp"
#include "forecast/nn/layers.hpp"
#include "forecast/nn/tensor.hpp"
#include "json.hpp"

namespace forecast {

// Distance and orientation bin centres for the motion head.
struct PolarBins {
  std::vector<double> distances;     // strictly increasing, world units
  std::vector<double> orientations;  // equally spaced on [0, 2pi)

  std::size_t d() const { return distances.size(); }
  std::size_t o() const { return orientations.size(); }
  std::size_t size() const { return d() * o(); }

  // D centres linearly spaced on [0, diagonal / 2], O centres at 2pi k / O.
  static PolarBins for_grid(const GridSpec& spec, std::size_t d = 8, std::size_t o = 8);
  void validate() const;

  nlohmann::json to_json() const;
  static PolarBins from_json(const nlohmann::json& j);
};

struct AgentFrame {
  Point position;
  double heading = 0.0;  // radians, atan2 convention in world coordinates
  bool stationary = false;
};

// Last point and heading of the last nonzero displacement.
AgentFrame agent_frame(std::span<const Point> past);

// Wraps an angle into [0, 2pi).
double wrap_angle(double theta);

// Bilinear taps from the D x O activations (index j * O + k) onto each cell.
struct PolarStencil {
  struct Tap {
    std::array<std::uint32_t, 4> index;
    std::array<double, 4> weight;
  };
  std::vector<Tap> taps;  // one per cell
};

PolarStencil polar_stencil(const PolarBins& bins, const AgentFrame& frame, const GridSpec& spec);

std::vector<double> polar_to_grid(std::span<const double> activations, const PolarStencil& stencil);

// Accumulates d(grid) into d(activations).
void polar_to_grid_backward(std::span<const double> dgrid, const PolarStencil& stencil,
                            std::span<double> dactivations);

// Convolutional scene branch plus recurrent motion branch, each producing one
// value per grid cell. Shared by the goal and reward models.
struct SceneMotionNet {
  static constexpr std::size_t kHidden = 32;

  std::size_t feature_channels = 0;
  PolarBins bins;
  nn::ParamSet params;

  SceneMotionNet() = default;
  SceneMotionNet(std::size_t feature_channels, PolarBins bins, std::uint64_t seed);

  nlohmann::json config_json() const;
  // Declares parameters for `config` with zero values.
  static SceneMotionNet from_config(const nlohmann::json& config);
};

struct SceneCache {
  nn::FeatureMap input;
  nn::FeatureMap pre1, act1, pre2, act2;
};

std::vector<double> scene_forward(const SceneMotionNet& net, const GridScene& scene,
                                  SceneCache* cache = nullptr);

// Accumulates parameter gradients for d(scene output).
void scene_backward(SceneMotionNet& net, const SceneCache& cache, std::span<const double> dout);

struct MotionCache {
  AgentFrame frame;
  PolarStencil stencil;
  std::vector<nn::GruCache> steps;
  nn::Vec hidden;
  nn::Vec activations;
};

// Per-cell motion output. A stationary past contributes zero everywhere.
std::vector<double> motion_forward(const SceneMotionNet& net, const GridSpec& spec,
                                   std::span<const Point> past, MotionCache* cache = nullptr);

void motion_backward(SceneMotionNet& net, const MotionCache& cache, std::span<const double> dout);

// GRU inputs: past displacements rotated into the agent frame, in cells.
std::vector<nn::Vec> motion_inputs(std::span<const Point> past, const AgentFrame& frame,
                                   double cell_size);

}  // namespace forecast
