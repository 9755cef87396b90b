#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forecast/geometry.hpp"
#include "forecast/grid_scene.hpp"
#include "forecast/rng.hpp"
#include "forecast/soft_vi.hpp"
#include "json.hpp"

namespace forecast {

// ---------------------------------------------------------------------------
// Tracks and windows

struct TrackSample {
  long frame = 0;
  double x = 0.0;
  double y = 0.0;
};

struct Track {
  std::string scene_id;
  std::string agent_id;
  std::vector<TrackSample> samples;  // strictly increasing frames
};

struct TrajectoryInstance {
  std::string scene_ref;
  std::string agent_id;
  Polyline past;
  Polyline future;
  long t0_frame = 0;

  // "<scene>/<agent>/<t0_frame>"
  std::string id() const;
};

inline constexpr std::string_view kTrackCsvHeader = "scene_id,agent_id,frame,x,y";

// Parses the canonical CSV. Rows are grouped by (scene_id, agent_id) and
// sorted by frame. Throws ParseError naming every offending line.
std::vector<Track> parse_tracks(const std::string& text);
std::vector<Track> load_tracks(const std::filesystem::path& path);
std::string tracks_to_csv(const std::vector<Track>& tracks);

struct ResampledTrack {
  Polyline points;
  std::vector<long> frames;  // nearest raw frame for each resampled point
};

// Linear interpolation at rate_hz starting at the first frame; `fps` is the
// raw capture rate of the frame numbers.
ResampledTrack resample(const Track& track, double fps, double rate_hz);

// Sliding windows of t_obs + t_pred consecutive points advancing by stride.
std::vector<TrajectoryInstance> window_instances(const Track& track, const ResampledTrack& resampled,
                                                 std::size_t t_obs, std::size_t t_pred,
                                                 std::size_t stride);
std::vector<TrajectoryInstance> window_instances(const Track& track, double fps, double rate_hz,
                                                 std::size_t t_obs, std::size_t t_pred,
                                                 std::size_t stride);

// ---------------------------------------------------------------------------
// Scene sidecar

struct SceneSidecar {
  std::string raster;
  double fps = 2.5;
  double cell_size = 1.0;
  Point origin{};
  std::size_t rows = 0;  // 0 selects the default grid for the raster
  std::size_t cols = 0;

  nlohmann::json to_json() const;
  static SceneSidecar from_json(const nlohmann::json& j);
};

// Reads the sidecar JSON and its raster (resolved relative to the sidecar).
GridScene load_scene(const std::filesystem::path& sidecar_path, SceneSidecar* sidecar_out = nullptr);

// ---------------------------------------------------------------------------
// Synthetic worlds

enum class SceneKind { Corridor, Junction, ObstacleField };

std::string_view scene_kind_name(SceneKind kind);
SceneKind parse_scene_kind(std::string_view name);

enum SemanticLabel : int { kFree = 0, kObstacle = 1, kGoal = 2 };

struct SynthOptions {
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t pixels_per_cell = 4;
  double cell_size = 4.0;  // world units; one world unit per pixel by default
  double eps = 6.0;        // free-cell step cost
  double r_max = 30.0;     // obstacle step cost
  std::size_t junction_arms = 0;       // 0 picks 3 or 4 from the seed
  double obstacle_fraction = 0.4;      // obstacle_field target
};

struct SyntheticWorld {
  SceneKind kind = SceneKind::Corridor;
  GridScene scene;
  std::vector<double> true_reward;  // in [-r_max, -eps]
  std::vector<Cell> goal_cells;
  std::vector<std::vector<Cell>> demos;
  // junction arm ends in W, N, E, S order; absent arms are nullopt
  std::vector<std::optional<Cell>> arm_goals;
};

SyntheticWorld synth_scene(std::uint64_t seed, SceneKind kind, const SynthOptions& options = {});

// Softmax-optimal demonstrations on the true reward. Demo i draws from a
// generator seeded by (seed, i).
std::vector<std::vector<Cell>> synth_demos(const SyntheticWorld& world, std::size_t n,
                                           std::uint64_t seed);

// One demonstration from `start` toward `goal`; nullopt if it fails to
// absorb within 4 * (rows + cols) steps.
class DemoSampler {
 public:
  explicit DemoSampler(const SyntheticWorld& world);
  std::optional<std::vector<Cell>> sample(Cell start, Cell goal, Rng& rng);

 private:
  const SyntheticWorld& world_;
  std::map<Cell, PolicySolution> policies_;
};

// Track through cell centres, one point every `frames_per_step` frames.
Track demo_to_track(const std::vector<Cell>& demo, const GridSpec& spec, const std::string& scene_id,
                    const std::string& agent_id, long frames_per_step);

// Junction instances where the goal arm is the next arm clockwise (W->N->E->S->W)
// from the arm the agent enters by; each window ends on the goal cell.
std::vector<TrajectoryInstance> synth_turning_instances(const SyntheticWorld& world,
                                                        const std::string& scene_id, std::size_t n,
                                                        std::size_t t_obs, std::size_t t_pred,
                                                        std::uint64_t seed);

// Cell centres of a demo as a polyline.
Polyline cell_centers(const std::vector<Cell>& cells, const GridSpec& spec);

// ---------------------------------------------------------------------------
// Dataset directories

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  const std::vector<std::string>& get(std::string_view name) const;
  nlohmann::json to_json() const;
  static DatasetSplit from_json(const nlohmann::json& j);
};

struct Dataset {
  std::filesystem::path root;
  std::map<std::string, GridScene> scenes;
  std::map<std::string, SceneSidecar> sidecars;
  std::vector<Track> tracks;
  DatasetSplit split;
};

// Layout: manifest.json, split.json, scenes/<id>/{scene.json,scene.ppm,tracks.csv,...}
Dataset load_dataset(const std::filesystem::path& root);

std::vector<TrajectoryInstance> dataset_instances(const Dataset& data,
                                                  const std::vector<std::string>& scene_ids,
                                                  double rate_hz, std::size_t t_obs,
                                                  std::size_t t_pred, std::size_t stride);

}  // namespace forecast
