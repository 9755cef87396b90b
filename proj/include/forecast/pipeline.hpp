#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forecast/goal_model.hpp"
#include "forecast/irl_planner.hpp"
#include "forecast/metrics.hpp"
#include "forecast/protocol.hpp"
#include "forecast/traj_gen.hpp"

namespace forecast {

struct Prediction {
  Cell goal;
  double goal_prob = 0.0;
  Polyline waypoints;
  Polyline trajectory;
  bool truncated = false;  // rollout hit the step cap before the goal
};

struct PredictionSet {
  std::string instance_id;
  std::size_t k_requested = 0;
  std::vector<Prediction> entries;
  std::vector<std::string> warnings;

  std::vector<Polyline> trajectories() const;
  nlohmann::json to_json() const;
};

// Intermediate grids kept for rendering.
struct ForecastDiagnostics {
  GoalDistribution goals;
  RewardMap reward;
  std::vector<double> svf;  // mean expected visitation over the kept goals
};

struct PlannerSettings {
  SoftVIOptions vi;
  RolloutMode rollout = RolloutMode::MostLikely;
};

// Goals -> soft-optimal paths -> trajectories. Goals whose policy does not
// converge are dropped with a warning.
PredictionSet predict(const GoalModel& goal_model, const RewardModel& reward_model, const TrajGenerator& traj,
                      const GridScene& scene, std::span<const Point> past, std::size_t t_pred, std::size_t k,
                      std::uint64_t seed, const PlannerSettings& planner = {},
                      ForecastDiagnostics* diagnostics = nullptr);

struct PipelineHandle {
  GoalModel goal;
  RewardModel reward;
  TrajGenerator traj;
  Protocol protocol;
  PlannerSettings planner;
};

struct CheckpointPaths {
  std::filesystem::path goal;
  std::filesystem::path reward;
  std::filesystem::path traj;
};

// Loads all three checkpoints and checks that their protocols agree.
PipelineHandle load_pipeline(const CheckpointPaths& paths, const PlannerSettings& planner = {});

// Throws ConfigError naming the disagreeing values.
Protocol agreed_protocol(const std::vector<std::pair<std::string, nlohmann::json>>& configs);

// predict() with stage failures reported as StageError.
PredictionSet forecast(const PipelineHandle& handle, const GridScene& scene, std::span<const Point> past,
                       std::size_t k, std::uint64_t seed, ForecastDiagnostics* diagnostics = nullptr);

// Trajectory-generator samples whose waypoints follow the learned reward's
// most-likely path from the last observed cell to the true goal cell.
std::vector<TrajSample> teacher_samples(const RewardModel& reward, const SceneMap& scenes,
                                        const std::vector<TrajectoryInstance>& instances,
                                        const SoftVIOptions& vi = {});

std::vector<IrlExample> irl_examples(const SceneMap& scenes, const std::vector<TrajectoryInstance>& instances);

// Per-instance seeds are derived from `seed` and the instance position.
EvalReport evaluate_pipeline(const PipelineHandle& handle, const SceneMap& scenes,
                             const std::vector<TrajectoryInstance>& test, std::size_t k, std::uint64_t seed);

}  // namespace forecast
