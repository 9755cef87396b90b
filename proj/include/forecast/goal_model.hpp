#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "forecast/dataset.hpp"
#include "forecast/scene_motion_net.hpp"
#include "forecast/training_log.hpp"

namespace forecast {

using SceneMap = std::map<std::string, GridScene>;

inline constexpr const char* kGoalComponent = "goal_model";

struct GoalModel {
  SceneMotionNet net;
};

struct GoalDistribution {
  GridSpec spec;
  std::vector<double> probs;  // rows * cols, sums to 1
  AgentFrame frame;
  std::vector<double> scene_logits;
  std::vector<double> motion_logits;
};

std::vector<double> scene_goal_logits(const GoalModel& model, const GridScene& scene);

GoalDistribution goal_distribution(const GoalModel& model, const GridScene& scene,
                                   std::span<const Point> past);

// Training label: the cell of the final future point.
Cell true_goal_cell(const TrajectoryInstance& instance, const GridSpec& spec);

const GridScene& scene_for(const SceneMap& scenes, const TrajectoryInstance& instance);

// Mean cross-entropy over `instances`; with `accumulate_grad` the gradient of
// that mean is added to the model's parameter gradients.
double goal_loss(GoalModel& model, const SceneMap& scenes, std::span<const TrajectoryInstance> instances,
                 bool accumulate_grad);

// Adam on mean cross-entropy; the model is left holding the parameters with
// the lowest validation loss (training loss when `val` is empty).
TrainingLog train_goal_model(GoalModel& model, const SceneMap& scenes,
                             const std::vector<TrajectoryInstance>& train,
                             const std::vector<TrajectoryInstance>& val, const TrainHyper& hyper);

// Up to K distinct cells drawn without replacement in proportion to `probs`.
std::vector<Cell> sample_goals(std::span<const double> probs, const GridSpec& spec, std::size_t k,
                               std::uint64_t seed);

void save_goal_model(const std::filesystem::path& path, const GoalModel& model,
                     const nlohmann::json& extra_config);
GoalModel load_goal_model(const std::filesystem::path& path, nlohmann::json* config_out = nullptr);

}  // namespace forecast
