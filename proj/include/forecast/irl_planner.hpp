#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forecast/goal_model.hpp"
#include "forecast/scene_motion_net.hpp"
#include "forecast/soft_vi.hpp"
#include "forecast/training_log.hpp"

namespace forecast {

inline constexpr const char* kRewardComponent = "reward_model";

// Same architecture as the goal model, with its output squashed into
// [-r_max, -eps].
struct RewardModel {
  SceneMotionNet net;
  double eps = 6.0;
  double r_max = 30.0;
};

struct RewardMap {
  GridSpec spec;
  std::vector<double> scene;
  std::vector<double> motion;
  std::vector<double> total;
};

// -eps - (r_max - eps) * sigmoid(raw)
double squash_reward(double raw, double eps, double r_max);

RewardMap reward_forward(const RewardModel& model, const GridScene& scene, std::span<const Point> past);

// A demonstration with the motion context it is conditioned on. The demo's
// last cell is the goal.
struct IrlExample {
  std::string scene_id;
  std::string id;
  Polyline past;
  std::vector<Cell> demo;
};

// Rasterizes the last observed point followed by the future track and cuts
// the path at its first arrival on the final cell.
IrlExample irl_example(const TrajectoryInstance& instance, const GridSpec& spec);

// Splits a synthetic demonstration: the first min(t_obs, |demo| - 1) cell
// centres become the past and the demo continues from the last of them.
IrlExample irl_example_from_demo(const std::string& scene_id, const std::string& id,
                                 const std::vector<Cell>& demo, const GridSpec& spec, std::size_t t_obs);

// Expected-SVF horizon used for a demo of `demo_cells` cells: long enough for
// the policy's mass to be absorbed so the gradient matches the demo NLL.
std::size_t irl_svf_horizon(const GridSpec& spec, std::size_t demo_cells);

struct RewardGradient {
  std::vector<double> grad;  // d NLL / d total reward per cell
  double nll = 0.0;
  bool converged = false;
  std::size_t sweeps = 0;
};

// Expected minus empirical state visitation for the demo's goal-conditioned
// soft-optimal policy.
RewardGradient irl_reward_gradient(const GridSpec& spec, std::span<const double> total,
                                   std::span<const Cell> demo, const SoftVIOptions& options = {});

struct IrlBatchResult {
  double nll_sum = 0.0;
  std::size_t counted = 0;
  std::size_t skipped = 0;  // unconverged policies
};

// Demo NLL over `examples`. With `accumulate_grad` the gradient of the mean
// NLL over counted examples is added into the model's gradients.
IrlBatchResult irl_batch(RewardModel& model, const SceneMap& scenes, std::span<const IrlExample> examples,
                         const SoftVIOptions& options, bool accumulate_grad);

// Single-example gradient step (gradients accumulated, no update).
IrlBatchResult irl_step(RewardModel& model, const GridScene& scene, const IrlExample& example,
                        const SoftVIOptions& options = {});

TrainingLog train_irl(RewardModel& model, const SceneMap& scenes, const std::vector<IrlExample>& train,
                      const std::vector<IrlExample>& val, const TrainHyper& hyper,
                      const SoftVIOptions& options = {});

// Most-likely rollout of the learned reward's policy toward `goal`.
RolloutPath plan_path(const RewardMap& reward, Cell start, Cell goal, const SoftVIOptions& options = {},
                      PolicySolution* policy_out = nullptr);

void save_reward_model(const std::filesystem::path& path, const RewardModel& model,
                       const nlohmann::json& extra_config);
RewardModel load_reward_model(const std::filesystem::path& path, nlohmann::json* config_out = nullptr);

}  // namespace forecast
