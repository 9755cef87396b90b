#include "forecast/goal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forecast/errors.hpp"
#include "forecast/nn/checkpoint.hpp"
#include "forecast/nn/layers.hpp"
#include "forecast/nn/optim.hpp"
#include "forecast/rng.hpp"

namespace forecast {

std::vector<double> scene_goal_logits(const GoalModel& model, const GridScene& scene) {
  return scene_forward(model.net, scene);
}

GoalDistribution goal_distribution(const GoalModel& model, const GridScene& scene,
                                   std::span<const Point> past) {
  GoalDistribution d;
  d.spec = scene.spec;
  d.frame = agent_frame(past);
  d.scene_logits = scene_forward(model.net, scene);
  d.motion_logits = motion_forward(model.net, scene.spec, past);
  std::vector<double> logits(d.scene_logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = d.scene_logits[i] + d.motion_logits[i];
  d.probs = nn::softmax(logits);
  return d;
}

Cell true_goal_cell(const TrajectoryInstance& instance, const GridSpec& spec) {
  FORECAST_EXPECT(!instance.future.empty(), "instance has no future points");
  return world_to_cell(instance.future.back(), spec).cell;
}

const GridScene& scene_for(const SceneMap& scenes, const TrajectoryInstance& instance) {
  auto it = scenes.find(instance.scene_ref);
  if (it == scenes.end()) throw InvalidInput("instance " + instance.id() + " names unknown scene");
  return it->second;
}

double goal_loss(GoalModel& model, const SceneMap& scenes, std::span<const TrajectoryInstance> instances,
                 bool accumulate_grad) {
  if (instances.empty()) return 0.0;
  const double weight = 1.0 / static_cast<double>(instances.size());

  // Instances sharing a scene share one pass through the scene branch.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_scene;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto& v = by_scene[instances[i].scene_ref];
    if (v.empty()) order.push_back(instances[i].scene_ref);
    v.push_back(i);
  }

  double loss = 0.0;
  for (const std::string& id : order) {
    const GridScene& scene = scene_for(scenes, instances[by_scene[id].front()]);
    SceneCache sc;
    const std::vector<double> slog = scene_forward(model.net, scene, accumulate_grad ? &sc : nullptr);
    std::vector<double> dscene(slog.size(), 0.0);
    for (std::size_t i : by_scene[id]) {
      const TrajectoryInstance& inst = instances[i];
      MotionCache mc;
      std::vector<double> logits = motion_forward(model.net, scene.spec, inst.past, accumulate_grad ? &mc : nullptr);
      for (std::size_t c = 0; c < logits.size(); ++c) logits[c] += slog[c];
      const std::size_t target = index_of(true_goal_cell(inst, scene.spec), scene.spec);
      const nn::SoftmaxXent xe = nn::softmax_xent(logits, target);
      loss += weight * xe.loss;
      if (accumulate_grad) {
        std::vector<double> d = nn::softmax_xent_backward(xe, target);
        for (std::size_t c = 0; c < d.size(); ++c) {
          d[c] *= weight;
          dscene[c] += d[c];
        }
        motion_backward(model.net, mc, d);
      }
    }
    if (accumulate_grad) scene_backward(model.net, sc, dscene);
  }
  return loss;
}

TrainingLog train_goal_model(GoalModel& model, const SceneMap& scenes,
                             const std::vector<TrajectoryInstance>& train,
                             const std::vector<TrajectoryInstance>& val, const TrainHyper& hyper) {
  if (train.empty()) throw InvalidInput("goal model training set is empty");
  const std::vector<TrajectoryInstance>& monitor = val.empty() ? train : val;

  TrainingLog log;
  log.component = kGoalComponent;
  nn::OptimizerState opt = nn::make_adam_state(model.net.params, {.learning_rate = hyper.learning_rate});
  model.net.params.zero_grad();
  double best = goal_loss(model, scenes, monitor, false);
  log.initial_val_loss = best;
  nn::ParamSet best_params = model.net.params;

  std::vector<TrajectoryInstance> batch;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto order = epoch_order(train.size(), hyper.seed, epoch);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + hyper.batch_size); ++i) {
        batch.push_back(train[order[i]]);
      }
      train_loss += goal_loss(model, scenes, batch, true) * static_cast<double>(batch.size());
      nn::adam_update(model.net.params, opt);
    }
    train_loss /= static_cast<double>(train.size());
    const double val_loss = goal_loss(model, scenes, monitor, false);
    const bool improved = val_loss < best;
    if (improved) {
      best = val_loss;
      best_params = model.net.params;
    }
    log.record({epoch, train_loss, val_loss, best, improved});
  }
  model.net.params = best_params;
  model.net.params.zero_grad();
  return log;
}

std::vector<Cell> sample_goals(std::span<const double> probs, const GridSpec& spec, std::size_t k,
                               std::uint64_t seed) {
  FORECAST_EXPECT(probs.size() == spec.cell_count(), "goal probabilities do not match the grid");
  FORECAST_EXPECT(k >= 1, "K must be at least 1");
  std::vector<double> w(probs.begin(), probs.end());
  for (double& v : w) {
    if (!(v > 0.0)) v = 0.0;
  }
  Rng rng(seed);
  std::vector<Cell> out;
  while (out.size() < k) {
    double total = 0.0;
    std::size_t last = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) {
        total += w[i];
        last = i;
      }
    }
    if (last == w.size()) break;
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = last;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      acc += w[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    out.push_back(cell_at(pick, spec));
    w[pick] = 0.0;
  }
  return out;
}

void save_goal_model(const std::filesystem::path& path, const GoalModel& model,
                     const nlohmann::json& extra_config) {
  nlohmann::json config = extra_config;
  config["net"] = model.net.config_json();
  nn::save_checkpoint(path, kGoalComponent, model.net.params, config);
}

GoalModel load_goal_model(const std::filesystem::path& path, nlohmann::json* config_out) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.component != kGoalComponent) {
    throw IoError(path.string() + " holds a " + ck.component + " checkpoint, expected " + kGoalComponent);
  }
  GoalModel model{SceneMotionNet::from_config(ck.config.at("net"))};
  nn::assign_params(model.net.params, nn::params_to_json(ck.params));
  if (config_out != nullptr) *config_out = ck.config;
  return model;
}

}  // namespace forecast
