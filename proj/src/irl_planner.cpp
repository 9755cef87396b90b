#include "forecast/irl_planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "forecast/errors.hpp"
#include "forecast/nn/checkpoint.hpp"
#include "forecast/nn/layers.hpp"
#include "forecast/nn/optim.hpp"

namespace forecast {

double squash_reward(double raw, double eps, double r_max) {
  return -eps - (r_max - eps) * nn::sigmoid(raw);
}

RewardMap reward_forward(const RewardModel& model, const GridScene& scene, std::span<const Point> past) {
  RewardMap m;
  m.spec = scene.spec;
  m.scene = scene_forward(model.net, scene);
  m.motion = motion_forward(model.net, scene.spec, past);
  m.total.resize(m.scene.size());
  for (std::size_t i = 0; i < m.total.size(); ++i) {
    m.total[i] = squash_reward(m.scene[i] + m.motion[i], model.eps, model.r_max);
  }
  return m;
}

IrlExample irl_example(const TrajectoryInstance& instance, const GridSpec& spec) {
  FORECAST_EXPECT(!instance.past.empty() && !instance.future.empty(), "instance needs past and future");
  Polyline pts{instance.past.back()};
  pts.insert(pts.end(), instance.future.begin(), instance.future.end());
  std::vector<Cell> cells = rasterize_polyline(pts, spec);
  const auto first = std::find(cells.begin(), cells.end(), cells.back());
  cells.erase(first + 1, cells.end());
  return {instance.scene_ref, instance.id(), instance.past, std::move(cells)};
}

IrlExample irl_example_from_demo(const std::string& scene_id, const std::string& id,
                                 const std::vector<Cell>& demo, const GridSpec& spec, std::size_t t_obs) {
  FORECAST_EXPECT(!demo.empty(), "empty demonstration");
  const std::size_t m = std::max<std::size_t>(1, std::min(t_obs, demo.size() - 1));
  IrlExample ex;
  ex.scene_id = scene_id;
  ex.id = id;
  for (std::size_t i = 0; i < m; ++i) ex.past.push_back(cell_to_world(demo[i], spec));
  if (ex.past.size() == 1) ex.past.push_back(ex.past.front());
  ex.demo.assign(demo.begin() + static_cast<std::ptrdiff_t>(m - 1), demo.end());
  return ex;
}

std::size_t irl_svf_horizon(const GridSpec& spec, std::size_t demo_cells) {
  return std::max<std::size_t>({1, demo_cells > 0 ? demo_cells - 1 : 0, default_rollout_cap(spec)});
}

RewardGradient irl_reward_gradient(const GridSpec& spec, std::span<const double> total,
                                   std::span<const Cell> demo, const SoftVIOptions& options) {
  FORECAST_EXPECT(!demo.empty(), "empty demonstration");
  RewardGradient out;
  out.grad.assign(spec.cell_count(), 0.0);
  if (demo.size() == 1) {
    out.converged = true;
    return out;
  }
  const PolicySolution pol = soft_value_iteration(spec, total, demo.back(), options);
  out.converged = pol.converged;
  out.sweeps = pol.iterations;
  const SVFGrid expected = expected_svf(pol, demo.front(), irl_svf_horizon(spec, demo.size()));
  const SVFGrid empirical = empirical_svf(demo, spec);
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] = expected.visits[i] - empirical.visits[i];
  out.nll = demo_nll(pol, demo);
  return out;
}

IrlBatchResult irl_batch(RewardModel& model, const SceneMap& scenes, std::span<const IrlExample> examples,
                         const SoftVIOptions& options, bool accumulate_grad) {
  IrlBatchResult res;
  if (examples.empty()) return res;

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_scene;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& v = by_scene[examples[i].scene_id];
    if (v.empty()) order.push_back(examples[i].scene_id);
    v.push_back(i);
  }

  // Raw per-example output gradients are buffered so they can be scaled by
  // the number of counted examples once the batch is known.
  struct Pending {
    MotionCache motion;
    std::vector<double> draw;
  };
  struct ScenePass {
    SceneCache cache;
    std::vector<Pending> items;
  };
  std::vector<ScenePass> passes;
  passes.reserve(order.size());

  const double span_r = model.r_max - model.eps;
  for (const std::string& id : order) {
    auto it = scenes.find(id);
    if (it == scenes.end()) throw InvalidInput("IRL example names unknown scene " + id);
    const GridScene& scene = it->second;
    ScenePass pass;
    const std::vector<double> slog = scene_forward(model.net, scene, accumulate_grad ? &pass.cache : nullptr);
    for (std::size_t i : by_scene[id]) {
      const IrlExample& ex = examples[i];
      Pending p;
      const std::vector<double> mlog =
          motion_forward(model.net, scene.spec, ex.past, accumulate_grad ? &p.motion : nullptr);
      std::vector<double> total(slog.size());
      std::vector<double> slope(slog.size());
      for (std::size_t c = 0; c < total.size(); ++c) {
        const double s = nn::sigmoid(slog[c] + mlog[c]);
        total[c] = -model.eps - span_r * s;
        slope[c] = -span_r * s * (1.0 - s);
      }
      RewardGradient g = irl_reward_gradient(scene.spec, total, ex.demo, options);
      if (!g.converged) {
        ++res.skipped;
        continue;
      }
      res.nll_sum += g.nll;
      ++res.counted;
      if (accumulate_grad) {
        for (std::size_t c = 0; c < g.grad.size(); ++c) g.grad[c] *= slope[c];
        p.draw = std::move(g.grad);
        pass.items.push_back(std::move(p));
      }
    }
    passes.push_back(std::move(pass));
  }

  if (accumulate_grad && res.counted > 0) {
    const double weight = 1.0 / static_cast<double>(res.counted);
    for (ScenePass& pass : passes) {
      if (pass.items.empty()) continue;
      std::vector<double> dscene(pass.items.front().draw.size(), 0.0);
      for (Pending& p : pass.items) {
        for (std::size_t c = 0; c < p.draw.size(); ++c) {
          p.draw[c] *= weight;
          dscene[c] += p.draw[c];
        }
        motion_backward(model.net, p.motion, p.draw);
      }
      scene_backward(model.net, pass.cache, dscene);
    }
  }
  return res;
}

IrlBatchResult irl_step(RewardModel& model, const GridScene& scene, const IrlExample& example,
                        const SoftVIOptions& options) {
  SceneMap one;
  one.emplace(example.scene_id, scene);
  return irl_batch(model, one, std::span<const IrlExample>(&example, 1), options, true);
}

namespace {

double mean_nll(RewardModel& model, const SceneMap& scenes, const std::vector<IrlExample>& examples,
                const SoftVIOptions& options) {
  const IrlBatchResult r = irl_batch(model, scenes, examples, options, false);
  return r.counted > 0 ? r.nll_sum / static_cast<double>(r.counted) : 0.0;
}

}  // namespace

TrainingLog train_irl(RewardModel& model, const SceneMap& scenes, const std::vector<IrlExample>& train,
                      const std::vector<IrlExample>& val, const TrainHyper& hyper,
                      const SoftVIOptions& options) {
  if (train.empty()) throw InvalidInput("IRL training set is empty");
  const std::vector<IrlExample>& monitor = val.empty() ? train : val;

  TrainingLog log;
  log.component = kRewardComponent;
  nn::OptimizerState opt = nn::make_adam_state(model.net.params, {.learning_rate = hyper.learning_rate});
  model.net.params.zero_grad();
  double best = mean_nll(model, scenes, monitor, options);
  log.initial_val_loss = best;
  nn::ParamSet best_params = model.net.params;

  std::vector<IrlExample> batch;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto order = epoch_order(train.size(), hyper.seed, epoch);
    double nll = 0.0;
    std::size_t counted = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + hyper.batch_size); ++i) {
        batch.push_back(train[order[i]]);
      }
      const IrlBatchResult r = irl_batch(model, scenes, batch, options, true);
      nll += r.nll_sum;
      counted += r.counted;
      log.skipped_steps += r.skipped;
      if (r.counted > 0) {
        nn::adam_update(model.net.params, opt);
      } else {
        model.net.params.zero_grad();
      }
    }
    const double train_nll = counted > 0 ? nll / static_cast<double>(counted) : 0.0;
    const double val_nll = mean_nll(model, scenes, monitor, options);
    const bool improved = val_nll < best;
    if (improved) {
      best = val_nll;
      best_params = model.net.params;
    }
    log.record({epoch, train_nll, val_nll, best, improved});
  }
  model.net.params = best_params;
  model.net.params.zero_grad();
  return log;
}

RolloutPath plan_path(const RewardMap& reward, Cell start, Cell goal, const SoftVIOptions& options,
                      PolicySolution* policy_out) {
  PolicySolution pol = soft_value_iteration(reward.spec, reward.total, goal, options);
  RolloutPath path = rollout_paths(pol, start, 1, RolloutMode::MostLikely, 0).front();
  if (policy_out != nullptr) *policy_out = std::move(pol);
  return path;
}

void save_reward_model(const std::filesystem::path& path, const RewardModel& model,
                       const nlohmann::json& extra_config) {
  nlohmann::json config = extra_config;
  config["net"] = model.net.config_json();
  config["eps"] = model.eps;
  config["r_max"] = model.r_max;
  nn::save_checkpoint(path, kRewardComponent, model.net.params, config);
}

RewardModel load_reward_model(const std::filesystem::path& path, nlohmann::json* config_out) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.component != kRewardComponent) {
    throw IoError(path.string() + " holds a " + ck.component + " checkpoint, expected " + kRewardComponent);
  }
  RewardModel model{SceneMotionNet::from_config(ck.config.at("net")), ck.config.value("eps", 6.0),
                    ck.config.value("r_max", 30.0)};
  nn::assign_params(model.net.params, nn::params_to_json(ck.params));
  if (config_out != nullptr) *config_out = ck.config;
  return model;
}

}  // namespace forecast
