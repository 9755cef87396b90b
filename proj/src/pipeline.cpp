#include "forecast/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "forecast/errors.hpp"

namespace forecast {

namespace {

nlohmann::json point_array(const Polyline& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const Point& p : pts) a.push_back({p.x, p.y});
  return a;
}

}  // namespace

std::vector<Polyline> PredictionSet::trajectories() const {
  std::vector<Polyline> out;
  out.reserve(entries.size());
  for (const Prediction& p : entries) out.push_back(p.trajectory);
  return out;
}

nlohmann::json PredictionSet::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const Prediction& p : entries) {
    rows.push_back({{"goal", {p.goal.row, p.goal.col}},
                    {"goal_prob", p.goal_prob},
                    {"waypoints", point_array(p.waypoints)},
                    {"trajectory", point_array(p.trajectory)},
                    {"truncated", p.truncated}});
  }
  return {{"instance_id", instance_id}, {"K", k_requested}, {"predictions", rows}, {"warnings", warnings}};
}

PredictionSet predict(const GoalModel& goal_model, const RewardModel& reward_model, const TrajGenerator& traj,
                      const GridScene& scene, std::span<const Point> past, std::size_t t_pred, std::size_t k,
                      std::uint64_t seed, const PlannerSettings& planner, ForecastDiagnostics* diagnostics) {
  if (k < 1) throw InvalidInput("K must be at least 1");
  const GridSpec& spec = scene.spec;
  GoalDistribution goals = goal_distribution(goal_model, scene, past);
  const std::vector<Cell> sampled = sample_goals(goals.probs, spec, k, seed);
  RewardMap reward = reward_forward(reward_model, scene, past);
  const Cell start = world_to_cell(past.back(), spec).cell;

  PredictionSet out;
  out.k_requested = k;
  std::vector<double> svf;
  if (diagnostics != nullptr) svf.assign(spec.cell_count(), 0.0);
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    const Cell goal = sampled[i];
    const PolicySolution pol = soft_value_iteration(spec, reward.total, goal, planner.vi);
    if (!pol.converged) {
      out.warnings.push_back("goal (" + std::to_string(goal.row) + "," + std::to_string(goal.col) +
                             ") dropped: soft value iteration did not converge");
      continue;
    }
    const RolloutPath path = rollout_paths(pol, start, 1, planner.rollout, seed ^ (0x9e37ULL * (i + 1))).front();
    Prediction p;
    p.goal = goal;
    p.goal_prob = goals.probs[index_of(goal, spec)];
    p.truncated = path.truncated;
    p.waypoints = cell_centers(path.cells, spec);
    p.trajectory = generate_trajectory(traj, past, p.waypoints, t_pred, spec.diagonal());
    out.entries.push_back(std::move(p));
    if (diagnostics != nullptr) {
      const SVFGrid g = expected_svf(pol, start, default_rollout_cap(spec));
      for (std::size_t c = 0; c < svf.size(); ++c) svf[c] += g.visits[c];
    }
  }
  if (out.entries.empty()) throw StageError("planner", "no sampled goal produced a converged policy");
  if (diagnostics != nullptr) {
    for (double& v : svf) v /= static_cast<double>(out.entries.size());
    diagnostics->goals = std::move(goals);
    diagnostics->reward = std::move(reward);
    diagnostics->svf = std::move(svf);
  }
  return out;
}

Protocol agreed_protocol(const std::vector<std::pair<std::string, nlohmann::json>>& configs) {
  FORECAST_EXPECT(!configs.empty(), "no checkpoint configs to compare");
  auto read = [](const std::pair<std::string, nlohmann::json>& c) {
    if (!c.second.contains("protocol")) throw ConfigError(c.first + " checkpoint has no protocol settings");
    return Protocol::from_json(c.second.at("protocol"));
  };
  const Protocol ref = read(configs.front());
  for (std::size_t i = 1; i < configs.size(); ++i) {
    const Protocol p = read(configs[i]);
    auto clash = [&](const char* key, const auto& a, const auto& b) {
      if (a == b) return;
      std::ostringstream msg;
      msg << key << " disagrees between checkpoints: " << configs.front().first << " has " << a << ", "
          << configs[i].first << " has " << b;
      throw ConfigError(msg.str());
    };
    clash("t_obs", ref.t_obs, p.t_obs);
    clash("t_pred", ref.t_pred, p.t_pred);
    clash("rate_hz", ref.rate_hz, p.rate_hz);
    clash("long_side_cells", ref.long_side_cells, p.long_side_cells);
  }
  return ref;
}

PipelineHandle load_pipeline(const CheckpointPaths& paths, const PlannerSettings& planner) {
  nlohmann::json gc;
  nlohmann::json rc;
  nlohmann::json tc;
  PipelineHandle h{load_goal_model(paths.goal, &gc), load_reward_model(paths.reward, &rc),
                   load_traj_gen(paths.traj, &tc), Protocol{}, planner};
  h.protocol = agreed_protocol({{kGoalComponent, gc}, {kRewardComponent, rc}, {kTrajComponent, tc}});
  return h;
}

PredictionSet forecast(const PipelineHandle& handle, const GridScene& scene, std::span<const Point> past,
                       std::size_t k, std::uint64_t seed, ForecastDiagnostics* diagnostics) {
  if (past.size() != handle.protocol.t_obs) {
    throw InvalidInput("past track has " + std::to_string(past.size()) + " points, the pipeline expects " +
                       std::to_string(handle.protocol.t_obs));
  }
  try {
    return predict(handle.goal, handle.reward, handle.traj, scene, past, handle.protocol.t_pred, k, seed,
                   handle.planner, diagnostics);
  } catch (const StageError&) {
    throw;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("forecast", e.what());
  }
}

std::vector<TrajSample> teacher_samples(const RewardModel& reward, const SceneMap& scenes,
                                        const std::vector<TrajectoryInstance>& instances,
                                        const SoftVIOptions& vi) {
  std::vector<TrajSample> out;
  out.reserve(instances.size());
  for (const TrajectoryInstance& inst : instances) {
    const GridScene& scene = scene_for(scenes, inst);
    const RewardMap r = reward_forward(reward, scene, inst.past);
    const Cell start = world_to_cell(inst.past.back(), scene.spec).cell;
    const RolloutPath path = plan_path(r, start, true_goal_cell(inst, scene.spec), vi);
    out.push_back({inst.id(), inst.past, cell_centers(path.cells, scene.spec), inst.future, scene.spec.diagonal()});
  }
  return out;
}

std::vector<IrlExample> irl_examples(const SceneMap& scenes, const std::vector<TrajectoryInstance>& instances) {
  std::vector<IrlExample> out;
  out.reserve(instances.size());
  for (const TrajectoryInstance& inst : instances) out.push_back(irl_example(inst, scene_for(scenes, inst).spec));
  return out;
}

EvalReport evaluate_pipeline(const PipelineHandle& handle, const SceneMap& scenes,
                             const std::vector<TrajectoryInstance>& test, std::size_t k, std::uint64_t seed) {
  std::size_t index = 0;
  return evaluate(
      test,
      [&](const TrajectoryInstance& inst) {
        const std::uint64_t s = seed + 7919ULL * index++;
        return forecast(handle, scene_for(scenes, inst), inst.past, k, s).trajectories();
      },
      k);
}

}  // namespace forecast
