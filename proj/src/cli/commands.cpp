#include "forecast/cli/commands.hpp"

#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "forecast/cli/config.hpp"
#include "forecast/dataset.hpp"
#include "forecast/errors.hpp"
#include "forecast/goal_model.hpp"
#include "forecast/image_io.hpp"
#include "forecast/irl_planner.hpp"
#include "forecast/pipeline.hpp"
#include "forecast/render.hpp"
#include "forecast/rng.hpp"
#include "forecast/traj_gen.hpp"

namespace forecast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void echo_config(const fs::path& dir, const RunConfig& cfg) {
  fs::create_directories(dir);
  write_json(dir / "effective_config.json", cfg.raw);
}

std::string grid_csv(const std::vector<double>& g, std::size_t rows, std::size_t cols) {
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c > 0) out += ',';
      out += num(g[r * cols + c]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> read_grid_csv(const fs::path& path, std::size_t& rows, std::size_t& cols) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<double> out;
  rows = 0;
  cols = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::size_t n = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      double v = 0.0;
      const char* b = line.data() + start;
      const char* e = line.data() + comma;
      while (e > b && (e[-1] == '\r' || e[-1] == ' ')) --e;
      const auto res = std::from_chars(b, e, v);
      if (res.ec != std::errc() || res.ptr != e) {
        throw ParseError({rows + 1}, "non-numeric grid value in " + path.string());
      }
      out.push_back(v);
      ++n;
      start = comma + 1;
    }
    if (cols == 0) cols = n;
    if (n != cols) throw ParseError({rows + 1}, "ragged grid row in " + path.string());
    ++rows;
  }
  if (rows == 0) throw ParseError({1}, "empty grid file " + path.string());
  return out;
}

std::string safe_name(const std::string& id) {
  std::string s = id;
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return s;
}

// ---------------------------------------------------------------------------
// synth

void cmd_synth(const RunConfig& cfg) {
  const SynthSettings& s = cfg.synth;
  const SceneKind kind = [&] {
    try {
      return parse_scene_kind(s.kind);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }();
  const fs::path root = cfg.data_dir;
  fs::create_directories(root / "scenes");

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < s.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03zu", i);
    const std::string id = name;
    ids.push_back(id);
    const std::uint64_t world_seed = Rng(cfg.seed, 1000 + i).next_u64();
    const std::uint64_t demo_seed = Rng(cfg.seed, 2000 + i).next_u64();
    SyntheticWorld world = synth_scene(world_seed, kind, s.options);
    world.demos = synth_demos(world, s.demos, demo_seed);

    const fs::path dir = root / "scenes" / id;
    fs::create_directories(dir);
    write_ppm(dir / "scene.ppm", world.scene.raster);
    SceneSidecar side;
    side.raster = "scene.ppm";
    side.fps = s.fps;
    side.cell_size = world.scene.spec.cell_size;
    side.origin = world.scene.spec.origin;
    side.rows = world.scene.spec.rows;
    side.cols = world.scene.spec.cols;
    write_json(dir / "scene.json", side.to_json());

    std::vector<Track> tracks;
    for (std::size_t d = 0; d < world.demos.size(); ++d) {
      if (world.demos[d].size() < 2) continue;
      char agent[32];
      std::snprintf(agent, sizeof agent, "agent_%04zu", d);
      tracks.push_back(demo_to_track(world.demos[d], world.scene.spec, id, agent, s.frames_per_step));
    }
    write_file_atomic(dir / "tracks.csv", tracks_to_csv(tracks));
    write_file_atomic(dir / "true_reward.csv",
                      grid_csv(world.true_reward, world.scene.spec.rows, world.scene.spec.cols));
  }

  DatasetSplit split;
  const std::size_t n = ids.size();
  const std::size_t n_test = n >= 3 ? std::max<std::size_t>(1, n / 5) : 0;
  const std::size_t n_val = n >= 3 ? std::max<std::size_t>(1, n / 5) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n - n_test - n_val) {
      split.train.push_back(ids[i]);
    } else if (i < n - n_test) {
      split.val.push_back(ids[i]);
    } else {
      split.test.push_back(ids[i]);
    }
  }
  write_json(root / "split.json", split.to_json());
  write_json(root / "manifest.json",
             {{"format_version", 1}, {"kind", s.kind}, {"seed", cfg.seed}, {"scenes", ids}});
  echo_config(root, cfg);
  std::cout << "wrote " << n << " scene(s) to " << root.string() << "\n";
}

// ---------------------------------------------------------------------------
// train

json checkpoint_extra(const RunConfig& cfg, const TrainHyper& h) {
  return {{"protocol", cfg.protocol.to_json()}, {"hyper", h.to_json()}};
}

void print_log(const TrainingLog& log) {
  for (const EpochRecord& e : log.epochs) {
    std::cout << log.component << " epoch " << e.epoch << " train " << num(e.train_loss) << " val "
              << num(e.val_loss) << (e.improved ? " *" : "") << "\n";
  }
  if (log.skipped_steps > 0) {
    std::cerr << "warning: " << log.skipped_steps << " IRL step(s) skipped, soft value iteration did not converge\n";
  }
}

std::vector<TrajectoryInstance> split_instances(const Dataset& data, const RunConfig& cfg, const std::string& split) {
  return dataset_instances(data, data.split.get(split), cfg.protocol.rate_hz, cfg.protocol.t_obs,
                           cfg.protocol.t_pred, cfg.stride);
}

fs::path ckpt(const RunConfig& cfg, const char* component) {
  return cfg.checkpoint_dir / (std::string(component) + ".json");
}

void require_checkpoint(const RunConfig& cfg, const char* component, const char* stage) {
  if (!fs::exists(ckpt(cfg, component))) {
    throw MissingDependency("missing " + std::string(component) + " checkpoint at " + ckpt(cfg, component).string() +
                            "; run `forecast train " + stage + "` first");
  }
}

void cmd_train(const RunConfig& cfg, const std::string& which) {
  if (which != "goal" && which != "irl" && which != "traj") {
    throw ConfigError("train expects one of goal, irl, traj");
  }
  if (which == "traj") {
    require_checkpoint(cfg, kGoalComponent, "goal");
    require_checkpoint(cfg, kRewardComponent, "irl");
  }
  const Dataset data = load_dataset(cfg.data_dir);
  const auto train = split_instances(data, cfg, "train");
  const auto val = split_instances(data, cfg, "val");
  if (train.empty()) throw BadSelector("the train split yields no instances");
  const GridScene& first = scene_for(data.scenes, train.front());
  fs::create_directories(cfg.checkpoint_dir);

  TrainingLog log;
  if (which == "goal") {
    GoalModel model{SceneMotionNet(first.feature_channels, PolarBins::for_grid(first.spec), cfg.goal.seed)};
    log = train_goal_model(model, data.scenes, train, val, cfg.goal);
    save_goal_model(ckpt(cfg, kGoalComponent), model, checkpoint_extra(cfg, cfg.goal));
  } else if (which == "irl") {
    RewardModel model{SceneMotionNet(first.feature_channels, PolarBins::for_grid(first.spec), cfg.irl.seed),
                      cfg.synth.options.eps, cfg.synth.options.r_max};
    log = train_irl(model, data.scenes, irl_examples(data.scenes, train), irl_examples(data.scenes, val), cfg.irl,
                    cfg.planner.vi);
    save_reward_model(ckpt(cfg, kRewardComponent), model, checkpoint_extra(cfg, cfg.irl));
  } else {
    json rc;
    const RewardModel reward = load_reward_model(ckpt(cfg, kRewardComponent), &rc);
    json gc;
    load_goal_model(ckpt(cfg, kGoalComponent), &gc);
    agreed_protocol({{"config", {{"protocol", cfg.protocol.to_json()}}}, {kGoalComponent, gc}, {kRewardComponent, rc}});
    TrajGenerator gen(cfg.traj.seed);
    log = train_traj_gen(gen, teacher_samples(reward, data.scenes, train, cfg.planner.vi),
                         teacher_samples(reward, data.scenes, val, cfg.planner.vi), cfg.traj);
    save_traj_gen(ckpt(cfg, kTrajComponent), gen, checkpoint_extra(cfg, cfg.traj));
  }
  write_json(cfg.checkpoint_dir / (log.component + "_log.json"), log.to_json());
  echo_config(cfg.checkpoint_dir, cfg);
  print_log(log);
}

// ---------------------------------------------------------------------------
// predict / eval / render

PipelineHandle open_pipeline(const RunConfig& cfg) {
  require_checkpoint(cfg, kGoalComponent, "goal");
  require_checkpoint(cfg, kRewardComponent, "irl");
  require_checkpoint(cfg, kTrajComponent, "traj");
  return load_pipeline({ckpt(cfg, kGoalComponent), ckpt(cfg, kRewardComponent), ckpt(cfg, kTrajComponent)},
                       cfg.planner);
}

TrajectoryInstance find_instance(const Dataset& data, const Protocol& protocol, std::size_t stride,
                                 const std::string& id) {
  std::vector<std::string> ids;
  for (const auto& [scene_id, scene] : data.scenes) ids.push_back(scene_id);
  for (TrajectoryInstance& inst :
       dataset_instances(data, ids, protocol.rate_hz, protocol.t_obs, protocol.t_pred, stride)) {
    if (inst.id() == id) return std::move(inst);
  }
  throw BadSelector("unknown instance id '" + id + "'");
}

void cmd_predict(const RunConfig& cfg, const std::string& instance_id, bool render, bool write_prediction) {
  if (instance_id.empty()) throw ConfigError("--instance is required");
  const PipelineHandle handle = open_pipeline(cfg);
  const Dataset data = load_dataset(cfg.data_dir);
  const TrajectoryInstance inst = find_instance(data, handle.protocol, cfg.stride, instance_id);
  const GridScene& scene = scene_for(data.scenes, inst);
  ForecastDiagnostics diag;
  PredictionSet set = forecast(handle, scene, inst.past, cfg.k, cfg.seed, render ? &diag : nullptr);
  set.instance_id = inst.id();
  for (const std::string& w : set.warnings) std::cerr << "warning: " << w << "\n";

  const fs::path dir = cfg.output_dir / (write_prediction ? "predictions" : "renders") / safe_name(inst.id());
  fs::create_directories(dir);
  if (write_prediction) write_json(dir / "prediction.json", set.to_json());
  if (render) write_render_set(dir, scene, diag, inst.past, inst.future, set);
  echo_config(cfg.output_dir, cfg);
  std::cout << set.entries.size() << " prediction(s) for " << inst.id() << " in " << dir.string() << "\n";
}

void cmd_eval(const RunConfig& cfg, const std::string& split) {
  const PipelineHandle handle = open_pipeline(cfg);
  const Dataset data = load_dataset(cfg.data_dir);
  std::vector<TrajectoryInstance> test;
  try {
    test = dataset_instances(data, data.split.get(split), handle.protocol.rate_hz, handle.protocol.t_obs,
                             handle.protocol.t_pred, cfg.stride);
  } catch (const InvalidInput& e) {
    throw BadSelector(e.what());
  }
  if (test.empty()) throw BadSelector("split '" + split + "' yields no instances");
  const EvalReport rep = evaluate_pipeline(handle, data.scenes, test, cfg.k, cfg.seed);
  fs::create_directories(cfg.output_dir);
  write_json(cfg.output_dir / ("eval_" + split + ".json"), rep.to_json());
  write_file_atomic(cfg.output_dir / ("eval_" + split + ".csv"), rep.to_csv());
  echo_config(cfg.output_dir, cfg);
  std::cout << "split " << split << ": " << test.size() << " instance(s), K=" << rep.k << ", mADE " << num(rep.made)
            << ", mFDE " << num(rep.mfde) << ", constant-velocity ADE " << num(rep.baseline_made) << ", FDE "
            << num(rep.baseline_mfde) << "\n";
}

void cmd_render_grid(const fs::path& in, const fs::path& out) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  const std::vector<double> g = read_grid_csv(in, rows, cols);
  write_file_atomic(out, encode_pnm(render_grid(g, rows, cols)));
  std::cout << "wrote " << out.string() << "\n";
}

// "--a.b=v" or "--a.b v" tokens left over by the parser.
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() <= 2) throw ConfigError("unexpected argument '" + tok + "'");
    const std::size_t eq = tok.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(tok.substr(2, eq - 2), tok.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(tok.substr(2), extras[++i]);
    } else {
      throw ConfigError("override " + tok + " has no value");
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Scene-grid trajectory forecasting: goal prediction, max-ent IRL planning and trajectory generation"};
  app.require_subcommand(1);
  app.allow_extras();
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  std::optional<std::string> kind;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--kind", kind, "corridor, junction or obstacle_field");
  synth->add_option("--count", count, "number of scenes");
  synth->allow_extras();

  std::string which;
  auto* train = app.add_subcommand("train", "train one model (goal, irl, traj)");
  train->add_option("model", which, "goal, irl or traj")->required();
  train->allow_extras();

  std::string instance;
  bool render = false;
  auto* predict = app.add_subcommand("predict", "forecast one instance");
  predict->add_option("--instance", instance, "instance id <scene>/<agent>/<t0_frame>");
  predict->add_flag("--render", render, "also write the panel images");
  predict->allow_extras();

  std::string split = "test";
  auto* eval = app.add_subcommand("eval", "evaluate mADE/mFDE on a split");
  eval->add_option("--split", split, "train, val or test");
  eval->allow_extras();

  std::string grid_in;
  std::string grid_out;
  auto* rend = app.add_subcommand("render", "render a grid CSV, or the panels of one instance");
  rend->add_option("--grid", grid_in, "grid CSV to render as PGM");
  rend->add_option("--out", grid_out, "output PGM path");
  rend->add_option("--instance", instance, "instance id for the full panel set");
  rend->allow_extras();

  for (CLI::App* sub : {synth, train, predict, eval, rend}) {
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("-K,--k", k, "number of goals / trajectories");
  }

  std::vector<std::string> argv(args.rbegin(), args.rend() - 1);
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    auto overrides = parse_overrides(app.remaining(true));
    if (kind) overrides.emplace_back("synth.kind", *kind);
    if (count) overrides.emplace_back("synth.count", std::to_string(*count));
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (k) overrides.emplace_back("eval.k", std::to_string(*k));
    const std::optional<fs::path> file = config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path);
    const RunConfig cfg = RunConfig::from_json(resolve_config(file, overrides));

    if (synth->parsed()) {
      cmd_synth(cfg);
    } else if (train->parsed()) {
      cmd_train(cfg, which);
    } else if (predict->parsed()) {
      cmd_predict(cfg, instance, render, true);
    } else if (eval->parsed()) {
      cmd_eval(cfg, split);
    } else if (rend->parsed()) {
      if (!grid_in.empty()) {
        if (grid_out.empty()) throw ConfigError("render --grid needs --out");
        cmd_render_grid(grid_in, grid_out);
      } else {
        cmd_predict(cfg, instance, true, false);
      }
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const MissingDependency& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissingDependency;
  } catch (const BadSelector& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadSelector;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadSelector;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const StageError& e) {
    std::cerr << "error: stage " << e.stage() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace forecast::cli
