#include "forecast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "forecast/errors.hpp"
#include "forecast/image_io.hpp"

namespace forecast {

using nlohmann::json;

std::string TrajectoryInstance::id() const {
  return scene_ref + "/" + agent_id + "/" + std::to_string(t0_frame);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<Track> parse_tracks(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return {};
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = split_fields(line);
  const std::vector<std::string> wanted = {"scene_id", "agent_id", "frame", "x", "y"};
  std::vector<std::size_t> col(wanted.size(), SIZE_MAX);
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t w = 0; w < wanted.size(); ++w) {
      if (trim(header[i]) == wanted[w]) col[w] = i;
    }
  }
  std::string missing;
  for (std::size_t w = 0; w < wanted.size(); ++w) {
    if (col[w] == SIZE_MAX) missing += (missing.empty() ? "" : ", ") + wanted[w];
  }
  if (!missing.empty()) throw ParseError({1}, "missing columns: " + missing);
  const std::size_t width = header.size();

  struct Row {
    TrackSample sample;
    std::size_t line;
  };
  std::map<std::pair<std::string, std::string>, std::vector<Row>> groups;
  std::vector<std::size_t> bad;
  std::string first_error;
  auto fail = [&](std::size_t ln, const std::string& why) {
    bad.push_back(ln);
    if (first_error.empty()) first_error = why;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != width) {
      fail(line_no, "expected " + std::to_string(width) + " fields");
      continue;
    }
    Row row{{}, line_no};
    const std::string scene(trim(f[col[0]]));
    const std::string agent(trim(f[col[1]]));
    if (scene.empty() || agent.empty()) {
      fail(line_no, "empty scene_id or agent_id");
      continue;
    }
    if (!parse_number(f[col[2]], row.sample.frame)) {
      fail(line_no, "non-integer frame");
      continue;
    }
    if (!parse_number(f[col[3]], row.sample.x) || !parse_number(f[col[4]], row.sample.y) ||
        !std::isfinite(row.sample.x) || !std::isfinite(row.sample.y)) {
      fail(line_no, "non-numeric coordinate");
      continue;
    }
    groups[{scene, agent}].push_back(row);
  }

  std::vector<Track> tracks;
  for (auto& [key, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.sample.frame < b.sample.frame; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].sample.frame == rows[i - 1].sample.frame) {
        fail(rows[i - 1].line, "duplicate (agent, frame) pair");
        fail(rows[i].line, "duplicate (agent, frame) pair");
      }
    }
    // A single sample cannot form a track.
    if (rows.size() < 2) continue;
    Track t{key.first, key.second, {}};
    t.samples.reserve(rows.size());
    for (const Row& r : rows) t.samples.push_back(r.sample);
    tracks.push_back(std::move(t));
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    throw ParseError(bad, "malformed trajectory CSV: " + first_error);
  }
  return tracks;
}

std::vector<Track> load_tracks(const std::filesystem::path& path) { return parse_tracks(read_file(path)); }

std::string tracks_to_csv(const std::vector<Track>& tracks) {
  std::string out(kTrackCsvHeader);
  out += '\n';
  for (const Track& t : tracks) {
    for (const TrackSample& s : t.samples) {
      out += t.scene_id + ',' + t.agent_id + ',' + std::to_string(s.frame) + ',' + format_double(s.x) +
             ',' + format_double(s.y) + '\n';
    }
  }
  return out;
}

ResampledTrack resample(const Track& track, double fps, double rate_hz) {
  if (!(fps > 0.0) || !(rate_hz > 0.0)) throw InvalidInput("fps and rate_hz must be positive");
  ResampledTrack out;
  if (track.samples.empty()) return out;
  const auto& s = track.samples;
  const double step = fps / rate_hz;  // raw frames per resampled point
  const double first = static_cast<double>(s.front().frame);
  const double last = static_cast<double>(s.back().frame);
  std::size_t seg = 0;
  for (std::size_t k = 0;; ++k) {
    const double t = first + static_cast<double>(k) * step;
    if (t > last + 1e-9) break;
    while (seg + 1 < s.size() && static_cast<double>(s[seg + 1].frame) < t) ++seg;
    Point p{s[seg].x, s[seg].y};
    if (seg + 1 < s.size()) {
      const double f0 = static_cast<double>(s[seg].frame);
      const double f1 = static_cast<double>(s[seg + 1].frame);
      const double w = std::clamp((t - f0) / (f1 - f0), 0.0, 1.0);
      p = {s[seg].x + w * (s[seg + 1].x - s[seg].x), s[seg].y + w * (s[seg + 1].y - s[seg].y)};
    }
    out.points.push_back(p);
    out.frames.push_back(std::lround(t));
  }
  return out;
}

std::vector<TrajectoryInstance> window_instances(const Track& track, const ResampledTrack& resampled,
                                                 std::size_t t_obs, std::size_t t_pred,
                                                 std::size_t stride) {
  if (t_obs < 1 || t_pred < 1 || stride < 1) throw InvalidInput("t_obs, t_pred and stride must be >= 1");
  std::vector<TrajectoryInstance> out;
  const std::size_t len = t_obs + t_pred;
  const auto& pts = resampled.points;
  for (std::size_t start = 0; start + len <= pts.size(); start += stride) {
    TrajectoryInstance inst;
    inst.scene_ref = track.scene_id;
    inst.agent_id = track.agent_id;
    inst.t0_frame = resampled.frames[start];
    inst.past.assign(pts.begin() + static_cast<std::ptrdiff_t>(start),
                     pts.begin() + static_cast<std::ptrdiff_t>(start + t_obs));
    inst.future.assign(pts.begin() + static_cast<std::ptrdiff_t>(start + t_obs),
                       pts.begin() + static_cast<std::ptrdiff_t>(start + len));
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<TrajectoryInstance> window_instances(const Track& track, double fps, double rate_hz,
                                                 std::size_t t_obs, std::size_t t_pred,
                                                 std::size_t stride) {
  return window_instances(track, resample(track, fps, rate_hz), t_obs, t_pred, stride);
}

// ---------------------------------------------------------------------------
// Sidecar

json SceneSidecar::to_json() const {
  return {{"raster", raster}, {"fps", fps},   {"cell_size", cell_size},
          {"origin", {origin.x, origin.y}},   {"rows", rows}, {"cols", cols}};
}

SceneSidecar SceneSidecar::from_json(const json& j) {
  SceneSidecar s;
  try {
    s.raster = j.at("raster").get<std::string>();
    s.fps = j.at("fps").get<double>();
    s.cell_size = j.value("cell_size", 0.0);
    if (j.contains("origin")) {
      const auto o = j.at("origin").get<std::vector<double>>();
      if (o.size() != 2) throw IoError("origin must have two entries");
      s.origin = {o[0], o[1]};
    }
    s.rows = j.value("rows", std::size_t{0});
    s.cols = j.value("cols", std::size_t{0});
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed scene sidecar: ") + e.what());
  }
  if (!(s.fps > 0.0)) throw IoError("sidecar fps must be positive");
  return s;
}

GridScene load_scene(const std::filesystem::path& sidecar_path, SceneSidecar* sidecar_out) {
  json j;
  try {
    j = json::parse(read_file(sidecar_path));
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse " + sidecar_path.string() + ": " + e.what());
  }
  SceneSidecar side = SceneSidecar::from_json(j);
  const Image raster = read_ppm(sidecar_path.parent_path() / side.raster);
  GridSpec spec;
  if (side.rows > 0 && side.cols > 0 && side.cell_size > 0.0) {
    spec.rows = side.rows;
    spec.cols = side.cols;
    spec.cell_size = side.cell_size;
  } else {
    spec = default_grid_spec(raster.width, raster.height);
  }
  spec.origin = side.origin;
  if (sidecar_out != nullptr) *sidecar_out = side;
  return build_grid(raster, spec);
}

// ---------------------------------------------------------------------------
// Synthetic worlds

std::string_view scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::Corridor: return "corridor";
    case SceneKind::Junction: return "junction";
    case SceneKind::ObstacleField: return "obstacle_field";
  }
  return "unknown";
}

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "corridor") return SceneKind::Corridor;
  if (name == "junction") return SceneKind::Junction;
  if (name == "obstacle_field") return SceneKind::ObstacleField;
  throw InvalidInput("unknown scene kind '" + std::string(name) + "'");
}

namespace {

constexpr std::array<std::array<double, 3>, 3> kPalette = {{
    {0.85, 0.80, 0.66},  // free
    {0.16, 0.36, 0.18},  // obstacle
    {0.86, 0.16, 0.14},  // goal
}};

void fill_rect(std::vector<int>& labels, const GridSpec& spec, long r0, long c0, long r1, long c1,
               int value) {
  for (long r = std::max(0L, r0); r < std::min<long>(static_cast<long>(spec.rows), r1); ++r) {
    for (long c = std::max(0L, c0); c < std::min<long>(static_cast<long>(spec.cols), c1); ++c) {
      labels[static_cast<std::size_t>(r) * spec.cols + static_cast<std::size_t>(c)] = value;
    }
  }
}

// Free cells 8-connected to `from`.
std::vector<char> reachable(const std::vector<int>& labels, const GridSpec& spec, Cell from) {
  std::vector<char> seen(spec.cell_count(), 0);
  std::vector<Cell> stack{from};
  seen[index_of(from, spec)] = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    for (const Offset& o : kActionOffsets) {
      const Cell n{c.row + o.drow, c.col + o.dcol};
      if (!in_bounds(n, spec)) continue;
      const std::size_t i = index_of(n, spec);
      if (seen[i] || labels[i] == kObstacle) continue;
      seen[i] = 1;
      stack.push_back(n);
    }
  }
  return seen;
}

Image paint_raster(const std::vector<int>& labels, const GridSpec& spec, std::size_t ppc, Rng& rng) {
  Image img(spec.cols * ppc, spec.rows * ppc, 3);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const int label = labels[(y / ppc) * spec.cols + x / ppc];
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double noise = rng.uniform(-0.04, 0.04);
        img.at(y, x, ch) = std::clamp(kPalette[static_cast<std::size_t>(label)][ch] + noise, 0.0, 1.0);
      }
    }
  }
  return img;
}

void layout_corridor(std::vector<int>& labels, const GridSpec& spec, Rng& rng, SyntheticWorld& w) {
  std::fill(labels.begin(), labels.end(), static_cast<int>(kObstacle));
  const bool horizontal = rng.index(2) == 0;
  const std::size_t across = horizontal ? spec.rows : spec.cols;
  const std::size_t along = horizontal ? spec.cols : spec.rows;
  const std::size_t width = std::min<std::size_t>(3 + rng.index(3), across);
  const std::size_t lo = across > width + 2 ? 1 + rng.index(across - width - 1) : 0;
  const long mid = static_cast<long>(lo + width / 2);
  if (horizontal) {
    fill_rect(labels, spec, static_cast<long>(lo), 0, static_cast<long>(lo + width),
              static_cast<long>(along), kFree);
    w.goal_cells = {{static_cast<int>(mid), 0}, {static_cast<int>(mid), static_cast<int>(along - 1)}};
  } else {
    fill_rect(labels, spec, 0, static_cast<long>(lo), static_cast<long>(along),
              static_cast<long>(lo + width), kFree);
    w.goal_cells = {{0, static_cast<int>(mid)}, {static_cast<int>(along - 1), static_cast<int>(mid)}};
  }
}

void layout_junction(std::vector<int>& labels, const GridSpec& spec, Rng& rng, std::size_t arms,
                     SyntheticWorld& w) {
  std::fill(labels.begin(), labels.end(), static_cast<int>(kObstacle));
  const long rows = static_cast<long>(spec.rows);
  const long cols = static_cast<long>(spec.cols);
  const long cr = rows / 3 + static_cast<long>(rng.index(static_cast<std::size_t>(std::max(1L, rows / 3))));
  const long cc = cols / 3 + static_cast<long>(rng.index(static_cast<std::size_t>(std::max(1L, cols / 3))));
  if (arms != 3 && arms != 4) arms = 3 + rng.index(2);
  const std::size_t missing = arms == 4 ? 4 : rng.index(4);  // W, N, E, S
  w.arm_goals.assign(4, std::nullopt);
  for (std::size_t arm = 0; arm < 4; ++arm) {
    if (arm == missing) continue;
    switch (arm) {
      case 0:
        fill_rect(labels, spec, cr - 1, 0, cr + 2, cc + 2, kFree);
        w.arm_goals[arm] = Cell{static_cast<int>(cr), 0};
        break;
      case 1:
        fill_rect(labels, spec, 0, cc - 1, cr + 2, cc + 2, kFree);
        w.arm_goals[arm] = Cell{0, static_cast<int>(cc)};
        break;
      case 2:
        fill_rect(labels, spec, cr - 1, cc - 1, cr + 2, cols, kFree);
        w.arm_goals[arm] = Cell{static_cast<int>(cr), static_cast<int>(cols - 1)};
        break;
      default:
        fill_rect(labels, spec, cr - 1, cc - 1, rows, cc + 2, kFree);
        w.arm_goals[arm] = Cell{static_cast<int>(rows - 1), static_cast<int>(cc)};
        break;
    }
  }
  for (const auto& g : w.arm_goals) {
    if (g) w.goal_cells.push_back(*g);
  }
}

void layout_obstacle_field(std::vector<int>& labels, const GridSpec& spec, Rng& rng, double target,
                           SyntheticWorld& w) {
  std::fill(labels.begin(), labels.end(), static_cast<int>(kFree));
  const int rows = static_cast<int>(spec.rows);
  const int cols = static_cast<int>(spec.cols);
  w.goal_cells = {{rows / 2, 0}, {rows / 2, cols - 1}, {0, cols / 2}, {rows - 1, cols / 2}};
  const std::size_t max_side = std::max<std::size_t>(3, std::min(spec.rows, spec.cols) / 6);
  const std::size_t n = spec.cell_count();
  std::size_t obstacles = 0;
  for (std::size_t attempt = 0; attempt < 50 * n && static_cast<double>(obstacles) < target * n; ++attempt) {
    const long r = static_cast<long>(rng.index(spec.rows));
    const long c = static_cast<long>(rng.index(spec.cols));
    const long h = 2 + static_cast<long>(rng.index(max_side - 1));
    const long wd = 2 + static_cast<long>(rng.index(max_side - 1));
    fill_rect(labels, spec, r, c, r + h, c + wd, kObstacle);
    // Keep a free pocket around every goal.
    for (const Cell& g : w.goal_cells) {
      fill_rect(labels, spec, g.row - 1, g.col - 1, g.row + 2, g.col + 2, kFree);
    }
    obstacles = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), static_cast<int>(kObstacle)));
  }
  // Connect every goal to the first one, then close off unreachable pockets.
  for (std::size_t gi = 1; gi < w.goal_cells.size(); ++gi) {
    const auto seen = reachable(labels, spec, w.goal_cells[0]);
    if (seen[index_of(w.goal_cells[gi], spec)]) continue;
    for (const Cell& c : bresenham(w.goal_cells[gi], w.goal_cells[0])) {
      if (seen[index_of(c, spec)]) break;
      labels[index_of(c, spec)] = kFree;
    }
  }
  const auto seen = reachable(labels, spec, w.goal_cells[0]);
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) labels[i] = kObstacle;
  }
}

}  // namespace

SyntheticWorld synth_scene(std::uint64_t seed, SceneKind kind, const SynthOptions& options) {
  GridSpec spec;
  spec.rows = options.rows;
  spec.cols = options.cols;
  spec.cell_size = options.cell_size;
  spec.validate();
  if (options.pixels_per_cell < 1) throw InvalidInput("pixels_per_cell must be >= 1");
  if (!(options.eps > 0.0) || !(options.r_max > options.eps)) {
    throw InvalidInput("synthetic rewards need 0 < eps < r_max");
  }

  Rng layout_rng(seed, 1);
  Rng paint_rng(seed, 2);
  SyntheticWorld w;
  w.kind = kind;
  std::vector<int> labels(spec.cell_count(), kFree);
  switch (kind) {
    case SceneKind::Corridor: layout_corridor(labels, spec, layout_rng, w); break;
    case SceneKind::Junction: layout_junction(labels, spec, layout_rng, options.junction_arms, w); break;
    case SceneKind::ObstacleField:
      layout_obstacle_field(labels, spec, layout_rng, options.obstacle_fraction, w);
      break;
  }
  for (const Cell& g : w.goal_cells) labels[index_of(g, spec)] = kGoal;

  w.true_reward.resize(spec.cell_count());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    w.true_reward[i] = labels[i] == kObstacle ? -options.r_max : -options.eps;
  }
  w.scene = build_grid(paint_raster(labels, spec, options.pixels_per_cell, paint_rng), spec);
  w.scene.semantic_labels = std::move(labels);
  return w;
}

DemoSampler::DemoSampler(const SyntheticWorld& world) : world_(world) {}

std::optional<std::vector<Cell>> DemoSampler::sample(Cell start, Cell goal, Rng& rng) {
  const GridSpec& spec = world_.scene.spec;
  auto it = policies_.find(goal);
  if (it == policies_.end()) {
    it = policies_.emplace(goal, soft_value_iteration(spec, world_.true_reward, goal)).first;
  }
  const PolicySolution& pol = it->second;
  const std::size_t cap = default_rollout_cap(spec);
  std::vector<Cell> path{start};
  Cell cur = start;
  for (std::size_t step = 0; step < cap && cur != goal; ++step) {
    const ActionProbs& p = pol.policy[index_of(cur, spec)];
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t a = kActionCount - 1;
    for (std::size_t k = 0; k < kActionCount; ++k) {
      acc += p[k];
      if (u < acc) {
        a = k;
        break;
      }
    }
    cur = transition(cur, kActions[a], spec);
    path.push_back(cur);
  }
  if (cur != goal) return std::nullopt;
  return path;
}

std::vector<std::vector<Cell>> synth_demos(const SyntheticWorld& world, std::size_t n,
                                           std::uint64_t seed) {
  if (world.goal_cells.empty()) throw InvalidInput("synthetic world has no goal cells");
  const GridSpec& spec = world.scene.spec;
  std::vector<Cell> free;
  for (std::size_t i = 0; i < spec.cell_count(); ++i) {
    if (world.scene.semantic_labels.empty() || world.scene.semantic_labels[i] != kObstacle) {
      free.push_back(cell_at(i, spec));
    }
  }
  if (free.empty()) throw InvalidInput("synthetic world has no free start cells");

  DemoSampler sampler(world);
  std::vector<std::vector<Cell>> demos;
  demos.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, i);
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > 10000) throw InvalidInput("demonstrations repeatedly failed to reach a goal");
      const Cell start = free[rng.index(free.size())];
      const Cell goal = world.goal_cells[rng.index(world.goal_cells.size())];
      if (auto demo = sampler.sample(start, goal, rng)) {
        demos.push_back(std::move(*demo));
        break;
      }
    }
  }
  return demos;
}

Polyline cell_centers(const std::vector<Cell>& cells, const GridSpec& spec) {
  Polyline out;
  out.reserve(cells.size());
  for (const Cell& c : cells) out.push_back(cell_to_world(c, spec));
  return out;
}

Track demo_to_track(const std::vector<Cell>& demo, const GridSpec& spec, const std::string& scene_id,
                    const std::string& agent_id, long frames_per_step) {
  Track t{scene_id, agent_id, {}};
  t.samples.reserve(demo.size());
  for (std::size_t i = 0; i < demo.size(); ++i) {
    const Point p = cell_to_world(demo[i], spec);
    t.samples.push_back({static_cast<long>(i) * frames_per_step, p.x, p.y});
  }
  return t;
}

std::vector<TrajectoryInstance> synth_turning_instances(const SyntheticWorld& world,
                                                        const std::string& scene_id, std::size_t n,
                                                        std::size_t t_obs, std::size_t t_pred,
                                                        std::uint64_t seed) {
  if (world.kind != SceneKind::Junction || world.arm_goals.size() != 4) {
    throw InvalidInput("turning instances need a junction world");
  }
  std::vector<std::size_t> arms;
  for (std::size_t a = 0; a < 4; ++a) {
    if (world.arm_goals[a]) arms.push_back(a);
  }
  const GridSpec& spec = world.scene.spec;
  const std::size_t len = t_obs + t_pred;
  DemoSampler sampler(world);
  std::vector<TrajectoryInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, i);
    bool done = false;
    for (std::size_t attempt = 0; attempt < 1000 && !done; ++attempt) {
      const std::size_t k = rng.index(arms.size());
      const std::size_t from = arms[k];
      const std::size_t to = arms[(k + 1) % arms.size()];
      const Cell end = *world.arm_goals[from];
      // Start a few cells inside the entry arm, anywhere across its width.
      const int depth = 1 + static_cast<int>(rng.index(3));
      const int lateral = static_cast<int>(rng.index(3)) - 1;
      Cell start = end;
      switch (from) {
        case 0: start = {end.row + lateral, end.col + depth}; break;
        case 1: start = {end.row + depth, end.col + lateral}; break;
        case 2: start = {end.row + lateral, end.col - depth}; break;
        default: start = {end.row - depth, end.col + lateral}; break;
      }
      if (!in_bounds(start, spec) || world.scene.semantic_labels[index_of(start, spec)] == kObstacle) {
        continue;
      }
      auto demo = sampler.sample(start, *world.arm_goals[to], rng);
      if (!demo || demo->size() < len) continue;
      const Polyline pts = cell_centers(*demo, spec);
      TrajectoryInstance inst;
      inst.scene_ref = scene_id;
      inst.agent_id = "turn" + std::to_string(i);
      inst.t0_frame = static_cast<long>(pts.size() - len);
      inst.past.assign(pts.end() - static_cast<std::ptrdiff_t>(len),
                       pts.end() - static_cast<std::ptrdiff_t>(t_pred));
      inst.future.assign(pts.end() - static_cast<std::ptrdiff_t>(t_pred), pts.end());
      out.push_back(std::move(inst));
      done = true;
    }
    if (!done) throw InvalidInput("junction arms are too short for the requested window");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset directories

const std::vector<std::string>& DatasetSplit::get(std::string_view name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw InvalidInput("unknown split '" + std::string(name) + "'");
}

json DatasetSplit::to_json() const { return {{"train", train}, {"val", val}, {"test", test}}; }

DatasetSplit DatasetSplit::from_json(const json& j) {
  DatasetSplit s;
  s.train = j.value("train", std::vector<std::string>{});
  s.val = j.value("val", std::vector<std::string>{});
  s.test = j.value("test", std::vector<std::string>{});
  return s;
}

Dataset load_dataset(const std::filesystem::path& root) {
  Dataset d;
  d.root = root;
  const auto manifest_path = root / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) throw IoError("no dataset manifest at " + manifest_path.string());
  json manifest;
  json split;
  try {
    manifest = json::parse(read_file(manifest_path));
    split = json::parse(read_file(root / "split.json"));
  } catch (const json::parse_error& e) {
    throw IoError(std::string("malformed dataset metadata: ") + e.what());
  }
  d.split = DatasetSplit::from_json(split);
  for (const auto& id : manifest.value("scenes", std::vector<std::string>{})) {
    const auto dir = root / "scenes" / id;
    SceneSidecar side;
    d.scenes.emplace(id, load_scene(dir / "scene.json", &side));
    d.sidecars.emplace(id, side);
    if (std::filesystem::exists(dir / "tracks.csv")) {
      for (Track& t : load_tracks(dir / "tracks.csv")) {
        if (t.scene_id != id) throw IoError("track in " + dir.string() + " names scene " + t.scene_id);
        d.tracks.push_back(std::move(t));
      }
    }
  }
  return d;
}

std::vector<TrajectoryInstance> dataset_instances(const Dataset& data,
                                                  const std::vector<std::string>& scene_ids,
                                                  double rate_hz, std::size_t t_obs,
                                                  std::size_t t_pred, std::size_t stride) {
  std::vector<TrajectoryInstance> out;
  for (const std::string& id : scene_ids) {
    auto side = data.sidecars.find(id);
    if (side == data.sidecars.end()) throw InvalidInput("split names unknown scene " + id);
    for (const Track& t : data.tracks) {
      if (t.scene_id != id) continue;
      auto w = window_instances(t, side->second.fps, rate_hz, t_obs, t_pred, stride);
      out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
  }
  return out;
}

}  // namespace forecast
