#include "forecast/soft_vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "forecast/errors.hpp"
#include "forecast/rng.hpp"

namespace forecast {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kStay = static_cast<std::size_t>(Action::Stay);

// Remaining live mass below which the SVF forward pass stops early.
constexpr double kNegligibleMass = 1e-18;
}  // namespace

std::size_t default_max_sweeps(const GridSpec& spec) { return 4 * (spec.rows + spec.cols); }
std::size_t default_rollout_cap(const GridSpec& spec) { return 4 * (spec.rows + spec.cols); }

PolicySolution soft_value_iteration(const GridSpec& spec, std::span<const double> reward, Cell goal,
                                    const SoftVIOptions& options) {
  const std::size_t n = spec.cell_count();
  FORECAST_EXPECT(reward.size() == n, "reward grid size does not match the grid");
  FORECAST_EXPECT(in_bounds(goal, spec), "goal cell out of bounds");
  for (double r : reward) {
    FORECAST_EXPECT(std::isfinite(r) && r < 0.0, "rewards must be finite and strictly negative");
  }
  const TransitionTable table(spec);
  const std::size_t g = index_of(goal, spec);
  const std::size_t max_sweeps = options.max_sweeps > 0 ? options.max_sweeps : default_max_sweeps(spec);

  PolicySolution sol;
  sol.spec = spec;
  sol.goal = goal;
  sol.value.assign(n, kNegInf);
  sol.value[g] = 0.0;
  std::vector<double> next(n);
  std::array<double, kActionCount> q{};

  while (sol.iterations < max_sweeps) {
    bool newly_finite = false;
    double residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (s == g) {
        next[s] = 0.0;
        continue;
      }
      const auto succ = table.successors(s);
      double m = kNegInf;
      for (std::size_t a = 0; a < kActionCount; ++a) {
        q[a] = reward[succ[a]] + sol.value[succ[a]];
        m = std::max(m, q[a]);
      }
      double v = kNegInf;
      if (m > kNegInf) {
        double sum = 0.0;
        for (double qa : q) sum += std::exp(qa - m);
        v = m + std::log(sum);
      }
      next[s] = v;
      const double old = sol.value[s];
      if (old == kNegInf) {
        if (v > kNegInf) newly_finite = true;
      } else {
        residual = std::max(residual, std::abs(v - old));
      }
    }
    sol.value.swap(next);
    ++sol.iterations;
    const double r = newly_finite ? std::numeric_limits<double>::infinity() : residual;
    sol.residuals.push_back(r);
    if (r < options.tol) {
      sol.converged = true;
      break;
    }
  }

  sol.policy.assign(n, ActionProbs{});
  for (std::size_t s = 0; s < n; ++s) {
    ActionProbs& p = sol.policy[s];
    if (s == g) {
      p[kStay] = 1.0;
      continue;
    }
    const double vs = sol.value[s];
    if (vs == kNegInf) {
      p.fill(1.0 / kActionCount);
      continue;
    }
    const auto succ = table.successors(s);
    double sum = 0.0;
    for (std::size_t a = 0; a < kActionCount; ++a) {
      p[a] = std::exp(reward[succ[a]] + sol.value[succ[a]] - vs);
      sum += p[a];
    }
    for (double& pa : p) pa /= sum;
  }
  return sol;
}

double transition_probability(const PolicySolution& policy, Cell from, Cell to) {
  const std::size_t s = index_of(from, policy.spec);
  double p = 0.0;
  for (std::size_t a = 0; a < kActionCount; ++a) {
    if (transition(from, kActions[a], policy.spec) == to) p += policy.policy[s][a];
  }
  return p;
}

SVFGrid expected_svf(const PolicySolution& policy, Cell start, std::size_t horizon) {
  if (horizon < 1) throw InvalidInput("SVF horizon must be at least 1");
  const GridSpec& spec = policy.spec;
  FORECAST_EXPECT(in_bounds(start, spec), "SVF start cell out of bounds");
  const std::size_t n = spec.cell_count();
  const std::size_t g = index_of(policy.goal, spec);
  const TransitionTable table(spec);

  SVFGrid out;
  out.visits.assign(n, 0.0);
  out.horizon = horizon;
  std::vector<double> d(n, 0.0), next(n, 0.0);
  const std::size_t s0 = index_of(start, spec);
  if (s0 == g) {
    out.absorbed = 1.0;
    return out;
  }
  d[s0] = 1.0;
  for (std::size_t t = 0;; ++t) {
    double live = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      out.visits[s] += d[s];
      live += d[s];
    }
    if (t == horizon || live < kNegligibleMass) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double mass = d[s];
      if (mass == 0.0) continue;
      const auto succ = table.successors(s);
      const ActionProbs& p = policy.policy[s];
      for (std::size_t a = 0; a < kActionCount; ++a) next[succ[a]] += mass * p[a];
    }
    out.absorbed += next[g];
    next[g] = 0.0;
    d.swap(next);
  }
  return out;
}

bool is_transition_valid(std::span<const Cell> path, const GridSpec& spec) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!in_bounds(path[i], spec)) return false;
    if (i > 0 && !is_transition(path[i - 1], path[i])) return false;
  }
  return true;
}

SVFGrid empirical_svf(std::span<const Cell> demo, const GridSpec& spec) {
  FORECAST_EXPECT(!demo.empty(), "empty demonstration");
  FORECAST_EXPECT(is_transition_valid(demo, spec), "demonstration is not transition-valid");
  SVFGrid out;
  out.visits.assign(spec.cell_count(), 0.0);
  out.horizon = demo.size() - 1;
  for (std::size_t i = 0; i + 1 < demo.size(); ++i) out.visits[index_of(demo[i], spec)] += 1.0;
  out.absorbed = 1.0;
  return out;
}

double demo_nll(const PolicySolution& policy, std::span<const Cell> demo) {
  FORECAST_EXPECT(is_transition_valid(demo, policy.spec), "demonstration is not transition-valid");
  double nll = 0.0;
  for (std::size_t i = 0; i + 1 < demo.size(); ++i) {
    nll -= std::log(transition_probability(policy, demo[i], demo[i + 1]));
  }
  return nll;
}

std::vector<RolloutPath> rollout_paths(const PolicySolution& policy, Cell start, std::size_t n,
                                       RolloutMode mode, std::uint64_t seed, std::size_t max_len) {
  const GridSpec& spec = policy.spec;
  FORECAST_EXPECT(in_bounds(start, spec), "rollout start out of bounds");
  const std::size_t cap = max_len > 0 ? max_len : default_rollout_cap(spec);
  std::vector<RolloutPath> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, i);
    RolloutPath path;
    Cell cur = start;
    path.cells.push_back(cur);
    std::size_t steps = 0;
    while (cur != policy.goal && steps < cap) {
      const ActionProbs& p = policy.policy[index_of(cur, spec)];
      std::size_t a = 0;
      if (mode == RolloutMode::MostLikely) {
        for (std::size_t k = 1; k < kActionCount; ++k) {
          if (p[k] > p[a]) a = k;
        }
      } else {
        const double u = rng.uniform();
        double acc = 0.0;
        a = kActionCount - 1;
        for (std::size_t k = 0; k < kActionCount; ++k) {
          acc += p[k];
          if (u < acc) {
            a = k;
            break;
          }
        }
      }
      cur = transition(cur, kActions[a], spec);
      ++steps;
      if (cur != path.cells.back()) path.cells.push_back(cur);
    }
    path.truncated = cur != policy.goal;
    out.push_back(std::move(path));
  }
  return out;
}

std::vector<Cell> bresenham(Cell a, Cell b) {
  std::vector<Cell> out;
  int x0 = a.col, y0 = a.row;
  const int x1 = b.col, y1 = b.row;
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out.push_back({y0, x0});
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return out;
}

std::vector<Cell> rasterize_polyline(std::span<const Point> points, const GridSpec& spec) {
  std::vector<Cell> out;
  for (const Point& p : points) {
    const Cell c = world_to_cell(p, spec).cell;
    if (out.empty()) {
      out.push_back(c);
      continue;
    }
    if (c == out.back()) {
      out.push_back(c);
      continue;
    }
    const auto line = bresenham(out.back(), c);
    out.insert(out.end(), line.begin() + 1, line.end());
  }
  return out;
}

}  // namespace forecast
