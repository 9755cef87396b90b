#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "forecast/grid_scene.hpp"

namespace forecast {

struct SoftVIOptions {
  std::size_t max_sweeps = 0;  // 0 selects 4 * (rows + cols)
  double tol = 1e-9;           // sup-norm change between sweeps
};

std::size_t default_max_sweeps(const GridSpec& spec);
std::size_t default_rollout_cap(const GridSpec& spec);

using ActionProbs = std::array<double, kActionCount>;

// Goal-conditioned soft-optimal policy on the grid MDP. Rewards are paid on
// entering the destination cell of each move; the goal is absorbing with
// value 0.
struct PolicySolution {
  GridSpec spec;
  Cell goal;
  std::vector<double> value;
  std::vector<ActionProbs> policy;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> residuals;  // per sweep; +inf while cells first become finite
};

// Jacobi soft Bellman sweeps
//   V(s) <- log sum_a exp(r(T(s,a)) + V(T(s,a)))   for s != goal
// from V = -inf (V[goal] = 0). Rewards must be finite and strictly negative.
PolicySolution soft_value_iteration(const GridSpec& spec, std::span<const double> reward, Cell goal,
                                    const SoftVIOptions& options = {});

// Probability of moving from `from` to `to` in one step, summing over
// actions that alias to the same destination at walls.
double transition_probability(const PolicySolution& policy, Cell from, Cell to);

struct SVFGrid {
  std::vector<double> visits;  // rows * cols
  std::size_t horizon = 0;
  double absorbed = 0.0;  // mass that reached the goal
};

// Sum over t = 0..horizon of the state distribution, goal excluded.
SVFGrid expected_svf(const PolicySolution& policy, Cell start, std::size_t horizon);

// Visit counts along a transition-valid path, excluding the terminal cell.
SVFGrid empirical_svf(std::span<const Cell> demo, const GridSpec& spec);

// -sum_t log P(s_t -> s_{t+1}) along the path.
double demo_nll(const PolicySolution& policy, std::span<const Cell> demo);

bool is_transition_valid(std::span<const Cell> path, const GridSpec& spec);

enum class RolloutMode { MostLikely, Sampled };

struct RolloutPath {
  std::vector<Cell> cells;  // consecutive duplicates collapsed
  bool truncated = false;
};

std::vector<RolloutPath> rollout_paths(const PolicySolution& policy, Cell start, std::size_t n,
                                       RolloutMode mode, std::uint64_t seed,
                                       std::size_t max_len = 0);

// Cells visited by the polyline: each point mapped with world_to_cell and
// consecutive cells joined by Bresenham steps. A repeated cell is kept as a
// STAY step.
std::vector<Cell> rasterize_polyline(std::span<const Point> points, const GridSpec& spec);

// Bresenham line from a to b inclusive (8-connected).
std::vector<Cell> bresenham(Cell a, Cell b);

}  // namespace forecast
