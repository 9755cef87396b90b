#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "forecast/errors.hpp"
#include "oracles.hpp"

using namespace forecast;

namespace {

PolicySolution constant_policy(const GridSpec& spec, Cell goal, Action a) {
  PolicySolution p;
  p.spec = spec;
  p.goal = goal;
  p.value.assign(spec.cell_count(), 0.0);
  ActionProbs probs{};
  probs[static_cast<std::size_t>(a)] = 1.0;
  p.policy.assign(spec.cell_count(), probs);
  p.converged = true;
  return p;
}

double logsumexp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

TEST_CASE("single backup next to the goal") {
  // Off-grid moves stay put, so exactly one action enters the goal and the
  // first sweep gives r + log(1).
  const GridSpec spec{1, 2, 1.0, {}};
  const std::vector<double> r(2, -1.0);
  const PolicySolution one = soft_value_iteration(spec, r, {0, 1}, {1, 0.0});
  CHECK(one.value[0] == doctest::Approx(-1.0));
  CHECK(one.iterations == 1);
  // With k actions entering the goal the backup is r + ln k; nine copies give -1 + ln 9.
  CHECK(logsumexp(std::vector<double>(9, -1.0)) == doctest::Approx(-1.0 + std::log(9.0)));
}

TEST_CASE("converged values satisfy the soft Bellman equation") {
  SynthOptions o;
  o.rows = 10;
  o.cols = 12;
  const SyntheticWorld w = synth_scene(2, SceneKind::ObstacleField, o);
  const GridSpec& spec = w.scene.spec;
  const Cell goal = w.goal_cells[1];
  const PolicySolution sol = soft_value_iteration(spec, w.true_reward, goal);
  REQUIRE(sol.converged);
  CHECK(sol.value[index_of(goal, spec)] == 0.0);
  for (std::size_t s = 0; s < spec.cell_count(); ++s) {
    const Cell c = cell_at(s, spec);
    double sum = 0.0;
    for (double p : sol.policy[s]) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    if (c == goal) {
      CHECK(sol.policy[s][static_cast<std::size_t>(Action::Stay)] == 1.0);
      continue;
    }
    std::vector<double> q;
    for (int a = 0; a < 9; ++a) {
      const Cell n = oracle::step(c, a, static_cast<int>(spec.rows), static_cast<int>(spec.cols));
      q.push_back(w.true_reward[index_of(n, spec)] + sol.value[index_of(n, spec)]);
    }
    CHECK(sol.value[s] == doctest::Approx(logsumexp(q)).epsilon(1e-9));
  }
  // Residuals never grow once every cell is finite.
  for (std::size_t i = 1; i < sol.residuals.size(); ++i) {
    if (std::isfinite(sol.residuals[i - 1])) CHECK(sol.residuals[i] <= sol.residuals[i - 1] * (1 + 1e-12));
  }
}

TEST_CASE("1x4 corridor against path enumeration") {
  const GridSpec spec{1, 4, 1.0, {}};
  const std::vector<double> r(4, -1.0);
  const PolicySolution sol = soft_value_iteration(spec, r, {0, 3}, {40, 0.0});
  const auto expect = oracle::corridor_path_sums(4, 3, -1.0, 40);
  for (std::size_t i = 0; i < 4; ++i) CHECK(sol.value[i] == doctest::Approx(expect[i]).epsilon(1e-9));
  const auto counted = oracle::corridor_path_sums(4, 3, -1.0, 7);
  const auto brute = oracle::brute_force_path_sums(4, 3, -1.0, 7);
  for (std::size_t i = 0; i < 4; ++i) CHECK(counted[i] == doctest::Approx(brute[i]).epsilon(1e-12));

  // r = -1 does not converge (eight actions alias to STAY), so the rollout
  // uses a contracting step cost.
  const PolicySolution conv = soft_value_iteration(spec, std::vector<double>(4, -6.0), {0, 3});
  REQUIRE(conv.converged);
  const auto exact = oracle::corridor_path_sums(4, 3, -6.0, 200);
  for (std::size_t i = 0; i < 4; ++i) CHECK(conv.value[i] == doctest::Approx(exact[i]).epsilon(1e-8));
  const auto paths = rollout_paths(conv, {0, 0}, 1, RolloutMode::MostLikely, 0);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].cells == std::vector<Cell>{{0, 0}, {0, 1}, {0, 2}, {0, 3}});
  CHECK_FALSE(paths[0].truncated);
  CHECK(rollout_paths(conv, {0, 3}, 1, RolloutMode::MostLikely, 0)[0].cells.size() == 1);
}

TEST_CASE("soft VI preconditions") {
  const GridSpec spec{3, 3, 1.0, {}};
  std::vector<double> r(9, -1.0);
  CHECK_THROWS_AS(soft_value_iteration(spec, r, {3, 0}), ContractViolation);
  r[4] = 0.0;
  CHECK_THROWS_AS(soft_value_iteration(spec, r, {0, 0}), ContractViolation);
  r[4] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(soft_value_iteration(spec, r, {0, 0}), ContractViolation);
  CHECK_THROWS_AS(soft_value_iteration(spec, std::vector<double>(8, -1.0), {0, 0}), ContractViolation);
}

TEST_CASE("expected SVF") {
  const GridSpec spec{4, 4, 1.0, {}};
  const PolicySolution east = constant_policy(spec, {3, 3}, Action::E);
  const SVFGrid one = expected_svf(east, {1, 0}, 1);
  CHECK(one.visits[index_of({1, 0}, spec)] == 1.0);
  CHECK(one.visits[index_of({1, 1}, spec)] == 1.0);
  CHECK(std::accumulate(one.visits.begin(), one.visits.end(), 0.0) == 2.0);

  const SVFGrid at_goal = expected_svf(east, {3, 3}, 10);
  CHECK(std::accumulate(at_goal.visits.begin(), at_goal.visits.end(), 0.0) == 0.0);
  CHECK(at_goal.absorbed == 1.0);
  CHECK_THROWS_AS(expected_svf(east, {0, 0}, 0), InvalidInput);

  SynthOptions o;
  o.rows = 8;
  o.cols = 8;
  const SyntheticWorld w = synth_scene(4, SceneKind::ObstacleField, o);
  const PolicySolution pol = soft_value_iteration(w.scene.spec, w.true_reward, w.goal_cells[0]);
  const SVFGrid dp = expected_svf(pol, {4, 4}, 64);
  const auto mc = oracle::monte_carlo_svf(pol, {4, 4}, 64, 40000, 3);
  double dev = 0.0;
  for (std::size_t i = 0; i < mc.size(); ++i) dev += std::abs(mc[i] - dp.visits[i]);
  CHECK(dev < 0.1);
}

TEST_CASE("empirical SVF and demo likelihood") {
  const GridSpec spec{5, 5, 1.0, {}};
  const std::vector<Cell> straight{{0, 0}, {0, 1}, {1, 2}, {1, 3}, {2, 4}};
  const SVFGrid e = empirical_svf(straight, spec);
  CHECK(std::accumulate(e.visits.begin(), e.visits.end(), 0.0) == 4.0);
  for (std::size_t i = 0; i + 1 < straight.size(); ++i) CHECK(e.visits[index_of(straight[i], spec)] == 1.0);
  CHECK(e.visits[index_of({2, 4}, spec)] == 0.0);

  const std::vector<Cell> revisit{{0, 0}, {0, 1}, {0, 0}, {1, 1}};
  CHECK(empirical_svf(revisit, spec).visits[0] == 2.0);
  const std::vector<Cell> single{{2, 2}};
  const SVFGrid z = empirical_svf(single, spec);
  CHECK(std::accumulate(z.visits.begin(), z.visits.end(), 0.0) == 0.0);
  const std::vector<Cell> jump{{0, 0}, {0, 2}};
  CHECK_THROWS_AS(empirical_svf(jump, spec), ContractViolation);
  CHECK_FALSE(is_transition_valid(jump, spec));

  const std::vector<double> r(25, -7.0);
  const PolicySolution pol = soft_value_iteration(spec, r, {2, 4});
  CHECK(demo_nll(pol, straight) ==
        doctest::Approx(oracle::demo_nll_from_values(spec, r, pol.value, straight)).epsilon(1e-12));
  // At the top wall N, NE and NW all alias to STAY.
  const PolicySolution east = constant_policy(spec, {4, 4}, Action::N);
  CHECK(transition_probability(east, {0, 0}, {0, 0}) == 1.0);
}

TEST_CASE("sampled rollouts are reproducible and end at the goal") {
  SynthOptions o;
  o.rows = 16;
  o.cols = 16;
  const SyntheticWorld w = synth_scene(8, SceneKind::ObstacleField, o);
  const PolicySolution pol = soft_value_iteration(w.scene.spec, w.true_reward, w.goal_cells[2]);
  const auto a = rollout_paths(pol, w.goal_cells[0], 20, RolloutMode::Sampled, 5);
  const auto b = rollout_paths(pol, w.goal_cells[0], 20, RolloutMode::Sampled, 5);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].cells == b[i].cells);
    CHECK(a[i].cells.back() == w.goal_cells[2]);
    CHECK(is_transition_valid(a[i].cells, w.scene.spec));
    for (std::size_t j = 1; j < a[i].cells.size(); ++j) CHECK(a[i].cells[j] != a[i].cells[j - 1]);
  }
  const auto cut = rollout_paths(pol, w.goal_cells[0], 1, RolloutMode::MostLikely, 0, 3);
  CHECK(cut[0].truncated);
  CHECK(cut[0].cells.size() <= 4);
}

TEST_CASE("rasterization") {
  CHECK(bresenham({0, 0}, {2, 5}) == std::vector<Cell>{{0, 0}, {0, 1}, {1, 2}, {1, 3}, {2, 4}, {2, 5}});
  CHECK(bresenham({3, 3}, {3, 3}) == std::vector<Cell>{{3, 3}});
  const GridSpec spec{8, 8, 2.0, {}};
  const Polyline pts{{1, 1}, {1, 1}, {7, 1}};
  const auto cells = rasterize_polyline(pts, spec);
  CHECK(cells == std::vector<Cell>{{0, 0}, {0, 0}, {0, 1}, {0, 2}, {0, 3}});
  CHECK(is_transition_valid(cells, spec));
}
