#include <cmath>

#include "doctest.h"
#include "forecast/errors.hpp"
#include "forecast/metrics.hpp"
#include "oracles.hpp"

using namespace forecast;

namespace {

Polyline constant(Point p, std::size_t n) { return Polyline(n, p); }

Polyline random_traj(Rng& rng, std::size_t n) { return oracle::random_walk(rng, n, {rng.uniform(-9, 9), 0}, 1.0); }

}  // namespace

TEST_CASE("hand-evaluated displacement errors") {
  const Polyline truth = constant({0, 0}, 12);
  const std::vector<Polyline> cands{constant({3, 4}, 12), constant({0, 1}, 12)};
  CHECK(ade(truth, cands[0]) == 5.0);
  CHECK(ade(truth, cands[1]) == 1.0);
  CHECK(made(truth, cands) == 1.0);
  CHECK(mfde(truth, cands) == 1.0);
  CHECK(min_ade(truth, cands).k == 1);
  CHECK(made(truth, {cands[0]}) == 5.0);
  CHECK(made(truth, {cands[0], truth}) == 0.0);
  CHECK(mfde(truth, {cands[0], truth}) == 0.0);

  Polyline end_only = constant({7, 7}, 12);
  end_only.back() = {0, 0};
  CHECK(mfde(truth, {end_only}) == 0.0);
  CHECK(made(truth, {end_only}) > 0.0);

  CHECK_THROWS_AS(made(truth, {constant({0, 0}, 11)}), InvalidInput);
  CHECK_THROWS_AS(made(truth, {}), InvalidInput);
}

TEST_CASE("min contract and translation invariance on random sets") {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const Polyline truth = random_traj(rng, 12);
    std::vector<Polyline> cands;
    const std::size_t k = 1 + rng.index(20);
    for (std::size_t i = 0; i < k; ++i) cands.push_back(random_traj(rng, 12));
    const BestOf a = min_ade(truth, cands), f = min_fde(truth, cands);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(a.value <= oracle::ade(truth, cands[i]));
      CHECK(f.value <= oracle::fde(truth, cands[i]));
    }
    CHECK(a.value == doctest::Approx(oracle::ade(truth, cands[a.k])).epsilon(1e-14));
    CHECK(f.value == doctest::Approx(oracle::fde(truth, cands[f.k])).epsilon(1e-14));
    const Point s{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    Polyline truth2;
    for (const Point& p : truth) truth2.push_back(p + s);
    std::vector<Polyline> cands2 = cands;
    for (auto& c : cands2)
      for (auto& p : c) p = p + s;
    CHECK(made(truth2, cands2) == doctest::Approx(a.value).epsilon(1e-10));
    CHECK(mfde(truth2, cands2) == doctest::Approx(f.value).epsilon(1e-10));
  }
}

TEST_CASE("constant-velocity baseline") {
  const Polyline east{{0, 0}, {2, 0}, {4, 0}, {6, 0}};
  const Polyline out = constant_velocity_baseline(east, 5);
  REQUIRE(out.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out[i] == Point{6.0 + 2.0 * (i + 1), 0});
  for (const Point& p : constant_velocity_baseline(constant({3, 3}, 8), 12)) CHECK(p == Point{3, 3});
  // Mean of the last two steps: (4,0) -> (5,1) -> (7,1) gives (1.5, 0.5).
  const Polyline bend{{4, 0}, {5, 1}, {7, 1}};
  CHECK(constant_velocity_baseline(bend, 1)[0] == Point{8.5, 1.5});
  CHECK(constant_velocity_baseline(Polyline{{0, 0}, {1, 2}}, 2)[1] == Point{3, 6});
  CHECK_THROWS_AS(constant_velocity_baseline(Polyline{{0, 0}}, 3), InvalidInput);

  Polyline straight, curved;
  for (int i = 1; i <= 12; ++i) {
    straight.push_back({6.0 + 2.0 * i, 0});
    const double a = 0.2 * i;
    curved.push_back({6.0 + 10.0 * std::sin(a), 10.0 * (1 - std::cos(a))});
  }
  const Polyline cv = constant_velocity_baseline(east, 12);
  CHECK(fde(curved, cv) > fde(straight, cv));
}

TEST_CASE("evaluate aggregates per instance") {
  std::vector<TrajectoryInstance> test(3);
  for (std::size_t i = 0; i < 3; ++i) {
    test[i].scene_ref = "s";
    test[i].agent_id = std::to_string(i);
    test[i].past = {{0, 0}, {1, 0}, {2, 0}};
    for (int t = 1; t <= 4; ++t) test[i].future.push_back({2.0 + t, static_cast<double>(i)});
  }
  auto predictor = [](const TrajectoryInstance& inst) {
    std::vector<Polyline> c;
    c.push_back(Polyline(4, Point{0, 0}));
    if (inst.agent_id != "2") c.push_back(inst.future);
    return c;
  };
  const EvalReport r = evaluate(test, predictor, 2);
  CHECK(r.k == 2);
  CHECK(r.short_instances == 1);
  REQUIRE(r.instances.size() == 3);
  CHECK(r.instances[0].ade_best == 0.0);
  CHECK(r.instances[0].k_ade == 1);
  CHECK(r.instances[2].candidates == 1);
  const double ade2 = oracle::ade(test[2].future, Polyline(4, Point{0, 0}));
  CHECK(r.made == doctest::Approx(ade2 / 3));
  CHECK(r.baseline_made == doctest::Approx((0.0 + 1.0 + 2.0) / 3));
  CHECK(r.to_csv().rfind("instance_id,ade_best,fde_best,k_ade,k_fde\ns/0/0,0,0,1,1\n", 0) == 0);
  const auto j = r.to_json();
  CHECK(j["K"] == 2);
  CHECK(j["instances"].size() == 3);

  const EvalReport one = evaluate({test[0]}, [&](const TrajectoryInstance& i) { return std::vector<Polyline>{i.future}; }, 20);
  CHECK(one.made == 0.0);
  CHECK(one.mfde == 0.0);
  CHECK_THROWS_AS(evaluate({}, predictor, 2), InvalidInput);
  CHECK_THROWS_AS(evaluate(test, predictor, 0), InvalidInput);
}
