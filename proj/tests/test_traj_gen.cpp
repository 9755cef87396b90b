#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "forecast/errors.hpp"
#include "oracles.hpp"

using namespace forecast;
using nn::Vec;

namespace {

TrajSample walk_sample(Rng& rng, std::size_t id) {
  TrajSample s;
  s.id = std::to_string(id);
  const Polyline all = oracle::random_walk(rng, 20, {rng.uniform(10, 50), rng.uniform(10, 50)}, rng.uniform(0.8, 2.0));
  s.past.assign(all.begin(), all.begin() + 8);
  s.future.assign(all.begin() + 8, all.end());
  for (std::size_t i = 0; i < s.future.size(); i += 3) s.waypoints.push_back(s.future[i]);
  s.waypoints.push_back(s.future.back());
  s.scale = 64.0;
  return s;
}

}  // namespace

TEST_CASE("zero generator stays at the last observed point") {
  const TrajGenerator zero;
  Rng rng(1);
  const Polyline past = oracle::random_walk(rng, 8, {5, 5}, 1.0);
  const Polyline wps{{9, 9}, {12, 9}};
  for (double v : encode_past(zero, past, 10.0)) CHECK(v == 0.0);
  for (const Vec& k : encode_waypoints(zero, normalize_points(wps, past.back(), 10.0)))
    for (double v : k) CHECK(v == 0.0);
  const Polyline out = generate_trajectory(zero, past, wps, 12, 10.0);
  REQUIRE(out.size() == 12);
  for (const Point& p : out) CHECK(p == past.back());

  const TrajGenerator random(3);
  const Polyline still(8, Point{2, 2});
  const Vec h = encode_past(random, still, 10.0);
  CHECK(h.size() == TrajGenerator::kDecoderHidden);
}

TEST_CASE("single key receives all attention") {
  const TrajGenerator gen(4);
  Rng rng(2);
  const Polyline past = oracle::random_walk(rng, 8, {5, 5}, 1.0);
  const Polyline one{{8, 8}};
  const auto keys = encode_waypoints(gen, normalize_points(one, past.back(), 10.0));
  REQUIRE(keys.size() == 1);
  CHECK(keys[0].size() == TrajGenerator::kKey);
  DecodeTrace trace;
  generate_trajectory(gen, past, one, 12, 10.0, &trace);
  REQUIRE(trace.attention.size() == 12);
  for (const Vec& w : trace.attention) CHECK(w == Vec{1.0});

  const Polyline three{{8, 8}, {9, 9}, {10, 12}};
  generate_trajectory(gen, past, three, 6, 10.0, &trace);
  for (const Vec& w : trace.attention) {
    double s = 0;
    for (double x : w) s += x;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("reversing waypoints swaps key halves") {
  const TrajGenerator gen(5);
  TrajGenerator swapped = gen;
  for (const std::string& suffix : {"Wz", "Uz", "bz", "Wr", "Ur", "br", "Wn", "Un", "bn"}) {
    std::swap(swapped.params.value("wp.fwd." + suffix), swapped.params.value("wp.bwd." + suffix));
  }
  Rng rng(3);
  std::vector<Vec> wps;
  for (int i = 0; i < 6; ++i) wps.push_back(oracle::random_vec(rng, 2));
  const std::vector<Vec> rev(wps.rbegin(), wps.rend());
  const auto a = encode_waypoints(gen, wps);
  const auto b = encode_waypoints(swapped, rev);
  const std::size_t H = TrajGenerator::kWaypointHidden, m = wps.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < H; ++j) {
      CHECK(b[m - 1 - i][j] == doctest::Approx(a[i][H + j]).epsilon(1e-14));
      CHECK(b[m - 1 - i][H + j] == doctest::Approx(a[i][j]).epsilon(1e-14));
    }
}

TEST_CASE("translation equivariance") {
  const TrajGenerator gen(6);
  Rng rng(4);
  const Polyline past = oracle::random_walk(rng, 8, {5, 5}, 1.0);
  const Polyline wps{{8, 8}, {11, 9}, {15, 9}};
  const Point shift{123.25, -40.5};
  Polyline past2, wps2;
  for (const Point& p : past) past2.push_back(p + shift);
  for (const Point& p : wps) wps2.push_back(p + shift);
  const Polyline a = generate_trajectory(gen, past, wps, 12, 20.0);
  const Polyline b = generate_trajectory(gen, past2, wps2, 12, 20.0);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(b[i].x == doctest::Approx(a[i].x + shift.x).epsilon(1e-12));
    CHECK(b[i].y == doctest::Approx(a[i].y + shift.y).epsilon(1e-12));
  }
}

TEST_CASE("loss is a mean, so duplicating samples changes nothing") {
  Rng rng(5);
  std::vector<TrajSample> base;
  for (std::size_t i = 0; i < 6; ++i) base.push_back(walk_sample(rng, i));
  std::vector<TrajSample> doubled = base;
  doubled.insert(doubled.end(), base.begin(), base.end());
  TrajGenerator a(7), b(7);
  const double la = traj_loss(a, base, true);
  const double lb = traj_loss(b, doubled, true);
  CHECK(lb == doctest::Approx(la).epsilon(1e-13));
  for (const auto& [name, e] : a.params.entries()) {
    const auto& g = b.params.grad(name);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(e.grad[i]).epsilon(1e-10));
  }
}

TEST_CASE("training is deterministic and beats the zero-displacement baseline") {
  Rng rng(6);
  std::vector<TrajSample> train, val;
  for (std::size_t i = 0; i < 48; ++i) train.push_back(walk_sample(rng, i));
  for (std::size_t i = 0; i < 16; ++i) val.push_back(walk_sample(rng, 100 + i));
  TrainHyper h;
  h.epochs = 15;
  h.learning_rate = 0.003;
  h.batch_size = 8;
  h.seed = 2;
  TrajGenerator g1(8), g2(8);
  const TrainingLog l1 = train_traj_gen(g1, train, val, h);
  const TrainingLog l2 = train_traj_gen(g2, train, val, h);
  REQUIRE(l1.epochs.size() == l2.epochs.size());
  for (std::size_t i = 0; i < l1.epochs.size(); ++i) CHECK(l1.epochs[i].train_loss == l2.epochs[i].train_loss);
  CHECK(g1.params.same_values(g2.params));

  TrajGenerator zero;
  const double baseline = traj_loss(zero, val, false);
  const double trained = traj_loss(g1, val, false);
  MESSAGE("val MSE ", trained, " zero baseline ", baseline);
  CHECK(trained < baseline);
  CHECK_THROWS_AS(train_traj_gen(g1, {}, val, h), InvalidInput);

  const auto path = std::filesystem::temp_directory_path() / "forecast_unit_traj.json";
  save_traj_gen(path, g1, {});
  CHECK(load_traj_gen(path).params.same_values(g1.params));
  std::filesystem::remove(path);
}
