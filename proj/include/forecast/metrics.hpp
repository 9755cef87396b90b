#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "forecast/dataset.hpp"
#include "forecast/geometry.hpp"
#include "json.hpp"

namespace forecast {

double ade(std::span<const Point> truth, std::span<const Point> candidate);
double fde(std::span<const Point> truth, std::span<const Point> candidate);

struct BestOf {
  double value = 0.0;
  std::size_t k = 0;  // index of the first candidate reaching the minimum
};

BestOf min_ade(std::span<const Point> truth, const std::vector<Polyline>& candidates);
BestOf min_fde(std::span<const Point> truth, const std::vector<Polyline>& candidates);

inline double made(std::span<const Point> truth, const std::vector<Polyline>& candidates) {
  return min_ade(truth, candidates).value;
}
inline double mfde(std::span<const Point> truth, const std::vector<Polyline>& candidates) {
  return min_fde(truth, candidates).value;
}

// Continues the mean velocity of the last two observed steps.
Polyline constant_velocity_baseline(std::span<const Point> past, std::size_t t_pred);

struct InstanceRecord {
  std::string instance_id;
  double ade_best = 0.0;
  double fde_best = 0.0;
  std::size_t k_ade = 0;
  std::size_t k_fde = 0;
  std::size_t candidates = 0;
  double baseline_ade = 0.0;
  double baseline_fde = 0.0;
};

struct EvalReport {
  std::size_t k = 0;
  double made = 0.0;
  double mfde = 0.0;
  double baseline_made = 0.0;
  double baseline_mfde = 0.0;
  std::size_t short_instances = 0;  // fewer than k candidates returned
  std::vector<InstanceRecord> instances;

  nlohmann::json to_json() const;
  // instance_id,ade_best,fde_best,k_ade,k_fde
  std::string to_csv() const;
};

using Predictor = std::function<std::vector<Polyline>(const TrajectoryInstance&)>;

EvalReport evaluate(const std::vector<TrajectoryInstance>& test, const Predictor& predictor, std::size_t k);

}  // namespace forecast
