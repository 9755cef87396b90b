#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "forecast/nn/tensor.hpp"

namespace forecast::nn {

// Evaluates a scalar objective of `params`. When `accumulate_grad` is true
// the objective must also add its analytic gradient into params' grads.
using ScalarObjective = std::function<double(ParamSet& params, bool accumulate_grad)>;

struct FiniteDiffOptions {
  double step = 1e-5;
  // 0 checks every coordinate; otherwise at most this many randomly chosen
  // coordinates per parameter tensor.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
  // Coordinates above this relative error are counted in the report.
  double tolerance = 1e-4;
};

struct FiniteDiffReport {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
  std::size_t above_tolerance = 0;
  // Largest max(|analytic|, |numeric|) among coordinates above tolerance.
  double largest_failing_gradient = 0.0;
};

// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double analytic, double numeric);

// Central differences per coordinate against the analytic gradient.
// Throws InvalidInput for a non-positive or non-finite step.
FiniteDiffReport finite_diff_check(const ScalarObjective& f, ParamSet& params,
                                   const FiniteDiffOptions& options = {});

}  // namespace forecast::nn
