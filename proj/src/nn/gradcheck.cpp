#include "forecast/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forecast/errors.hpp"
#include "forecast/rng.hpp"

namespace forecast::nn {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

FiniteDiffReport finite_diff_check(const ScalarObjective& f, ParamSet& params,
                                   const FiniteDiffOptions& options) {
  if (!(options.step > 0.0) || !std::isfinite(options.step)) {
    throw InvalidInput("finite-difference step must be positive");
  }
  params.zero_grad();
  f(params, true);
  std::map<std::string, Tensor> analytic;
  for (const auto& [name, e] : params.entries()) analytic.emplace(name, e.grad);
  params.zero_grad();

  Rng rng(options.seed);
  FiniteDiffReport report;
  for (auto& [name, e] : params.entries()) {
    std::vector<std::size_t> coords(e.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_tensor > 0 && coords.size() > options.max_coords_per_tensor) {
      // Partial Fisher-Yates: the first k entries become a uniform sample.
      for (std::size_t i = 0; i < options.max_coords_per_tensor; ++i) {
        std::swap(coords[i], coords[i + rng.index(coords.size() - i)]);
      }
      coords.resize(options.max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    const Tensor& grad = analytic.at(name);
    for (std::size_t idx : coords) {
      const double saved = e.value[idx];
      e.value[idx] = saved + options.step;
      const double plus = f(params, false);
      e.value[idx] = saved - options.step;
      const double minus = f(params, false);
      e.value[idx] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double err = relative_error(grad[idx], numeric);
      ++report.coordinates_checked;
      if (err > options.tolerance) {
        ++report.above_tolerance;
        report.largest_failing_gradient =
            std::max({report.largest_failing_gradient, std::abs(grad[idx]), std::abs(numeric)});
      }
      if (report.coordinates_checked == 1 || err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_param = name;
        report.worst_index = idx;
        report.worst_analytic = grad[idx];
        report.worst_numeric = numeric;
      }
    }
  }
  params.zero_grad();
  return report;
}

}  // namespace forecast::nn
