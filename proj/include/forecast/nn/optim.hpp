#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "forecast/nn/tensor.hpp"

namespace forecast::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::size_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

OptimizerState make_adam_state(const ParamSet& params, const AdamConfig& config);

// One bias-corrected Adam step over every parameter; gradients are zeroed
// afterwards.
void adam_update(ParamSet& params, OptimizerState& state);

}  // namespace forecast::nn
