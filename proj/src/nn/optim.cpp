#include "forecast/nn/optim.hpp"

#include <cmath>

#include "forecast/errors.hpp"

namespace forecast::nn {

OptimizerState make_adam_state(const ParamSet& params, const AdamConfig& config) {
  OptimizerState state;
  state.config = config;
  for (const auto& [name, e] : params.entries()) {
    state.first_moment.emplace(name, Tensor(e.value.shape()));
    state.second_moment.emplace(name, Tensor(e.value.shape()));
  }
  return state;
}

void adam_update(ParamSet& params, OptimizerState& state) {
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (auto& [name, e] : params.entries()) {
    auto m_it = state.first_moment.find(name);
    auto v_it = state.second_moment.find(name);
    FORECAST_EXPECT(m_it != state.first_moment.end() && v_it != state.second_moment.end(),
                    "optimizer state has no moments for " + name);
    Tensor& m = m_it->second;
    Tensor& v = v_it->second;
    FORECAST_EXPECT(m.shape() == e.value.shape(), "moment shape mismatch for " + name);
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const double g = e.grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      e.value[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    e.grad.fill(0.0);
  }
}

}  // namespace forecast::nn
