#include "postcn/optimizer.hpp"

#include <cmath>

namespace postcn::nn {

OptimizerState make_optimizer_state(const ParamStore& params, const AdamConfig& config) {
  OptimizerState state;
  state.config = config;
  for (const auto& [name, t] : params.params) {
    state.moments.emplace(name, std::make_pair(std::vector<double>(t.values.size(), 0.0),
                                               std::vector<double>(t.values.size(), 0.0)));
  }
  return state;
}

void optimizer_step(ParamStore& params, OptimizerState& state) {
  state.step += 1;
  const auto& c = state.config;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  for (auto& [name, t] : params.params) {
    if (t.grad.size() != t.values.size()) {
      throw NnError("optimizer_step: missing gradient for \"" + name + "\"");
    }
    auto it = state.moments.find(name);
    if (it == state.moments.end()) {
      throw NnError("optimizer_step: no moment state for \"" + name + "\"");
    }
    auto& [m, v] = it->second;
    for (size_t i = 0; i < t.values.size(); ++i) {
      const double g = t.grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      t.values[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace postcn::nn
