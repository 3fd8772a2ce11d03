#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "postcn/tensor.hpp"

namespace postcn::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter first/second moment estimates plus the shared step counter.
struct OptimizerState {
  AdamConfig config;
  std::int64_t step = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments;
};

OptimizerState make_optimizer_state(const ParamStore& params, const AdamConfig& config);

// One Adam update from the gradients currently stored in the params.
// Throws on a missing gradient buffer; deterministic.
void optimizer_step(ParamStore& params, OptimizerState& state);

}  // namespace postcn::nn
