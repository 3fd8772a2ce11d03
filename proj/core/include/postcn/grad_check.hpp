#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace postcn::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  int checked = 0;
  // Coordinates where the two one-sided difference quotients disagree are
  // treated as nondifferentiable (relu kink crossings) and reported here
  // instead of entering the max.
  std::vector<std::int64_t> excluded;
};

// Compares `analytic_grad` against central differences of `f` at `point`,
// coordinate by coordinate. Relative error uses max(|fd|, |analytic|, 1e-8)
// as denominator. Pass `coords` to check a subset (empty = all).
GradCheckReport grad_check(const std::function<double(const std::vector<double>&)>& f,
                           const std::vector<double>& point,
                           const std::vector<double>& analytic_grad, double eps,
                           const std::vector<std::int64_t>& coords = {});

}  // namespace postcn::nn
