#include "postcn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "postcn/tensor.hpp"

namespace postcn::nn {

GradCheckReport grad_check(const std::function<double(const std::vector<double>&)>& f,
                           const std::vector<double>& point,
                           const std::vector<double>& analytic_grad, double eps,
                           const std::vector<std::int64_t>& coords) {
  if (!(eps > 0.0)) throw NnError("grad_check: eps must be positive");
  if (analytic_grad.size() != point.size()) {
    throw NnError("grad_check: gradient size does not match point");
  }

  std::vector<std::int64_t> which = coords;
  if (which.empty()) {
    which.resize(point.size());
    for (size_t i = 0; i < point.size(); ++i) which[i] = static_cast<std::int64_t>(i);
  }

  GradCheckReport report;
  std::vector<double> x = point;
  const double f0 = f(x);
  for (const auto ci : which) {
    const auto i = static_cast<size_t>(ci);
    const double saved = x[i];
    x[i] = saved + eps;
    const double fp = f(x);
    x[i] = saved - eps;
    const double fm = f(x);
    x[i] = saved;

    const double central = (fp - fm) / (2.0 * eps);
    const double right = (fp - f0) / eps;
    const double left = (f0 - fm) / eps;
    // A kink between x-eps and x+eps makes the one-sided slopes disagree at
    // O(1); smooth curvature only contributes O(eps).
    const double slope_scale = std::max({std::abs(right), std::abs(left), 1.0});
    if (std::abs(right - left) > 1e-3 * slope_scale) {
      report.excluded.push_back(ci);
      continue;
    }

    const double denom = std::max({std::abs(central), std::abs(analytic_grad[i]), 1e-8});
    const double rel = std::abs(central - analytic_grad[i]) / denom;
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.checked;
  }
  return report;
}

}  // namespace postcn::nn
