#include "splatgen/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace splatgen {

GradCheckReport check_gradients(const GradientFunction& fn,
                                std::span<const double> point,
                                const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) {
    throw std::invalid_argument("check_gradients: epsilon must be > 0");
  }
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> analytic(x.size(), 0.0);
  const double f0 = fn(x, analytic);
  const double floor = options.relative_floor * std::max(1.0, std::abs(f0));

  std::vector<std::size_t> indices = options.indices;
  if (indices.empty()) {
    indices.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) indices[i] = i;
  }

  GradCheckReport report;
  for (std::size_t i : indices) {
    if (i >= x.size()) throw std::out_of_range("check_gradients: bad index");
    const double saved = x[i];
    x[i] = saved + options.epsilon;
    const double f_plus = fn(x, {});
    x[i] = saved - options.epsilon;
    const double f_minus = fn(x, {});
    x[i] = saved;

    const double numeric = (f_plus - f_minus) / (2.0 * options.epsilon);
    const double abs_err = std::abs(numeric - analytic[i]);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    const double rel_err = abs_err / denom;
    if (!(rel_err <= report.max_relative_error)) {
      report.max_relative_error = std::isnan(rel_err) ? std::numeric_limits<double>::infinity() : rel_err;
      report.worst_index = i;
    }
    report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
    ++report.checked;
  }
  return report;
}

}  // namespace splatgen
