#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace splatgen {

/// Scalar function with an analytic gradient. `grad` is either empty (value
/// only) or has the size of `x` and must be overwritten.
using GradientFunction =
    std::function<double(std::span<const double> x, std::span<double> grad)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// Lower bound of the relative-error denominator, as a multiple of
  /// max(1, |f(x)|). Keeps round-off in near-zero components from reading as
  /// a relative error.
  double relative_floor = 1e-6;
  /// Coordinates to probe; empty means all of them.
  std::vector<std::size_t> indices;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;

  bool passed(double tolerance = 1e-4) const {
    return max_relative_error <= tolerance;
  }
};

/// Compares the analytic gradient against central finite differences.
GradCheckReport check_gradients(const GradientFunction& fn,
                                std::span<const double> point,
                                const GradCheckOptions& options = {});

}  // namespace splatgen
