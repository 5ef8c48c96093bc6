#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "splatgen/gradcheck.hpp"

using namespace splatgen;

TEST_CASE("gradient checker accepts a correct gradient") {
  // f = sum_i sin(x_i) x_{i+1}
  GradientFunction f = [](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    if (!g.empty()) std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      v += std::sin(x[i]) * x[i + 1];
      if (!g.empty()) {
        g[i] += std::cos(x[i]) * x[i + 1];
        g[i + 1] += std::sin(x[i]);
      }
    }
    return v;
  };
  const std::vector<double> x{0.3, -1.2, 2.0, 0.7};
  const auto report = check_gradients(f, x);
  CHECK(report.checked == 4);
  CHECK(report.passed(1e-6));
}

TEST_CASE("gradient checker flags a wrong gradient") {
  GradientFunction f = [](std::span<const double> x, std::span<double> g) {
    if (!g.empty()) {
      g[0] = 2.0 * x[0];
      g[1] = 3.0 * x[1];  // should be 2 x[1]
    }
    return x[0] * x[0] + x[1] * x[1];
  };
  const std::vector<double> x{1.0, 1.0};
  const auto report = check_gradients(f, x);
  CHECK_FALSE(report.passed(1e-4));
  CHECK(report.worst_index == 1);

  GradCheckOptions only_first;
  only_first.indices = {0};
  CHECK(check_gradients(f, x, only_first).passed(1e-6));
  only_first.indices = {5};
  CHECK_THROWS_AS(check_gradients(f, x, only_first), std::out_of_range);
  GradCheckOptions bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(check_gradients(f, x, bad), std::invalid_argument);
}

TEST_CASE("gradient checker treats NaN as failure") {
  GradientFunction f = [](std::span<const double> x, std::span<double> g) {
    if (!g.empty()) g[0] = std::nan("");
    return x[0];
  };
  const std::vector<double> x{1.0};
  CHECK_FALSE(check_gradients(f, x).passed(1.0));
}
