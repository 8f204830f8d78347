#include "doctest.h"

#include "mane/errors.hpp"
#include "mane/kernel.hpp"

#include <cmath>
#include <vector>

using namespace mane;

namespace {

struct GridOptimum {
  double a, b, mse;
};

// Exhaustive search over a in [0.5, 3], b in [0.5, 2] on a 0.005 lattice.
GridOptimum grid_search(double min_dist) {
  std::vector<double> xs, ys;
  for (int g = 0; g < 300; ++g) {
    const double x = 3.0 * g / 299.0;
    xs.push_back(x);
    ys.push_back(x < min_dist ? 1.0 : std::exp(-(x - min_dist)));
  }
  GridOptimum best{0, 0, 1e300};
  for (int ia = 0; ia <= 500; ++ia) {
    const double a = 0.5 + 0.005 * ia;
    for (int ib = 0; ib <= 300; ++ib) {
      const double b = 0.5 + 0.005 * ib;
      double sse = 0.0;
      for (std::size_t g = 0; g < xs.size(); ++g) {
        const double r = 1.0 / (1.0 + a * std::pow(xs[g], 2.0 * b)) - ys[g];
        sse += r * r;
      }
      if (sse / 300.0 < best.mse) best = {a, b, sse / 300.0};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("fit_ab(0.1) agrees with the grid-search oracle") {
  const auto oracle = grid_search(0.1);
  const auto fit = fit_ab(0.1);
  CHECK(std::abs(fit.a - oracle.a) <= 0.02);
  CHECK(std::abs(fit.b - oracle.b) <= 0.02);
  CHECK(std::abs(fit.a - 1.58) <= 0.02);
  CHECK(std::abs(fit.b - 0.90) <= 0.02);
  CHECK(fit.fit_mse <= kFitMaxMse);
  CHECK(fit.fit_mse <= oracle.mse + 1e-12);
  CHECK(fit_residual(fit.a, fit.b, 0.1) == doctest::Approx(fit.fit_mse));
}

TEST_CASE("fit_ab(0) agrees with the grid-search oracle") {
  const auto oracle = grid_search(0.0);
  const auto fit = fit_ab(0.0);
  CHECK(std::abs(fit.a - oracle.a) <= 0.05);
  CHECK(std::abs(fit.b - oracle.b) <= 0.05);
  CHECK(std::abs(fit.a - 1.93) <= 0.05);
  CHECK(std::abs(fit.b - 0.79) <= 0.05);
  CHECK(fit.fit_mse <= kFitMaxMse);
}

TEST_CASE("fit_ab rejects a negative min_dist") { CHECK_THROWS_AS(fit_ab(-0.1), ParameterError); }

TEST_CASE("q: analytic values and monotonicity") {
  const auto fit = fit_ab(0.1);
  const std::vector<double> origin{0.0, 0.0};
  CHECK(q_similarity(origin, origin, fit) == 1.0);
  CHECK(q_from_squared(0.0, fit.a, fit.b) == 1.0);

  KernelParams unit{1.0, 1.0, 0.0, 0.0};
  const std::vector<double> one{1.0, 0.0};
  const std::vector<double> root3{1.0, std::sqrt(2.0)};
  CHECK(q_similarity(origin, one, unit) == 0.5);
  CHECK(q_similarity(origin, root3, unit) == doctest::Approx(0.25).epsilon(1e-15));

  double prev = 1.0;
  for (double s = 1e-3; s < 1e6; s *= 1.7) {
    const double q = q_from_squared(s, fit.a, fit.b);
    CHECK(q < prev);
    prev = q;
  }
  CHECK(prev < 1e-4);
}
