#include "mane/kernel.hpp"

#include "mane/errors.hpp"
#include "mane/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <sstream>

namespace mane {

namespace {

constexpr int kFitMaxIterations = 500;

double grid_point(int g) { return kFitGridMax * g / (kFitGridPoints - 1); }

double sum_squared_residual(double log_a, double b, double min_dist) {
  const double a = std::exp(log_a);
  double sse = 0.0;
  for (int g = 0; g < kFitGridPoints; ++g) {
    const double x = grid_point(g);
    const double r = 1.0 / (1.0 + a * std::pow(x, 2.0 * b)) - min_dist_curve(x, min_dist);
    sse += r * r;
  }
  return sse;
}

}  // namespace

double fit_residual(double a, double b, double min_dist) {
  return sum_squared_residual(std::log(a), b, min_dist) / kFitGridPoints;
}

KernelParams fit_ab(double min_dist) {
  if (!(min_dist >= 0.0)) throw ParameterError("min_dist must be nonnegative");

  double log_a = 0.0;
  double b = 1.0;
  double lambda = 1e-3;
  double sse = sum_squared_residual(log_a, b, min_dist);
  bool converged = false;

  for (int it = 0; it < kFitMaxIterations && !converged; ++it) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    const double a = std::exp(log_a);
    for (int g = 1; g < kFitGridPoints; ++g) {  // x = 0 contributes a zero row
      const double x = grid_point(g);
      const double u = a * std::pow(x, 2.0 * b);
      const double q = 1.0 / (1.0 + u);
      const double r = q - min_dist_curve(x, min_dist);
      const Eigen::Vector2d jac(-q * q * u, -q * q * u * 2.0 * std::log(x));
      jtj += jac * jac.transpose();
      jtr += jac * r;
    }

    // Raise damping until a step lowers the residual.
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::Matrix2d damped = jtj;
      damped.diagonal() *= 1.0 + lambda;
      const Eigen::Vector2d step = damped.ldlt().solve(-jtr);
      const double next_log_a = log_a + step[0];
      const double next_b = b + step[1];
      if (next_b > 0.0) {
        const double next_sse = sum_squared_residual(next_log_a, next_b, min_dist);
        if (next_sse <= sse) {
          converged = (sse - next_sse) <= 1e-15 * (1.0 + sse) && step.norm() < 1e-10;
          log_a = next_log_a;
          b = next_b;
          sse = next_sse;
          lambda = std::max(lambda * 0.1, 1e-12);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) converged = true;  // no descent direction left: at a minimum
  }

  KernelParams params{std::exp(log_a), b, min_dist, sse / kFitGridPoints};
  if (!converged || !(params.fit_mse <= kFitMaxMse) || !(params.a > 0.0) || !(params.b > 0.0)) {
    std::ostringstream msg;
    msg << "fit of (a, b) for min_dist " << min_dist << " failed: a=" << params.a << " b=" << params.b
        << " mse=" << params.fit_mse;
    throw FitError(msg.str());
  }
  return params;
}

double q_similarity(std::span<const double> yi, std::span<const double> yj, const KernelParams& params) {
  return q_from_squared(squared_distance(yi, yj), params.a, params.b);
}

}  // namespace mane
