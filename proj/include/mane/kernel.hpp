#pragma once

#include <cmath>
#include <span>

namespace mane {

/// Parameters of the low-dimensional similarity q(d) = 1 / (1 + a d^(2b)).
struct KernelParams {
  double a = 1.0;
  double b = 1.0;
  double min_dist = 0.1;
  double fit_mse = 0.0;  // mean squared residual against the target curve
};

inline constexpr int kFitGridPoints = 300;
inline constexpr double kFitGridMax = 3.0;
inline constexpr double kFitMaxMse = 1e-3;

/// Target curve: 1 below min_dist, exp(-(d - min_dist)) beyond.
inline double min_dist_curve(double d, double min_dist) {
  return d < min_dist ? 1.0 : std::exp(-(d - min_dist));
}

/// q as a function of the squared distance.
inline double q_from_squared(double squared_distance, double a, double b) {
  return 1.0 / (1.0 + a * std::pow(squared_distance, b));
}

/// Least-squares fit of (a, b) on 300 evenly spaced distances in [0, 3],
/// Levenberg-Marquardt in (log a, b) from (1, 1). Throws FitError if the
/// iteration cap is hit or the mean squared residual exceeds 1e-3.
KernelParams fit_ab(double min_dist);

/// Mean squared residual of q(a, b) against the target curve on the fit grid.
double fit_residual(double a, double b, double min_dist);

double q_similarity(std::span<const double> yi, std::span<const double> yj, const KernelParams& params);

}  // namespace mane
