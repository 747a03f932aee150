#pragma once

#include <Eigen/Core>

namespace beamobs {

/// Rule used to integrate sampled time series on a uniform grid.
enum class QuadratureRule {
  kTrapezoid,
  kSimpson,
};

/// Weights w such that w.dot(f) approximates the integral of f sampled at
/// `num_points` uniformly spaced nodes with spacing `step`.
///
/// Simpson uses the composite 1/3 rule; when the number of intervals is odd
/// the last three intervals are closed with the 3/8 rule. With fewer than
/// three intervals Simpson falls back to the trapezoid rule on the remainder.
Eigen::VectorXd QuadratureWeights(int num_points, double step,
                                  QuadratureRule rule);

/// Convenience wrapper: integral of uniformly sampled `values`.
double Integrate(const Eigen::Ref<const Eigen::VectorXd>& values, double step,
                 QuadratureRule rule);

}  // namespace beamobs
