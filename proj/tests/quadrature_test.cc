#include "beamobs/quadrature.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

namespace beamobs {
namespace {

Eigen::VectorXd Sample(int n, double a, double b, double (*f)(double)) {
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = f(a + (b - a) * k / (n - 1));
  return v;
}

double Cubic(double x) { return 2.0 * x * x * x - x * x + 3.0 * x - 1.0; }
// Antiderivative of Cubic on [0, 2].
constexpr double kCubicIntegral = 8.0 - 8.0 / 3.0 + 6.0 - 2.0;

TEST(QuadratureWeights, SimpsonIsExactForCubicsWithEvenAndOddIntervalCounts) {
  for (int n : {3, 4, 5, 6, 9, 10, 101, 102}) {
    const double h = 2.0 / (n - 1);
    EXPECT_NEAR(Integrate(Sample(n, 0.0, 2.0, Cubic), h, QuadratureRule::kSimpson),
                kCubicIntegral, 1e-12)
        << n << " nodes";
  }
}

TEST(QuadratureWeights, TrapezoidIsExactForLines) {
  const auto line = [](double x) { return 3.0 * x - 2.0; };
  Eigen::VectorXd v(7);
  for (int k = 0; k < 7; ++k) v(k) = line(k * 0.5);
  EXPECT_NEAR(Integrate(v, 0.5, QuadratureRule::kTrapezoid), 13.5 - 6.0, 1e-14);
}

TEST(QuadratureWeights, WeightsSumToTheSpan) {
  for (auto rule : {QuadratureRule::kTrapezoid, QuadratureRule::kSimpson}) {
    for (int n : {2, 3, 4, 5, 50, 51}) {
      EXPECT_NEAR(QuadratureWeights(n, 0.1, rule).sum(), 0.1 * (n - 1), 1e-14);
    }
  }
}

TEST(QuadratureWeights, ConvergenceOrders) {
  const auto error = [](int intervals, QuadratureRule rule) {
    const double pi = std::numbers::pi;
    const Eigen::VectorXd v =
        Sample(intervals + 1, 0.0, pi, [](double x) { return std::sin(x); });
    return std::abs(Integrate(v, pi / intervals, rule) - 2.0);
  };
  EXPECT_NEAR(error(40, QuadratureRule::kTrapezoid) / error(80, QuadratureRule::kTrapezoid),
              4.0, 0.01);
  EXPECT_NEAR(error(40, QuadratureRule::kSimpson) / error(80, QuadratureRule::kSimpson), 16.0,
              0.1);
}

TEST(QuadratureWeights, RejectsFewerThanTwoNodes) {
  EXPECT_THROW(QuadratureWeights(1, 0.1, QuadratureRule::kSimpson), std::invalid_argument);
}

}  // namespace
}  // namespace beamobs
