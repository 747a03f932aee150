#include "beamobs/quadrature.h"

#include <stdexcept>

namespace beamobs {

namespace {

void AddTrapezoid(Eigen::VectorXd& w, int first, int last, double step) {
  for (int k = first; k < last; ++k) {
    w(k) += 0.5 * step;
    w(k + 1) += 0.5 * step;
  }
}

}  // namespace

Eigen::VectorXd QuadratureWeights(int num_points, double step,
                                  QuadratureRule rule) {
  if (num_points < 2) {
    throw std::invalid_argument("QuadratureWeights: need at least two nodes");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(num_points);
  const int intervals = num_points - 1;
  if (rule == QuadratureRule::kTrapezoid || intervals < 2) {
    AddTrapezoid(w, 0, intervals, step);
    return w;
  }
  int simpson_intervals = intervals;
  if (intervals % 2 == 1) {
    if (intervals == 3) {
      simpson_intervals = 0;
    } else {
      simpson_intervals = intervals - 3;
    }
  }
  for (int k = 0; k + 2 <= simpson_intervals; k += 2) {
    w(k) += step / 3.0;
    w(k + 1) += 4.0 * step / 3.0;
    w(k + 2) += step / 3.0;
  }
  if (simpson_intervals != intervals) {
    // 3/8 rule on the trailing three intervals.
    const int k = simpson_intervals;
    w(k) += 3.0 * step / 8.0;
    w(k + 1) += 9.0 * step / 8.0;
    w(k + 2) += 9.0 * step / 8.0;
    w(k + 3) += 3.0 * step / 8.0;
  }
  return w;
}

double Integrate(const Eigen::Ref<const Eigen::VectorXd>& values, double step,
                 QuadratureRule rule) {
  return QuadratureWeights(static_cast<int>(values.size()), step, rule)
      .dot(values);
}

}  // namespace beamobs
