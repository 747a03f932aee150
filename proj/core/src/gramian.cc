#include "beamobs/gramian.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "beamobs/simulate.h"

namespace beamobs {

std::string_view ToString(GramianKind kind) {
  switch (kind) {
    case GramianKind::kTruncatedAnalytical:
      return "truncated-analytical";
    case GramianKind::kTruncatedEmpirical:
      return "truncated-empirical";
    case GramianKind::kContinuumAnalytical:
      return "continuum-analytical";
    case GramianKind::kContinuumEmpirical:
      return "continuum-empirical";
  }
  return "unknown";
}

namespace {

// integral_0^t cos(k s) ds
double CosIntegral(double k, double t) {
  const double kt = k * t;
  if (std::abs(kt) < 1e-4) return t * (1.0 - kt * kt / 6.0);
  return std::sin(kt) / k;
}

// integral_0^t sin(k s) ds = 2 sin^2(k t / 2) / k
double SinIntegral(double k, double t) {
  const double kt = k * t;
  if (std::abs(kt) < 1e-4) return k * t * t / 2.0 * (1.0 - kt * kt / 12.0);
  const double half = std::sin(0.5 * kt);
  return 2.0 * half * half / k;
}

void CheckSampledOptions(const SampledGramianOptions& options) {
  if (!(options.horizon > 0.0) || !(options.dt > 0.0)) {
    throw std::invalid_argument("Gramian: horizon and dt must be > 0");
  }
}

Eigen::Matrix2d OuterIntegral(const Eigen::VectorXd& first,
                              const Eigen::VectorXd& second,
                              const Eigen::VectorXd& weights) {
  Eigen::Matrix2d w;
  w(0, 0) = weights.dot(first.cwiseAbs2());
  w(1, 1) = weights.dot(second.cwiseAbs2());
  w(0, 1) = w(1, 0) = weights.dot(first.cwiseProduct(second));
  return w;
}

}  // namespace

Gramian TruncatedAnalyticalGramian(const TruncatedSystem& sys, double horizon) {
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("TruncatedAnalyticalGramian: horizon must be > 0");
  }
  const int n = sys.num_modes();
  const Eigen::MatrixXd curvature_rows = sys.C.leftCols(n);
  const Eigen::MatrixXd M = curvature_rows.transpose() * curvature_rows;
  const Eigen::VectorXd& w = sys.frequencies;
  const double t = horizon;

  Eigen::MatrixXd W(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double diff = w(i) - w(j);
      const double sum = w(i) + w(j);
      const double cos_cos = 0.5 * (CosIntegral(diff, t) + CosIntegral(sum, t));
      const double sin_sin = 0.5 * (CosIntegral(diff, t) - CosIntegral(sum, t));
      // cos(a s) sin(b s) = [sin((a + b) s) + sin((b - a) s)] / 2
      const double cos_sin = 0.5 * (SinIntegral(sum, t) + SinIntegral(-diff, t));
      W(i, j) = M(i, j) * cos_cos;
      W(n + i, n + j) = M(i, j) * sin_sin / (w(i) * w(j));
      W(i, n + j) = M(i, j) * cos_sin / w(j);
    }
  }
  W.bottomLeftCorner(n, n) = W.topRightCorner(n, n).transpose();

  Gramian g;
  g.matrix = W;
  g.kind = GramianKind::kTruncatedAnalytical;
  g.sensor_locations = sys.sensor_locations;
  g.horizon = horizon;
  g.num_modes = n;
  return g;
}

Gramian TruncatedEmpiricalGramian(const TruncatedSystem& sys, double epsilon,
                                  const SampledGramianOptions& options,
                                  const Eigen::VectorXd& base_state) {
  CheckSampledOptions(options);
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("TruncatedEmpiricalGramian: epsilon must be > 0");
  }
  const int n_modes = sys.num_modes();
  const int n = sys.state_dim();
  const int p = sys.num_outputs();
  const Eigen::VectorXd base =
      base_state.size() == 0 ? Eigen::VectorXd::Zero(n) : base_state;
  if (base.size() != n) {
    throw std::invalid_argument("TruncatedEmpiricalGramian: base state size");
  }
  const TimeGrid grid = TimeGrid::FromStep(options.horizon, options.dt);
  const Eigen::VectorXd weights =
      QuadratureWeights(grid.num_points(), grid.step(), options.rule);

  // differences[l] holds one column per perturbed state for sensor l.
  std::vector<Eigen::MatrixXd> differences(
      p, Eigen::MatrixXd(grid.num_points(), n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd up = base;
    Eigen::VectorXd down = base;
    up(i) += epsilon;
    down(i) -= epsilon;
    const auto as_ic = [n_modes](const Eigen::VectorXd& h) {
      return InitialCondition::FromCoefficients(h.head(n_modes), h.tail(n_modes));
    };
    const Trajectory plus =
        PropagateClosedForm(sys, as_ic(up), options.horizon, grid.step());
    const Trajectory minus =
        PropagateClosedForm(sys, as_ic(down), options.horizon, grid.step());
    for (int l = 0; l < p; ++l) {
      differences[l].col(i) = plus.outputs.col(l) - minus.outputs.col(l);
    }
  }
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (const Eigen::MatrixXd& delta : differences) {
    W.noalias() += delta.transpose() * weights.asDiagonal() * delta;
  }
  W /= 4.0 * epsilon * epsilon;
  W = 0.5 * (W + W.transpose()).eval();

  Gramian g;
  g.matrix = W;
  g.kind = GramianKind::kTruncatedEmpirical;
  g.sensor_locations = sys.sensor_locations;
  g.horizon = options.horizon;
  g.epsilon = epsilon;
  g.num_modes = n_modes;
  return g;
}

Gramian ContinuumAnalyticalGramian(const ModalBasis& basis, double x,
                                   const SampledGramianOptions& options) {
  CheckSampledOptions(options);
  const TimeGrid grid = TimeGrid::FromStep(options.horizon, options.dt);
  const Eigen::VectorXd weights =
      QuadratureWeights(grid.num_points(), grid.step(), options.rule);
  const Eigen::VectorXd sensitivity =
      basis.beam.half_height() * basis.CurvaturesAt(x);
  Eigen::VectorXd displacement = Eigen::VectorXd::Zero(grid.num_points());
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(grid.num_points());
  for (int k = 0; k < grid.num_points(); ++k) {
    const double t = grid.time(k);
    for (int j = 0; j < basis.num_modes(); ++j) {
      const double w = basis.frequencies(j);
      displacement(k) += sensitivity(j) * std::cos(w * t);
      velocity(k) += sensitivity(j) * std::sin(w * t) / w;
    }
  }
  Gramian g;
  g.matrix = OuterIntegral(displacement, velocity, weights);
  g.kind = GramianKind::kContinuumAnalytical;
  g.sensor_locations = {x};
  g.horizon = options.horizon;
  g.num_modes = basis.num_modes();
  return g;
}

PerturbationSizes UniformPerturbation(int num_modes, double epsilon) {
  return PerturbationSizes::Constant(2, num_modes, epsilon);
}

Gramian ContinuumEmpiricalGramian(const ModalBasis& basis, double x,
                                  const PerturbationSizes& epsilons,
                                  const SampledGramianOptions& options,
                                  const InitialCondition& base) {
  CheckSampledOptions(options);
  const int n = basis.num_modes();
  if (epsilons.cols() != n) {
    throw std::invalid_argument("ContinuumEmpiricalGramian: need one epsilon per mode");
  }
  if ((epsilons.array() <= 0.0).any()) {
    throw std::invalid_argument("ContinuumEmpiricalGramian: epsilons must be > 0");
  }
  const InitialCondition ic =
      base.alpha_displacement.size() == 0 ? InitialCondition::Zero(n) : base;
  const TimeGrid grid = TimeGrid::FromStep(options.horizon, options.dt);
  const Eigen::VectorXd weights =
      QuadratureWeights(grid.num_points(), grid.step(), options.rule);

  Eigen::VectorXd displacement = Eigen::VectorXd::Zero(grid.num_points());
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(grid.num_points());
  for (int j = 0; j < n; ++j) {
    const OutputPair d =
        PerturbedOutputPair(basis, ic, j, PerturbedField::kDisplacement,
                            epsilons(0, j), x, options.horizon, grid.step());
    displacement += (d.plus - d.minus) / (2.0 * epsilons(0, j));
    const OutputPair v =
        PerturbedOutputPair(basis, ic, j, PerturbedField::kVelocity,
                            epsilons(1, j), x, options.horizon, grid.step());
    velocity += (v.plus - v.minus) / (2.0 * epsilons(1, j));
  }
  Gramian g;
  g.matrix = OuterIntegral(displacement, velocity, weights);
  g.kind = GramianKind::kContinuumEmpirical;
  g.sensor_locations = {x};
  g.horizon = options.horizon;
  g.epsilon = epsilons.minCoeff();
  g.num_modes = n;
  return g;
}

ObservabilityMatrix ComputeObservabilityMatrix(const TruncatedSystem& sys) {
  const int n = sys.state_dim();
  const int n_modes = sys.num_modes();
  const int p = sys.num_outputs();
  ObservabilityMatrix result;
  result.matrix.resize(static_cast<Eigen::Index>(n) * p, n);
  if (p == 0 || n == 0) return result;

  result.matrix.topRows(p) = sys.C;
  for (int k = 1; k < n; ++k) {
    result.matrix.middleRows(k * p, p) =
        result.matrix.middleRows((k - 1) * p, p) * sys.A;
  }

  // Similarity D^-1 A D / w_max with D = diag(I, w_max I), plus per-mode
  // column balancing by the clamped-end curvature scale of each C column.
  const double w_max = sys.frequencies.maxCoeff();
  Eigen::MatrixXd A_hat = Eigen::MatrixXd::Zero(n, n);
  A_hat.topRightCorner(n_modes, n_modes).setIdentity();
  A_hat.bottomLeftCorner(n_modes, n_modes).diagonal() =
      -(sys.frequencies / w_max).cwiseAbs2();
  Eigen::MatrixXd C_hat = Eigen::MatrixXd::Zero(p, n);
  C_hat.leftCols(n_modes) = sys.C.leftCols(n_modes);
  C_hat.rightCols(n_modes) = sys.C.rightCols(n_modes) * w_max;
  // Curvature magnitudes grow like b_k^2, i.e. like w_k.
  for (int k = 0; k < n_modes; ++k) {
    C_hat.col(k) /= sys.frequencies(k);
    C_hat.col(n_modes + k) /= sys.frequencies(k);
  }
  for (int l = 0; l < p; ++l) {
    const double row_scale = C_hat.row(l).cwiseAbs().maxCoeff();
    if (row_scale > 0.0) C_hat.row(l) /= row_scale;
  }
  Eigen::MatrixXd O_hat(static_cast<Eigen::Index>(n) * p, n);
  O_hat.topRows(p) = C_hat;
  for (int k = 1; k < n; ++k) {
    O_hat.middleRows(k * p, p) = O_hat.middleRows((k - 1) * p, p) * A_hat;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(O_hat);
  result.singular_values = svd.singularValues();
  const double sigma_max =
      result.singular_values.size() ? result.singular_values(0) : 0.0;
  const double threshold = sigma_max * n * std::numeric_limits<double>::epsilon();
  result.rank = 0;
  for (Eigen::Index i = 0; i < result.singular_values.size(); ++i) {
    if (result.singular_values(i) > threshold) ++result.rank;
  }
  return result;
}

ObservabilityReport SingleSensorDeterminant(const ModalBasis& basis, double x) {
  const int n = basis.num_modes();
  const Eigen::VectorXd p = basis.CurvaturesAt(x);
  const double h = basis.beam.half_height();
  ObservabilityReport report;
  report.curvature_zeros.resize(n);
  int nonzero = 0;
  double log10_abs = n * std::log10(h);
  int sign = 1;
  bool exact_zero = false;
  for (int k = 0; k < n; ++k) {
    const double scale = basis.curvatures.col(k).cwiseAbs().maxCoeff();
    report.curvature_zeros[k] = std::abs(p(k)) < 1e-8 * scale;
    if (!report.curvature_zeros[k]) ++nonzero;
    if (p(k) == 0.0) {
      exact_zero = true;
    } else {
      log10_abs += std::log10(std::abs(p(k)));
      if (p(k) < 0.0) sign = -sign;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double factor = basis.frequencies(i) * basis.frequencies(i) -
                            basis.frequencies(j) * basis.frequencies(j);
      log10_abs += std::log10(std::abs(factor));
      if (factor < 0.0) sign = -sign;
    }
  }
  report.rank = 2 * nonzero;
  report.observable = nonzero == n;
  if (exact_zero) {
    report.det_sign = 0;
    report.det_O_C = 0.0;
    report.log10_abs_det = -std::numeric_limits<double>::infinity();
  } else {
    report.det_sign = sign;
    report.log10_abs_det = log10_abs;
    report.det_O_C = sign * std::pow(10.0, log10_abs);
  }
  return report;
}

}  // namespace beamobs
