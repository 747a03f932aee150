#include "beamobs/simulate.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace beamobs {

TimeGrid TimeGrid::FromStep(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("TimeGrid: horizon and dt must be > 0");
  }
  const double ratio = horizon / dt;
  int intervals = static_cast<int>(std::llround(ratio));
  if (std::abs(ratio - intervals) > 1e-9 * ratio) {
    intervals = static_cast<int>(std::ceil(ratio));
  }
  return TimeGrid{horizon, std::max(intervals, 1)};
}

Eigen::VectorXd TimeGrid::Times() const {
  Eigen::VectorXd t(num_points());
  for (int k = 0; k < num_points(); ++k) t(k) = time(k);
  return t;
}

Trajectory PropagateClosedForm(const TruncatedSystem& sys,
                               const InitialCondition& ic, double horizon,
                               double dt) {
  const int n = sys.num_modes();
  if (ic.alpha_displacement.size() != n || ic.alpha_velocity.size() != n) {
    throw std::invalid_argument("PropagateClosedForm: coefficient size mismatch");
  }
  const TimeGrid grid = TimeGrid::FromStep(horizon, dt);
  Trajectory traj;
  traj.times = grid.Times();
  traj.states.resize(grid.num_points(), 2 * n);
  for (int k = 0; k < grid.num_points(); ++k) {
    const double t = traj.times(k);
    for (int i = 0; i < n; ++i) {
      const double w = sys.frequencies(i);
      const double c = std::cos(w * t);
      const double s = std::sin(w * t);
      const double a1 = ic.alpha_displacement(i);
      const double a2 = ic.alpha_velocity(i);
      traj.states(k, i) = a1 * c + a2 * s / w;
      traj.states(k, n + i) = -a1 * w * s + a2 * c;
    }
  }
  traj.outputs = traj.states * sys.C.transpose();
  return traj;
}

int RequiredSubsteps(const TruncatedSystem& sys, double dt,
                     double max_phase_step) {
  const double fastest = sys.frequencies.size() ? sys.frequencies.maxCoeff() : 0.0;
  const double phase = dt * fastest;
  // Strictly below the bound.
  return std::max(1, static_cast<int>(std::floor(phase / max_phase_step)) + 1);
}

namespace {

Eigen::VectorXd Rk4Step(const Eigen::MatrixXd& A, const Eigen::VectorXd& h,
                        double step) {
  const Eigen::VectorXd k1 = A * h;
  const Eigen::VectorXd k2 = A * (h + 0.5 * step * k1);
  const Eigen::VectorXd k3 = A * (h + 0.5 * step * k2);
  const Eigen::VectorXd k4 = A * (h + step * k3);
  return h + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory PropagateNumeric(const TruncatedSystem& sys,
                            const Eigen::Ref<const Eigen::VectorXd>& h0,
                            double horizon, double dt,
                            const NumericOptions& options) {
  if (h0.size() != sys.A.rows()) {
    throw std::invalid_argument("PropagateNumeric: state size mismatch");
  }
  if (options.substeps < 1) {
    throw std::invalid_argument("PropagateNumeric: substeps must be >= 1");
  }
  const TimeGrid grid = TimeGrid::FromStep(horizon, dt);
  const double substep = grid.step() / options.substeps;
  const double fastest = sys.frequencies.size() ? sys.frequencies.maxCoeff() : 0.0;
  Trajectory traj;
  if (substep * fastest >= options.max_phase_step) {
    if (options.strict) {
      throw std::invalid_argument(
          "PropagateNumeric: step * max omega exceeds the accuracy bound");
    }
    traj.accuracy_warning = true;
  }
  traj.times = grid.Times();
  traj.states.resize(grid.num_points(), h0.size());
  Eigen::VectorXd h = h0;
  traj.states.row(0) = h.transpose();
  for (int k = 1; k < grid.num_points(); ++k) {
    for (int s = 0; s < options.substeps; ++s) h = Rk4Step(sys.A, h, substep);
    traj.states.row(k) = h.transpose();
  }
  traj.outputs = traj.states * sys.C.transpose();
  return traj;
}

Eigen::MatrixXd NumericTransitionMatrix(const TruncatedSystem& sys, double dt,
                                        const NumericOptions& options) {
  const int n = sys.state_dim();
  Eigen::MatrixXd phi(n, n);
  for (int j = 0; j < n; ++j) {
    const Trajectory one =
        PropagateNumeric(sys, Eigen::VectorXd::Unit(n, j), dt, dt, options);
    phi.col(j) = one.states.row(1).transpose();
  }
  return phi;
}

MeasurementRecord SynthesizeMeasurements(const Trajectory& trajectory,
                                         const Eigen::Ref<const Eigen::MatrixXd>& R,
                                         std::uint64_t seed) {
  const int p = static_cast<int>(trajectory.outputs.cols());
  if (R.rows() != p || R.cols() != p) {
    throw std::invalid_argument("SynthesizeMeasurements: R has wrong dimension");
  }
  const double scale = std::max(1.0, R.cwiseAbs().maxCoeff());
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("SynthesizeMeasurements: R is not symmetric");
  }
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(p, p);
  if (p > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw std::invalid_argument("SynthesizeMeasurements: R is not PSD");
    }
    factor = eig.eigenvectors() *
             eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  MeasurementRecord record;
  record.times = trajectory.times;
  record.clean = trajectory.outputs;
  record.noise_covariance = R;
  record.seed = seed;
  record.noisy = record.clean;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(p);
  for (Eigen::Index k = 0; k < record.noisy.rows(); ++k) {
    for (int i = 0; i < p; ++i) z(i) = normal(rng);
    record.noisy.row(k) += (factor * z).transpose();
  }
  return record;
}

OutputPair PerturbedOutputPair(const ModalBasis& basis,
                               const InitialCondition& ic, int mode,
                               PerturbedField which, double epsilon, double x,
                               double horizon, double dt) {
  const int n = basis.num_modes();
  if (mode < 0 || mode >= n) {
    throw std::invalid_argument("PerturbedOutputPair: mode index out of range");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("PerturbedOutputPair: epsilon must be > 0");
  }
  const std::vector<double> location{x};
  const TruncatedSystem sys =
      AssembleTruncatedSystem(basis, location, SensorSnap::kExact);
  InitialCondition plus = ic;
  InitialCondition minus = ic;
  Eigen::VectorXd& plus_alpha = which == PerturbedField::kDisplacement
                                    ? plus.alpha_displacement
                                    : plus.alpha_velocity;
  Eigen::VectorXd& minus_alpha = which == PerturbedField::kDisplacement
                                     ? minus.alpha_displacement
                                     : minus.alpha_velocity;
  plus_alpha(mode) += epsilon;
  minus_alpha(mode) -= epsilon;
  OutputPair pair;
  const Trajectory up = PropagateClosedForm(sys, plus, horizon, dt);
  const Trajectory down = PropagateClosedForm(sys, minus, horizon, dt);
  pair.times = up.times;
  pair.plus = up.outputs.col(0);
  pair.minus = down.outputs.col(0);
  return pair;
}

}  // namespace beamobs
