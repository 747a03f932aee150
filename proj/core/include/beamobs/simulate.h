#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Core>

#include "beamobs/beam_model.h"

namespace beamobs {

/// Uniform time grid on [0, horizon]. The step is horizon / intervals; when a
/// requested dt does not divide the horizon, the interval count is rounded up.
struct TimeGrid {
  double horizon = 0.0;
  int intervals = 0;

  static TimeGrid FromStep(double horizon, double dt);
  double step() const { return horizon / intervals; }
  int num_points() const { return intervals + 1; }
  double time(int k) const { return horizon * k / intervals; }
  Eigen::VectorXd Times() const;
};

/// Sampled states [eta; deta] and strain outputs, one row per time node.
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;
  Eigen::MatrixXd outputs;
  /// Set when a numeric propagation ran with a step outside its accuracy
  /// contract and the caller asked for a warning instead of an error.
  bool accuracy_warning = false;

  double step() const { return times.size() > 1 ? times(1) - times(0) : 0.0; }
};

/// eta_i(t) = a1_i cos(w_i t) + a2_i sin(w_i t) / w_i and its derivative;
/// outputs are C H(t).
Trajectory PropagateClosedForm(const TruncatedSystem& sys,
                               const InitialCondition& ic, double horizon,
                               double dt);

struct NumericOptions {
  /// RK4 steps taken per output interval.
  int substeps = 1;
  /// Bound on (dt / substeps) * max omega.
  double max_phase_step = 0.1;
  /// Throw on a violated bound; otherwise flag the trajectory.
  bool strict = true;
};

/// Smallest substep count meeting `max_phase_step` for the given dt.
int RequiredSubsteps(const TruncatedSystem& sys, double dt,
                     double max_phase_step = 0.1);

/// Fixed-step classical RK4 on dH/dt = A H.
Trajectory PropagateNumeric(const TruncatedSystem& sys,
                            const Eigen::Ref<const Eigen::VectorXd>& h0,
                            double horizon, double dt,
                            const NumericOptions& options = {});

/// Linear map H(t + dt) = Phi H(t) realised by PropagateNumeric over one dt.
Eigen::MatrixXd NumericTransitionMatrix(const TruncatedSystem& sys, double dt,
                                        const NumericOptions& options = {});

struct MeasurementRecord {
  Eigen::VectorXd times;
  Eigen::MatrixXd clean;
  Eigen::MatrixXd noisy;
  Eigen::MatrixXd noise_covariance;
  std::uint64_t seed = 0;
};

/// Adds zero-mean Gaussian noise with covariance R to each output sample.
/// R must be symmetric positive semidefinite; the draw is a deterministic
/// function of `seed`.
MeasurementRecord SynthesizeMeasurements(const Trajectory& trajectory,
                                         const Eigen::Ref<const Eigen::MatrixXd>& R,
                                         std::uint64_t seed);

enum class PerturbedField {
  kDisplacement,
  kVelocity,
};

/// Strain at one sensor for the initial fields perturbed by +/- eps phi_j.
struct OutputPair {
  Eigen::VectorXd times;
  Eigen::VectorXd plus;
  Eigen::VectorXd minus;
};

/// Perturbs the displacement (or velocity) field of `ic` by +/- epsilon times
/// mode shape `mode` (0-based) and returns the strain histories at `x`.
/// Because the mode shapes are orthogonal the perturbation acts on the single
/// modal coefficient alpha_{k,mode}.
OutputPair PerturbedOutputPair(const ModalBasis& basis,
                               const InitialCondition& ic, int mode,
                               PerturbedField which, double epsilon, double x,
                               double horizon, double dt);

}  // namespace beamobs
