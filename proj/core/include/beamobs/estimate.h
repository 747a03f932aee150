#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "beamobs/beam_model.h"

namespace beamobs {

/// Scaled unscented transform parameters and noise model.
struct UkfConfig {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
  Eigen::MatrixXd process_noise;
  Eigen::MatrixXd measurement_noise;
  Eigen::MatrixXd initial_covariance;
  double dt = 0.0;
  /// RK4 substeps per filter step; 0 selects the smallest count keeping
  /// substep * max omega below 0.1.
  int substeps = 0;

  /// Q = 1e-10 I, R = 1e-4 I, P0 = diag(1e-2 on eta, 1e-4 on deta).
  static UkfConfig Defaults(const TruncatedSystem& sys, double dt);

  /// lambda = alpha^2 (n + kappa) - n.
  double Lambda(int n) const { return alpha * alpha * (n + kappa) - n; }
  /// Throws std::invalid_argument on dimension mismatch, non-PSD noise or
  /// n + lambda <= 0.
  void Validate(int state_dim, int output_dim) const;
};

struct UkfState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  /// Number of Cholesky retries with diagonal jitter during the step.
  int jitter_events = 0;
};

using ProcessModel = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MeasurementModel = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// One predict/update cycle with 2n + 1 sigma points. Throws NumericalError
/// when the covariance cannot be factored even after jitter.
UkfState UkfStep(const UkfState& prior, const Eigen::Ref<const Eigen::VectorXd>& y,
                 const ProcessModel& process, const MeasurementModel& measure,
                 const UkfConfig& config);

/// Same, predicting every sigma point through PropagateNumeric over dt and
/// measuring through C.
UkfState UkfStep(const UkfState& prior, const Eigen::Ref<const Eigen::VectorXd>& y,
                 const TruncatedSystem& sys, const UkfConfig& config);

/// x -> Phi x.
ProcessModel LinearProcessModel(Eigen::MatrixXd transition);

/// Truth, estimate and covariance history of one filter run.
struct EstimationRun {
  Eigen::VectorXd times;
  Eigen::MatrixXd truth;
  Eigen::MatrixXd estimates;
  /// Diagonal of P per step.
  Eigen::MatrixXd variances;
  Eigen::VectorXd covariance_trace;
  /// Normalised estimation error squared per step.
  Eigen::VectorXd nees;
  std::vector<int> sensors;
  std::uint64_t seed = 0;
  bool diverged = false;
  int jitter_events = 0;

  Eigen::MatrixXd Residuals() const { return estimates - truth; }
  /// Mean of trace(P) over the filtered steps (t > 0).
  double TimeAveragedTrace() const;
  /// RMS over states of the final residual.
  double TerminalResidualRms() const;
  /// Fraction of (step, state) residuals inside +/- 3 sigma.
  double FractionWithinThreeSigma() const;
};

/// Simulates the truth in closed form, adds measurement noise, initialises the
/// estimate at truth + N(0, P0) and filters. `seed` drives both draws.
/// Flags divergence when trace(P) exceeds 1e6 times its initial value.
EstimationRun RunEstimation(const TruncatedSystem& sys,
                            const InitialCondition& truth,
                            const UkfConfig& config, double horizon,
                            std::uint64_t seed);

/// A sensor placement to compare; `random` placements are redrawn per trial.
struct PlacementCandidate {
  std::string name;
  std::vector<int> nodes;
  bool random = false;
};

struct ComparisonRow {
  std::string name;
  /// Median over trials of the time-averaged trace(P).
  double median_mean_trace = 0.0;
  /// Median over trials of the terminal residual RMS.
  double median_terminal_rms = 0.0;
  /// 100 (1 - median_mean_trace / reference median_mean_trace).
  double percent_reduction = 0.0;
  /// Median over trials of trace(P)(t) at each time step.
  Eigen::VectorXd median_trace;
  std::vector<double> trial_mean_traces;
  std::vector<int> first_trial_sensors;
};

struct PlacementComparison {
  std::string reference;
  Eigen::VectorXd times;
  std::vector<ComparisonRow> rows;

  const ComparisonRow& Row(const std::string& name) const;
};

/// Runs `trials` seeded estimation runs per candidate on grid-node sensors of
/// `basis` and reports medians and reductions relative to `reference`.
/// `config` supplies Q, R, P0 and dt; every candidate must use R.rows()
/// sensors.
PlacementComparison ComparePlacements(const ModalBasis& basis,
                                      std::span<const PlacementCandidate> candidates,
                                      int trials, const UkfConfig& config,
                                      const InitialCondition& truth,
                                      double horizon, std::uint64_t seed,
                                      const std::string& reference);

/// Seed for trial k of a study seeded with `seed`.
std::uint64_t TrialSeed(std::uint64_t seed, int trial);

}  // namespace beamobs
