#include "beamobs/estimate.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "beamobs/errors.h"
#include "beamobs/placement.h"
#include "beamobs/simulate.h"

namespace beamobs {

namespace {

void RequirePsd(const Eigen::MatrixXd& M, int dim, const char* name) {
  if (M.rows() != dim || M.cols() != dim) {
    throw std::invalid_argument(std::string("UkfConfig: ") + name +
                                " has the wrong dimension");
  }
  if (dim == 0) return;
  const double scale = std::max(1e-300, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(std::string("UkfConfig: ") + name + " not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) < -1e-12 * scale) {
    throw std::invalid_argument(std::string("UkfConfig: ") + name + " not PSD");
  }
}

// Lower Cholesky factor, retrying once with 1e-12 trace(P)/n jitter.
Eigen::MatrixXd FactorCovariance(const Eigen::MatrixXd& P, int& jitter_events) {
  const int n = static_cast<int>(P.rows());
  if (P.isZero(0.0)) return Eigen::MatrixXd::Zero(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double jitter = 1e-12 * std::max(P.trace(), 0.0) / n;
  llt.compute(P + jitter * Eigen::MatrixXd::Identity(n, n));
  ++jitter_events;
  if (llt.info() != Eigen::Success || !(jitter > 0.0)) {
    throw NumericalError("UKF: covariance is not positive definite after jitter");
  }
  return llt.matrixL();
}

struct SigmaWeights {
  double spread;
  double mean0;
  double cov0;
  double rest;
};

SigmaWeights MakeWeights(const UkfConfig& config, int n) {
  const double lambda = config.Lambda(n);
  const double c = n + lambda;
  return {std::sqrt(c), lambda / c,
          lambda / c + (1.0 - config.alpha * config.alpha + config.beta),
          1.0 / (2.0 * c)};
}

// Sigma points as columns: [m, m + S_i, m - S_i].
Eigen::MatrixXd SigmaPoints(const Eigen::VectorXd& mean, const Eigen::MatrixXd& P,
                            double spread, int& jitter_events) {
  const int n = static_cast<int>(mean.size());
  const Eigen::MatrixXd S = spread * FactorCovariance(P, jitter_events);
  Eigen::MatrixXd X(n, 2 * n + 1);
  X.col(0) = mean;
  for (int i = 0; i < n; ++i) {
    X.col(1 + i) = mean + S.col(i);
    X.col(1 + n + i) = mean - S.col(i);
  }
  return X;
}

// Weighted mean and centred images; offsets are formed against the image of
// the central point to avoid cancellation from the large negative weight.
struct Transformed {
  Eigen::VectorXd mean;
  Eigen::MatrixXd centred;
};

Transformed Unscented(const Eigen::MatrixXd& images, const SigmaWeights& w) {
  const Eigen::Index count = images.cols();
  Eigen::MatrixXd offsets = images.rightCols(count - 1).colwise() - images.col(0);
  const Eigen::VectorXd shift = w.rest * offsets.rowwise().sum();
  Transformed out;
  out.mean = images.col(0) + shift;
  out.centred.resize(images.rows(), count);
  out.centred.col(0) = -shift;
  out.centred.rightCols(count - 1) = offsets.colwise() - shift;
  return out;
}

Eigen::MatrixXd WeightedOuter(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const SigmaWeights& w) {
  const Eigen::Index count = a.cols();
  Eigen::MatrixXd out = w.cov0 * a.col(0) * b.col(0).transpose();
  out.noalias() += w.rest * a.rightCols(count - 1) * b.rightCols(count - 1).transpose();
  return out;
}

}  // namespace

UkfConfig UkfConfig::Defaults(const TruncatedSystem& sys, double dt) {
  const int n = sys.state_dim();
  const int modes = sys.num_modes();
  UkfConfig config;
  config.dt = dt;
  config.process_noise = 1e-10 * Eigen::MatrixXd::Identity(n, n);
  config.measurement_noise =
      1e-4 * Eigen::MatrixXd::Identity(sys.num_outputs(), sys.num_outputs());
  config.initial_covariance = Eigen::MatrixXd::Zero(n, n);
  config.initial_covariance.diagonal().head(modes).setConstant(1e-2);
  config.initial_covariance.diagonal().tail(modes).setConstant(1e-4);
  return config;
}

void UkfConfig::Validate(int state_dim, int output_dim) const {
  if (!(dt > 0.0)) throw std::invalid_argument("UkfConfig: dt must be > 0");
  if (substeps < 0) throw std::invalid_argument("UkfConfig: substeps < 0");
  if (!(state_dim + Lambda(state_dim) > 0.0)) {
    throw std::invalid_argument("UkfConfig: n + lambda must be positive");
  }
  RequirePsd(process_noise, state_dim, "Q");
  RequirePsd(measurement_noise, output_dim, "R");
  RequirePsd(initial_covariance, state_dim, "P0");
}

UkfState UkfStep(const UkfState& prior, const Eigen::Ref<const Eigen::VectorXd>& y,
                 const ProcessModel& process, const MeasurementModel& measure,
                 const UkfConfig& config) {
  const int n = static_cast<int>(prior.mean.size());
  const SigmaWeights w = MakeWeights(config, n);
  UkfState next;
  next.jitter_events = 0;

  // Predict.
  const Eigen::MatrixXd X =
      SigmaPoints(prior.mean, prior.covariance, w.spread, next.jitter_events);
  Eigen::MatrixXd propagated(n, X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) propagated.col(j) = process(X.col(j));
  const Transformed predicted = Unscented(propagated, w);
  Eigen::MatrixXd P_pred =
      WeightedOuter(predicted.centred, predicted.centred, w) + config.process_noise;
  P_pred = 0.5 * (P_pred + P_pred.transpose()).eval();

  // Update with regenerated sigma points.
  const Eigen::MatrixXd Xp =
      SigmaPoints(predicted.mean, P_pred, w.spread, next.jitter_events);
  const Eigen::Index p = y.size();
  Eigen::MatrixXd images(p, Xp.cols());
  for (Eigen::Index j = 0; j < Xp.cols(); ++j) images.col(j) = measure(Xp.col(j));
  const Transformed z = Unscented(images, w);
  const Eigen::MatrixXd state_offsets = Xp.colwise() - predicted.mean;
  Eigen::MatrixXd Pzz = WeightedOuter(z.centred, z.centred, w) + config.measurement_noise;
  Pzz = 0.5 * (Pzz + Pzz.transpose()).eval();
  const Eigen::MatrixXd Pxz = WeightedOuter(state_offsets, z.centred, w);
  const Eigen::LDLT<Eigen::MatrixXd> innovation(Pzz);
  if (innovation.info() != Eigen::Success) {
    throw NumericalError("UKF: innovation covariance factorisation failed");
  }
  const Eigen::MatrixXd gain = innovation.solve(Pxz.transpose()).transpose();
  next.mean = predicted.mean + gain * (y - z.mean);
  next.covariance = P_pred - gain * Pzz * gain.transpose();
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();
  next.jitter_events += prior.jitter_events;
  return next;
}

UkfState UkfStep(const UkfState& prior, const Eigen::Ref<const Eigen::VectorXd>& y,
                 const TruncatedSystem& sys, const UkfConfig& config) {
  NumericOptions options;
  options.substeps =
      config.substeps > 0 ? config.substeps : RequiredSubsteps(sys, config.dt);
  const ProcessModel process = [&sys, &config, &options](const Eigen::VectorXd& x) {
    const Trajectory one = PropagateNumeric(sys, x, config.dt, config.dt, options);
    return Eigen::VectorXd(one.states.row(1).transpose());
  };
  const MeasurementModel measure = [&sys](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(sys.C * x);
  };
  return UkfStep(prior, y, process, measure, config);
}

ProcessModel LinearProcessModel(Eigen::MatrixXd transition) {
  return [phi = std::move(transition)](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(phi * x);
  };
}

double EstimationRun::TimeAveragedTrace() const {
  if (covariance_trace.size() < 2) return covariance_trace.size() ? covariance_trace(0) : 0.0;
  return covariance_trace.tail(covariance_trace.size() - 1).mean();
}

double EstimationRun::TerminalResidualRms() const {
  const Eigen::VectorXd last = (estimates.bottomRows(1) - truth.bottomRows(1)).transpose();
  return std::sqrt(last.squaredNorm() / static_cast<double>(last.size()));
}

double EstimationRun::FractionWithinThreeSigma() const {
  const Eigen::ArrayXXd residual = (estimates - truth).array().abs();
  const Eigen::ArrayXXd bound = 3.0 * variances.array().cwiseMax(0.0).sqrt();
  return static_cast<double>((residual <= bound).count()) /
         static_cast<double>(residual.size());
}

EstimationRun RunEstimation(const TruncatedSystem& sys,
                            const InitialCondition& truth,
                            const UkfConfig& config, double horizon,
                            std::uint64_t seed) {
  const int n = sys.state_dim();
  const int p = sys.num_outputs();
  if (p == 0) throw std::invalid_argument("RunEstimation: no sensors");
  config.Validate(n, p);

  const Trajectory reference = PropagateClosedForm(sys, truth, horizon, config.dt);
  const MeasurementRecord record =
      SynthesizeMeasurements(reference, config.measurement_noise, seed);
  NumericOptions options;
  options.substeps =
      config.substeps > 0 ? config.substeps : RequiredSubsteps(sys, reference.step());
  const ProcessModel process =
      LinearProcessModel(NumericTransitionMatrix(sys, reference.step(), options));
  const MeasurementModel measure = [&sys](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(sys.C * x);
  };

  EstimationRun run;
  run.seed = seed;
  run.times = reference.times;
  run.truth = reference.states;
  for (int index : sys.grid_indices) run.sensors.push_back(index);
  const Eigen::Index steps = reference.times.size();
  run.estimates.resize(steps, n);
  run.variances.resize(steps, n);
  run.covariance_trace.resize(steps);
  run.nees.resize(steps);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd draw(n);
  for (int i = 0; i < n; ++i) draw(i) = normal(rng);
  int unused = 0;
  UkfState state;
  state.covariance = config.initial_covariance;
  const Eigen::LLT<Eigen::MatrixXd> p0(config.initial_covariance);
  const Eigen::MatrixXd p0_factor =
      p0.info() == Eigen::Success
          ? Eigen::MatrixXd(p0.matrixL())
          : FactorCovariance(config.initial_covariance, unused);
  state.mean = reference.states.row(0).transpose() + p0_factor * draw;

  const double initial_trace = config.initial_covariance.trace();
  const auto record_step = [&](Eigen::Index k) {
    run.estimates.row(k) = state.mean.transpose();
    run.variances.row(k) = state.covariance.diagonal().transpose();
    run.covariance_trace(k) = state.covariance.trace();
    const Eigen::VectorXd error = state.mean - reference.states.row(k).transpose();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(state.covariance);
    run.nees(k) = error.dot(ldlt.solve(error));
    if (run.covariance_trace(k) > 1e6 * initial_trace) run.diverged = true;
  };
  record_step(0);
  for (Eigen::Index k = 1; k < steps; ++k) {
    state = UkfStep(state, record.noisy.row(k).transpose(), process, measure, config);
    record_step(k);
  }
  run.jitter_events = state.jitter_events;
  return run;
}

const ComparisonRow& PlacementComparison::Row(const std::string& name) const {
  for (const ComparisonRow& row : rows) {
    if (row.name == name) return row;
  }
  throw std::out_of_range("PlacementComparison: no row named " + name);
}

std::uint64_t TrialSeed(std::uint64_t seed, int trial) {
  // splitmix64 of (seed, trial)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

PlacementComparison ComparePlacements(const ModalBasis& basis,
                                      std::span<const PlacementCandidate> candidates,
                                      int trials, const UkfConfig& config,
                                      const InitialCondition& truth,
                                      double horizon, std::uint64_t seed,
                                      const std::string& reference) {
  if (candidates.size() < 2) {
    throw std::invalid_argument("ComparePlacements: need at least two placements");
  }
  if (trials < 1) throw std::invalid_argument("ComparePlacements: trials < 1");
  const int p = static_cast<int>(config.measurement_noise.rows());
  PlacementComparison out;
  out.reference = reference;
  for (const PlacementCandidate& candidate : candidates) {
    if (!candidate.random && static_cast<int>(candidate.nodes.size()) != p) {
      throw std::invalid_argument("ComparePlacements: sensor count must match R");
    }
    ComparisonRow row;
    row.name = candidate.name;
    std::vector<Eigen::VectorXd> traces;
    std::vector<double> terminal;
    for (int trial = 0; trial < trials; ++trial) {
      const std::uint64_t trial_seed = TrialSeed(seed, trial);
      const std::vector<int> nodes =
          candidate.random
              ? RandomPlacement(basis.grid_size(), p, TrialSeed(~seed, trial))
              : candidate.nodes;
      const TruncatedSystem sys = AssembleTruncatedSystemAtNodes(basis, nodes);
      const EstimationRun run = RunEstimation(sys, truth, config, horizon, trial_seed);
      if (trial == 0) {
        row.first_trial_sensors = nodes;
        out.times = run.times;
      }
      row.trial_mean_traces.push_back(run.TimeAveragedTrace());
      terminal.push_back(run.TerminalResidualRms());
      traces.push_back(run.covariance_trace);
    }
    row.median_mean_trace = Median(row.trial_mean_traces);
    row.median_terminal_rms = Median(terminal);
    row.median_trace.resize(traces.front().size());
    for (Eigen::Index k = 0; k < row.median_trace.size(); ++k) {
      std::vector<double> at_k;
      for (const Eigen::VectorXd& trace : traces) at_k.push_back(trace(k));
      row.median_trace(k) = Median(at_k);
    }
    out.rows.push_back(std::move(row));
  }
  const double ref = out.Row(reference).median_mean_trace;
  for (ComparisonRow& row : out.rows) {
    row.percent_reduction = 100.0 * (1.0 - row.median_mean_trace / ref);
  }
  return out;
}

}  // namespace beamobs
