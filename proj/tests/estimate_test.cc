#include "beamobs/estimate.h"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <gtest/gtest.h>

#include "beamobs/errors.h"
#include "beamobs/simulate.h"

namespace beamobs {
namespace {

const ModalBasis& Basis4() {
  static const ModalBasis basis = BuildModalBasis(BeamSpec::AluminumStrip(), 4, 201);
  return basis;
}

TruncatedSystem TwoSensors() {
  const int nodes[] = {10, 90};
  return AssembleTruncatedSystemAtNodes(Basis4(), nodes);
}

InitialCondition SmallTruth(int modes) {
  Eigen::VectorXd a1 = Eigen::VectorXd::Zero(modes);
  Eigen::VectorXd a2 = Eigen::VectorXd::Zero(modes);
  a1(0) = 0.02;
  a1(1) = -0.003;
  a2(0) = 0.05;
  return InitialCondition::FromCoefficients(a1, a2);
}

double Rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

TEST(Ukf, MatchesKalmanFilterOnLinearModel) {
  const TruncatedSystem sys = TwoSensors();
  const double dt = Basis4().SlowestPeriod() / 2000;
  UkfConfig config = UkfConfig::Defaults(sys, dt);
  NumericOptions options;
  options.substeps = RequiredSubsteps(sys, dt);
  const Eigen::MatrixXd Phi = NumericTransitionMatrix(sys, dt, options);
  const MeasurementModel measure = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(sys.C * x);
  };
  const Trajectory truth = PropagateClosedForm(sys, SmallTruth(4), 100 * dt, dt);
  const MeasurementRecord record = SynthesizeMeasurements(truth, config.measurement_noise, 4);

  UkfState ukf{Eigen::VectorXd::Constant(8, 0.01), config.initial_covariance, 0};
  Eigen::VectorXd x = ukf.mean;
  Eigen::MatrixXd P = ukf.covariance;
  const Eigen::MatrixXd& C = sys.C;
  for (int k = 1; k <= 100; ++k) {
    const Eigen::VectorXd y = record.noisy.row(k).transpose();
    ukf = UkfStep(ukf, y, LinearProcessModel(Phi), measure, config);
    x = Phi * x;
    P = Phi * P * Phi.transpose() + config.process_noise;
    const Eigen::MatrixXd S = C * P * C.transpose() + config.measurement_noise;
    const Eigen::MatrixXd K = P * C.transpose() * S.inverse();
    x += K * (y - C * x);
    P -= K * S * K.transpose();
    P = 0.5 * (P + P.transpose());
    ASSERT_LT(Rel(ukf.mean, x), 1e-6) << k;
    ASSERT_LT(Rel(ukf.covariance, P), 1e-6) << k;
  }
  EXPECT_EQ(ukf.jitter_events, 0);
}

TEST(Ukf, HugeMeasurementNoiseOnlyPredicts) {
  const TruncatedSystem sys = TwoSensors();
  const double dt = Basis4().SlowestPeriod() / 500;
  UkfConfig config = UkfConfig::Defaults(sys, dt);
  config.measurement_noise = 1e14 * Eigen::MatrixXd::Identity(2, 2);
  NumericOptions options;
  options.substeps = RequiredSubsteps(sys, dt);
  const Eigen::MatrixXd Phi = NumericTransitionMatrix(sys, dt, options);
  UkfState state{Eigen::VectorXd::Constant(8, 0.01), config.initial_covariance, 0};
  Eigen::VectorXd x = state.mean;
  Eigen::MatrixXd P = state.covariance;
  for (int k = 0; k < 20; ++k) {
    state = UkfStep(state, Eigen::Vector2d(1.0, -1.0), sys, config);
    x = Phi * x;
    P = Phi * P * Phi.transpose() + config.process_noise;
  }
  EXPECT_LT(Rel(state.mean, x), 1e-6);
  EXPECT_LT(Rel(state.covariance, P), 1e-6);
}

TEST(Ukf, ZeroUncertaintyTracksTruthExactly) {
  const TruncatedSystem sys = TwoSensors();
  const double horizon = Basis4().SlowestPeriod();
  UkfConfig config = UkfConfig::Defaults(sys, horizon / 1000);
  config.initial_covariance.setZero();
  config.process_noise.setZero();
  const EstimationRun run = RunEstimation(sys, SmallTruth(4), config, horizon, 9);
  EXPECT_LT(run.Residuals().cwiseAbs().maxCoeff(), 1e-8 * run.truth.cwiseAbs().maxCoeff());
  EXPECT_DOUBLE_EQ(run.covariance_trace.maxCoeff(), 0.0);
  EXPECT_FALSE(run.diverged);
}

TEST(Ukf, CovarianceVolumeNeverGrowsWithoutProcessNoise) {
  const TruncatedSystem sys = TwoSensors();
  const double horizon = Basis4().SlowestPeriod() / 4;
  UkfConfig config = UkfConfig::Defaults(sys, horizon / 200);
  config.process_noise.setZero();
  UkfState state{Eigen::VectorXd::Zero(8), config.initial_covariance, 0};
  double previous = Eigen::LDLT<Eigen::MatrixXd>(state.covariance).vectorD().array().log().sum();
  for (int k = 0; k < 200; ++k) {
    state = UkfStep(state, Eigen::Vector2d::Zero(), sys, config);
    EXPECT_TRUE(state.covariance.isApprox(state.covariance.transpose()));
    const double logdet =
        Eigen::LDLT<Eigen::MatrixXd>(state.covariance).vectorD().array().log().sum();
    EXPECT_LE(logdet, previous + 1e-6) << k;
    previous = logdet;
  }
}

TEST(Ukf, RunsAreDeterministicInTheSeed) {
  const TruncatedSystem sys = TwoSensors();
  const double horizon = Basis4().SlowestPeriod() / 2;
  const UkfConfig config = UkfConfig::Defaults(sys, horizon / 500);
  const EstimationRun a = RunEstimation(sys, SmallTruth(4), config, horizon, 5);
  const EstimationRun b = RunEstimation(sys, SmallTruth(4), config, horizon, 5);
  const EstimationRun c = RunEstimation(sys, SmallTruth(4), config, horizon, 6);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.covariance_trace, b.covariance_trace);
  EXPECT_NE(a.estimates, c.estimates);
  EXPECT_EQ(a.sensors, (std::vector<int>{10, 90}));
}

TEST(Ukf, NeesIsConsistent) {
  const TruncatedSystem sys = TwoSensors();
  const double horizon = Basis4().SlowestPeriod() / 2;
  const UkfConfig config = UkfConfig::Defaults(sys, horizon / 500);
  double total = 0.0;
  int count = 0;
  double inside = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const EstimationRun run =
        RunEstimation(sys, SmallTruth(4), config, horizon, TrialSeed(77, trial));
    total += run.nees.sum();
    count += static_cast<int>(run.nees.size());
    inside += run.FractionWithinThreeSigma();
  }
  const double mean = total / count;
  EXPECT_GT(mean, 0.5 * 8);
  EXPECT_LT(mean, 1.5 * 8);
  EXPECT_GT(inside / 10, 0.97);
}

TEST(Ukf, ValidateRejectsBadConfigurations) {
  const TruncatedSystem sys = TwoSensors();
  const UkfConfig good = UkfConfig::Defaults(sys, 1e-3);
  EXPECT_NO_THROW(good.Validate(8, 2));
  EXPECT_THROW(good.Validate(8, 3), std::invalid_argument);
  UkfConfig bad = good;
  bad.measurement_noise(0, 0) = -1.0;
  EXPECT_THROW(bad.Validate(8, 2), std::invalid_argument);
  bad = good;
  bad.process_noise(0, 1) = 1.0;
  EXPECT_THROW(bad.Validate(8, 2), std::invalid_argument);
  bad = good;
  bad.alpha = 0.0;
  EXPECT_THROW(bad.Validate(8, 2), std::invalid_argument);
  bad = good;
  bad.dt = 0.0;
  EXPECT_THROW(bad.Validate(8, 2), std::invalid_argument);
}

TEST(Ukf, JittersSingularCovarianceOnce) {
  const TruncatedSystem sys = TwoSensors();
  UkfConfig config = UkfConfig::Defaults(sys, 1e-4);
  Eigen::MatrixXd P = config.initial_covariance;
  P(0, 0) = 0.0;
  UkfState state{Eigen::VectorXd::Zero(8), P, 0};
  state = UkfStep(state, Eigen::Vector2d::Zero(), sys, config);
  EXPECT_GE(state.jitter_events, 1);
  EXPECT_TRUE(state.covariance.allFinite());
  Eigen::MatrixXd indefinite = config.initial_covariance;
  indefinite(1, 1) = -1.0;
  EXPECT_THROW(UkfStep({Eigen::VectorXd::Zero(8), indefinite, 0}, Eigen::Vector2d::Zero(),
                       sys, config),
               std::exception);
}

TEST(Comparison, IdenticalPlacementsGiveZeroReduction) {
  const double horizon = Basis4().SlowestPeriod() / 4;
  const TruncatedSystem sys = TwoSensors();
  const UkfConfig config = UkfConfig::Defaults(sys, horizon / 200);
  const std::vector<PlacementCandidate> candidates = {{"a", {10, 90}, false},
                                                      {"b", {10, 90}, false}};
  const PlacementComparison cmp =
      ComparePlacements(Basis4(), candidates, 3, config, SmallTruth(4), horizon, 1, "a");
  EXPECT_DOUBLE_EQ(cmp.Row("b").percent_reduction, 0.0);
  EXPECT_EQ(cmp.Row("a").trial_mean_traces, cmp.Row("b").trial_mean_traces);
  EXPECT_THROW(cmp.Row("zzz"), std::out_of_range);
}

TEST(Comparison, RootSensorsBeatTipSensors) {
  const double horizon = Basis4().SlowestPeriod() / 2;
  const TruncatedSystem sys = TwoSensors();
  const UkfConfig config = UkfConfig::Defaults(sys, horizon / 300);
  const std::vector<PlacementCandidate> candidates = {
      {"tip", {199, 200}, false}, {"root", {0, 1}, false}, {"random", {}, true}};
  const PlacementComparison cmp =
      ComparePlacements(Basis4(), candidates, 3, config, SmallTruth(4), horizon, 2, "tip");
  EXPECT_GT(cmp.Row("root").percent_reduction, 0.0);
  EXPECT_LT(cmp.Row("root").median_mean_trace, cmp.Row("tip").median_mean_trace);
  EXPECT_EQ(cmp.Row("random").first_trial_sensors.size(), 2u);
  const std::vector<PlacementCandidate> wrong = {{"x", {1, 2, 3}, false},
                                                 {"y", {1, 2}, false}};
  EXPECT_THROW(
      ComparePlacements(Basis4(), wrong, 1, config, SmallTruth(4), horizon, 2, "x"),
      std::invalid_argument);
}

TEST(Comparison, TrialSeedsAreDistinct) {
  EXPECT_NE(TrialSeed(1, 0), TrialSeed(1, 1));
  EXPECT_NE(TrialSeed(1, 0), TrialSeed(2, 0));
  EXPECT_EQ(TrialSeed(3, 4), TrialSeed(3, 4));
}

}  // namespace
}  // namespace beamobs
