#include "beamobs/simulate.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

namespace beamobs {
namespace {

const ModalBasis& Basis8() {
  static const ModalBasis basis = BuildModalBasis(BeamSpec::AluminumStrip(), 8, 501);
  return basis;
}

TEST(TimeGrid, FromStep) {
  const TimeGrid exact = TimeGrid::FromStep(1.0, 0.25);
  EXPECT_EQ(exact.intervals, 4);
  const TimeGrid rounded_up = TimeGrid::FromStep(1.0, 0.3);
  EXPECT_EQ(rounded_up.intervals, 4);
  EXPECT_DOUBLE_EQ(rounded_up.time(4), 1.0);
  EXPECT_THROW(TimeGrid::FromStep(1.0, 0.0), std::invalid_argument);
}

TEST(PropagateClosedForm, ConservesModalEnergy) {
  const ModalBasis& basis = Basis8();
  const double x[] = {0.3};
  const TruncatedSystem sys = AssembleTruncatedSystem(basis, x);
  const InitialCondition ic = InitialCondition::FromCoefficients(
      Eigen::VectorXd::LinSpaced(8, 1.0, 0.2), Eigen::VectorXd::LinSpaced(8, -3.0, 5.0));
  const Trajectory traj = PropagateClosedForm(sys, ic, 2.0, 1e-3);
  for (int i = 0; i < 8; ++i) {
    const double w = basis.frequencies(i);
    const Eigen::ArrayXd energy = w * w * traj.states.col(i).array().square() +
                                  traj.states.col(8 + i).array().square();
    EXPECT_LT((energy - energy(0)).abs().maxCoeff(), 1e-10 * energy(0)) << i;
  }
  EXPECT_TRUE(traj.outputs.col(0).isApprox(traj.states * sys.C.row(0).transpose()));
}

TEST(PropagateNumeric, SingleModeReturnsAfterOnePeriod) {
  const ModalBasis basis = BuildModalBasis(BeamSpec::AluminumStrip(), 1, 101);
  const double x[] = {0.5};
  const TruncatedSystem sys = AssembleTruncatedSystem(basis, x);
  const double T = basis.SlowestPeriod();
  Eigen::VectorXd h0(2);
  h0 << 0.01, -0.02;
  const Trajectory traj = PropagateNumeric(sys, h0, T, T / 2000);
  const Eigen::VectorXd end = traj.states.bottomRows(1).transpose();
  EXPECT_LT((end - h0).norm(), 1e-6 * h0.norm());
}

TEST(PropagateNumeric, MatchesClosedFormOnEightModes) {
  const ModalBasis& basis = Basis8();
  const double x[] = {0.1, 1.3};
  const TruncatedSystem sys = AssembleTruncatedSystem(basis, x);
  const InitialCondition ic = InitialCondition::FromCoefficients(
      Eigen::VectorXd::Ones(8), Eigen::VectorXd::Constant(8, 0.5));
  const double dt = 1e-3;
  NumericOptions options;
  options.substeps = 100;
  const Trajectory numeric = PropagateNumeric(sys, ic.State(), 2.0, dt, options);
  const Trajectory exact = PropagateClosedForm(sys, ic, 2.0, dt);
  ASSERT_EQ(numeric.states.rows(), exact.states.rows());
  const double scale = exact.states.rowwise().norm().maxCoeff();
  EXPECT_LT((numeric.states - exact.states).rowwise().norm().maxCoeff(), 1e-6 * scale);
}

TEST(PropagateNumeric, EnforcesThePhaseStepContract) {
  const ModalBasis& basis = Basis8();
  const double x[] = {0.1};
  const TruncatedSystem sys = AssembleTruncatedSystem(basis, x);
  const double dt = 1e-3;
  const int needed = RequiredSubsteps(sys, dt);
  EXPECT_LE(dt / needed * basis.frequencies(7), 0.1);
  EXPECT_GT(dt / (needed - 1) * basis.frequencies(7), 0.1);
  const Eigen::VectorXd h0 = Eigen::VectorXd::Ones(16);
  EXPECT_THROW(PropagateNumeric(sys, h0, 0.01, dt), std::invalid_argument);
  NumericOptions lenient;
  lenient.strict = false;
  EXPECT_TRUE(PropagateNumeric(sys, h0, 0.01, dt, lenient).accuracy_warning);
}

TEST(NumericTransitionMatrix, ReproducesOneStep) {
  const ModalBasis& basis = Basis8();
  const double x[] = {0.7};
  const TruncatedSystem sys = AssembleTruncatedSystem(basis, x);
  NumericOptions options;
  options.substeps = 4;
  const double dt = 2e-4;
  const Eigen::MatrixXd phi = NumericTransitionMatrix(sys, dt, options);
  const Eigen::VectorXd h0 = Eigen::VectorXd::LinSpaced(16, -1.0, 1.0);
  const Trajectory traj = PropagateNumeric(sys, h0, dt, dt, options);
  EXPECT_LT((phi * h0 - traj.states.row(1).transpose()).norm(), 1e-13 * h0.norm() * 1e3);
}

TEST(SynthesizeMeasurements, NoiseStatisticsAndDeterminism) {
  const ModalBasis& basis = Basis8();
  const double x[] = {0.1, 0.9};
  const TruncatedSystem sys = AssembleTruncatedSystem(basis, x);
  const Trajectory traj =
      PropagateClosedForm(sys, InitialCondition::Zero(8), 1.0, 1.0 / 20000);
  Eigen::Matrix2d R;
  R << 2e-4, 5e-5, 5e-5, 1e-4;
  const MeasurementRecord a = SynthesizeMeasurements(traj, R, 11);
  const MeasurementRecord b = SynthesizeMeasurements(traj, R, 11);
  EXPECT_EQ(a.noisy, b.noisy);
  const Eigen::MatrixXd noise = a.noisy - a.clean;
  const Eigen::MatrixXd centred = noise.rowwise() - noise.colwise().mean();
  const Eigen::Matrix2d sample = centred.transpose() * centred / (noise.rows() - 1.0);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(sample(i, j), R(i, j), 0.2 * R(i, j));
  }
  const MeasurementRecord c = SynthesizeMeasurements(traj, R, 12);
  EXPECT_NE(c.noisy, a.noisy);
  Eigen::Matrix2d bad;
  bad << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(SynthesizeMeasurements(traj, bad, 1), std::invalid_argument);
}

TEST(PerturbedOutputPair, CentralDifferenceIsTheModalSensitivity) {
  const ModalBasis& basis = Basis8();
  const InitialCondition ic = InitialCondition::FromCoefficients(
      Eigen::VectorXd::Constant(8, 0.3), Eigen::VectorXd::Constant(8, -0.1));
  const double x = 0.37;
  const double h = basis.beam.half_height();
  for (int j : {0, 3, 7}) {
    const double w = basis.frequencies(j);
    const double p = h * basis.mode(j).Curvature(x);
    for (auto field : {PerturbedField::kDisplacement, PerturbedField::kVelocity}) {
      const OutputPair big = PerturbedOutputPair(basis, ic, j, field, 1e-3, x, 0.5, 1e-3);
      const OutputPair small = PerturbedOutputPair(basis, ic, j, field, 1e-6, x, 0.5, 1e-3);
      const Eigen::VectorXd d_big = (big.plus - big.minus) / 2e-3;
      const Eigen::VectorXd d_small = (small.plus - small.minus) / 2e-6;
      Eigen::VectorXd expected(big.times.size());
      for (Eigen::Index k = 0; k < expected.size(); ++k) {
        const double t = big.times(k);
        expected(k) = field == PerturbedField::kDisplacement ? p * std::cos(w * t)
                                                             : p * std::sin(w * t) / w;
      }
      const double scale = expected.cwiseAbs().maxCoeff();
      EXPECT_LT((d_big - expected).cwiseAbs().maxCoeff(), 1e-10 * scale);
      // Cancellation against the base trajectory bounds the agreement.
      const double base = small.plus.cwiseAbs().maxCoeff();
      EXPECT_LT((d_big - d_small).cwiseAbs().maxCoeff(), 8 * 2.2e-16 * base / 2e-6);
    }
  }
  const InitialCondition rest = InitialCondition::Zero(8);
  for (int j : {0, 3, 7}) {
    for (auto field : {PerturbedField::kDisplacement, PerturbedField::kVelocity}) {
      const OutputPair big = PerturbedOutputPair(basis, rest, j, field, 1e-3, x, 0.5, 1e-3);
      const OutputPair small = PerturbedOutputPair(basis, rest, j, field, 1e-6, x, 0.5, 1e-3);
      const Eigen::VectorXd d_big = (big.plus - big.minus) / 2e-3;
      const Eigen::VectorXd d_small = (small.plus - small.minus) / 2e-6;
      EXPECT_LT((d_big - d_small).cwiseAbs().maxCoeff(),
                1e-10 * d_big.cwiseAbs().maxCoeff());
    }
  }
  EXPECT_THROW(PerturbedOutputPair(basis, ic, 8, PerturbedField::kDisplacement, 1e-3, x, 0.5,
                                   1e-3),
               std::invalid_argument);
  EXPECT_THROW(PerturbedOutputPair(basis, ic, 0, PerturbedField::kDisplacement, 0.0, x, 0.5,
                                   1e-3),
               std::invalid_argument);
}

}  // namespace
}  // namespace beamobs
