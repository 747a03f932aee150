#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "beamobs/beam_model.h"
#include "beamobs/quadrature.h"

namespace beamobs {

enum class GramianKind {
  kTruncatedAnalytical,
  kTruncatedEmpirical,
  kContinuumAnalytical,
  kContinuumEmpirical,
};

std::string_view ToString(GramianKind kind);

/// Observability Gramian plus where it came from.
///
/// Truncated kinds are n x n over the state [eta; deta]; continuum kinds are
/// the 2 x 2 Gramian of the summed displacement/velocity sensitivities at one
/// sensor location.
struct Gramian {
  Eigen::MatrixXd matrix;
  GramianKind kind = GramianKind::kTruncatedAnalytical;
  std::vector<double> sensor_locations;
  double horizon = 0.0;
  std::optional<double> epsilon;
  int num_modes = 0;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

/// Options shared by the sampled (quadrature-based) Gramians.
struct SampledGramianOptions {
  double horizon = 0.0;
  double dt = 0.0;
  QuadratureRule rule = QuadratureRule::kSimpson;
};

/// integral_0^t exp(A' s) C' C exp(A s) ds evaluated with exact
/// trigonometric antiderivatives in the modal coordinates.
Gramian TruncatedAnalyticalGramian(const TruncatedSystem& sys, double horizon);

/// Same integral from 2n simulations with the state perturbed by
/// +/- epsilon e_i around `base_state` (zero when empty), time-integrated with
/// `options.rule`.
Gramian TruncatedEmpiricalGramian(const TruncatedSystem& sys, double epsilon,
                                  const SampledGramianOptions& options,
                                  const Eigen::VectorXd& base_state = {});

/// 2 x 2 continuum Gramian at x from the summed modal sensitivities
/// [sum_j h phi_j''(x) cos(w_j t), sum_j h phi_j''(x) sin(w_j t) / w_j].
Gramian ContinuumAnalyticalGramian(const ModalBasis& basis, double x,
                                   const SampledGramianOptions& options);

/// Per-(field, mode) perturbation sizes for the continuum empirical Gramian.
/// Row 0 holds displacement epsilons, row 1 velocity epsilons; one column per
/// mode.
using PerturbationSizes = Eigen::Matrix<double, 2, Eigen::Dynamic>;

PerturbationSizes UniformPerturbation(int num_modes, double epsilon);

/// Continuum Gramian rebuilt from central differences of +/- eps phi_j
/// perturbed simulations summed over modes.
Gramian ContinuumEmpiricalGramian(const ModalBasis& basis, double x,
                                  const PerturbationSizes& epsilons,
                                  const SampledGramianOptions& options,
                                  const InitialCondition& base = {});

/// Stacked [C; CA; ...; CA^(n-1)] and its numerical rank.
struct ObservabilityMatrix {
  Eigen::MatrixXd matrix;
  /// Singular values of the frequency-normalised matrix used for the rank.
  Eigen::VectorXd singular_values;
  int rank = 0;
};

/// The rank is evaluated on the pair (C, A / omega_max) after the state
/// rescaling deta -> deta / omega_max, which leaves the rank unchanged but
/// keeps the powers of A within floating-point range. Threshold:
/// sigma > sigma_max * n * machine epsilon.
ObservabilityMatrix ComputeObservabilityMatrix(const TruncatedSystem& sys);

struct ObservabilityReport {
  /// 2 x (number of modes whose curvature at x is nonzero).
  int rank = 0;
  /// det(O_C) for O_C the n x n curvature-Vandermonde block; may be +/-inf
  /// or 0 in floating point, see log10_abs_det.
  double det_O_C = 0.0;
  int det_sign = 0;
  double log10_abs_det = 0.0;
  std::vector<bool> curvature_zeros;
  bool observable = false;
};

/// Single-sensor test from the factored determinant
/// h^n prod_{i<j} (w_i^2 - w_j^2) prod_k phi_k''(x). A curvature counts as zero
/// when |phi_k''(x)| < 1e-8 max_x |phi_k''|.
ObservabilityReport SingleSensorDeterminant(const ModalBasis& basis, double x);

}  // namespace beamobs
