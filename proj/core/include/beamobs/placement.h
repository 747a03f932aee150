#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "beamobs/beam_model.h"

namespace beamobs {

/// Eigenvalue-based observability measures of one Gramian.
///
/// A Gramian whose smallest eigenvalue is at or below
/// n * machine_epsilon * lambda_max (or that is identically zero) is
/// singular; nu, kappa and the objective are then +infinity.
struct MetricSet {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// Unobservability index 1 / lambda_min.
  double nu = 0.0;
  /// Condition number lambda_max / lambda_min.
  double kappa = 0.0;
  /// kappa + weight * nu.
  double objective = 0.0;
  double weight = 0.0;
  bool singular = false;
};

inline constexpr double kDefaultObjectiveWeight = 5.0;

MetricSet ComputeMetrics(const Eigen::Ref<const Eigen::MatrixXd>& W,
                         double weight = kDefaultObjectiveWeight);

/// Metrics of one Gramian per candidate location.
std::vector<MetricSet> ObjectiveScan(std::span<const Eigen::MatrixXd> gramians,
                                     double weight = kDefaultObjectiveWeight);

/// Sum of the Gramians listed in `selection`.
Eigen::MatrixXd SumGramians(std::span<const Eigen::MatrixXd> gramians,
                            std::span<const int> selection);

struct RelaxationOptions {
  double weight = kDefaultObjectiveWeight;
  /// Stop once the barrier duality gap falls below this fraction of the
  /// objective.
  double gap_tolerance = 1e-6;
  /// Total Newton steps.
  int max_iterations = 500;
  /// Barrier parameter growth factor between centring phases.
  double barrier_growth = 20.0;
  /// nu is bounded above by this multiple of its starting value so the
  /// feasible set stays bounded when weight == 0.
  double nu_cap_factor = 1e6;
};

enum class SolverStatus {
  kConverged,
  kMaxIterations,
  kInfeasible,
};

std::string_view ToString(SolverStatus status);

struct SolverTraceEntry {
  int iteration = 0;
  double barrier_parameter = 0.0;
  double objective = 0.0;
  double gap = 0.0;
};

/// Binary sensor set obtained from a relaxed solution.
struct BinarySelection {
  std::vector<int> selected;
  /// Metrics of sum_{i in S} W_i in the solver's (pre-scaled) units; this is
  /// the quantity the relaxed objective bounds from below.
  MetricSet scaled_metrics;
  /// Metrics of sum_{i in S} W_i in the original units.
  MetricSet metrics;
  int exchanges = 0;
  int repairs = 0;
};

struct PlacementSolution {
  /// Scaled activations abar_i in [0, nu_hat].
  Eigen::VectorXd relaxed;
  /// Activations a_i = abar_i / nu_hat in [0, 1].
  Eigen::VectorXd activation;
  double kappa_hat = 0.0;
  double nu_hat = 0.0;
  /// kappa_hat + weight * nu_hat at the final iterate.
  double objective = 0.0;
  /// objective minus the suboptimality bound of the final iterate.
  double lower_bound = 0.0;
  double duality_gap = 0.0;
  /// Every Gramian was divided by this (lambda_min of their sum) before
  /// solving.
  double scale = 1.0;
  /// nu_hat expressed in the original Gramian units.
  double nu_original = 0.0;
  /// (degree + decrement sqrt(degree)) / t relative to |objective|.
  double kkt_residual = 0.0;
  double constraint_residual = 0.0;
  SolverStatus status = SolverStatus::kInfeasible;
  int iterations = 0;
  int budget = 0;
  double weight = 0.0;
  std::vector<SolverTraceEntry> trace;
  BinarySelection binary;
};

/// Convex relaxation of the sensor-selection problem
///
///   min  kappa + w nu
///   s.t. W(abar) >= I,  kappa I >= W(abar),
///        0 <= abar_i <= nu,  sum abar_i <= p nu,
///
/// with W(abar) = sum abar_i W_i / scale, solved by a log-barrier
/// interior-point method with Newton centring. Returns status kInfeasible
/// when the all-on Gramian is singular.
PlacementSolution SolveRelaxation(std::span<const Eigen::MatrixXd> gramians,
                                  int budget, const RelaxationOptions& options = {});

/// Top-`budget` candidates by activation (ties go to the smaller position;
/// with a positive `tie_tolerance`, activations in the same bucket tie),
/// repaired greedily if singular, then one sweep of neighbour exchanges.
/// `positions` gives each candidate's coordinate; candidates are assumed to be
/// ordered along the beam so index +/- 1 are grid neighbours.
BinarySelection RoundToBinary(const PlacementSolution& relaxed,
                              std::span<const Eigen::MatrixXd> gramians,
                              std::span<const double> positions, int budget,
                              double tie_tolerance = 0.0);

/// SolveRelaxation followed by RoundToBinary.
PlacementSolution OptimizePlacement(std::span<const Eigen::MatrixXd> gramians,
                                    std::span<const double> positions, int budget,
                                    const RelaxationOptions& options = {});

struct BaselinePlacements {
  std::vector<int> random;
  std::vector<int> uniform;
  std::vector<int> curvature_peak;
};

/// Naive placements on the basis grid: random without replacement (seeded),
/// equally spaced, and the largest local maxima of sum_k |phi_k''(x)|.
BaselinePlacements MakeBaselinePlacements(const ModalBasis& basis, int budget,
                                          std::uint64_t seed);

/// `budget` distinct grid indices drawn uniformly without replacement.
std::vector<int> RandomPlacement(int grid_size, int budget, std::uint64_t seed);

}  // namespace beamobs
