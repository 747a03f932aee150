#include "beamobs/placement.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace beamobs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view ToString(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged:
      return "converged";
    case SolverStatus::kMaxIterations:
      return "max-iterations";
    case SolverStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

MetricSet ComputeMetrics(const Eigen::Ref<const Eigen::MatrixXd>& W,
                         double weight) {
  if (W.rows() != W.cols() || W.rows() == 0) {
    throw std::invalid_argument("ComputeMetrics: Gramian must be square");
  }
  const Eigen::MatrixXd sym = 0.5 * (W + W.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      sym, Eigen::EigenvaluesOnly);
  MetricSet m;
  m.weight = weight;
  m.lambda_min = eig.eigenvalues()(0);
  m.lambda_max = eig.eigenvalues()(W.rows() - 1);
  const double floor = static_cast<double>(W.rows()) *
                       std::numeric_limits<double>::epsilon() *
                       std::max(m.lambda_max, 0.0);
  if (m.lambda_max <= 0.0 || m.lambda_min <= floor) {
    m.singular = true;
    m.nu = m.kappa = m.objective = kInf;
    return m;
  }
  m.nu = 1.0 / m.lambda_min;
  m.kappa = m.lambda_max / m.lambda_min;
  m.objective = m.kappa + weight * m.nu;
  return m;
}

std::vector<MetricSet> ObjectiveScan(std::span<const Eigen::MatrixXd> gramians,
                                     double weight) {
  std::vector<MetricSet> out;
  out.reserve(gramians.size());
  for (const Eigen::MatrixXd& W : gramians) out.push_back(ComputeMetrics(W, weight));
  return out;
}

Eigen::MatrixXd SumGramians(std::span<const Eigen::MatrixXd> gramians,
                            std::span<const int> selection) {
  if (gramians.empty()) throw std::invalid_argument("SumGramians: no Gramians");
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(gramians[0].rows(), gramians[0].cols());
  for (int i : selection) total += gramians[static_cast<std::size_t>(i)];
  return total;
}

namespace {

// Symmetric half-vectorisation with sqrt(2) on off-diagonals, so that
// <VechS(A), VechS(B)> = trace(A B) for symmetric A, B.
void VechS(const Eigen::MatrixXd& G, Eigen::Ref<Eigen::VectorXd> out) {
  const int n = static_cast<int>(G.rows());
  int k = 0;
  for (int j = 0; j < n; ++j) {
    out(k++) = G(j, j);
    for (int i = j + 1; i < n; ++i) out(k++) = std::sqrt(2.0) * 0.5 * (G(i, j) + G(j, i));
  }
}

// Log-barrier formulation over z = [abar (m); kappa; nu].
class RelaxationBarrier {
 public:
  RelaxationBarrier(std::vector<Eigen::MatrixXd> gramians, int budget,
                    double weight, double nu_cap)
      : W_(std::move(gramians)),
        n_(static_cast<int>(W_[0].rows())),
        m_(static_cast<int>(W_.size())),
        budget_(budget),
        weight_(weight),
        nu_cap_(nu_cap) {}

  int num_vars() const { return m_ + 2; }
  int barrier_degree() const { return 2 * n_ + 2 * m_ + 2; }
  double Objective(const Eigen::VectorXd& z) const {
    return z(m_) + weight_ * z(m_ + 1);
  }

  Eigen::MatrixXd Combination(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < m_; ++i) X += z(i) * W_[i];
    return X;
  }

  // Barrier-augmented objective; +inf outside the interior.
  double Value(const Eigen::VectorXd& z, double t) const {
    const auto abar = z.head(m_);
    const double kappa = z(m_);
    const double nu = z(m_ + 1);
    const double slack_sum = budget_ * nu - abar.sum();
    if ((abar.array() <= 0.0).any() || ((nu - abar.array()) <= 0.0).any() ||
        slack_sum <= 0.0 || nu >= nu_cap_) {
      return kInf;
    }
    const Eigen::MatrixXd X = Combination(z);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n_, n_);
    const Eigen::LLT<Eigen::MatrixXd> lower(X - I);
    const Eigen::LLT<Eigen::MatrixXd> upper(kappa * I - X);
    if (lower.info() != Eigen::Success || upper.info() != Eigen::Success) {
      return kInf;
    }
    const Eigen::VectorXd d1 = lower.matrixLLT().diagonal();
    const Eigen::VectorXd d2 = upper.matrixLLT().diagonal();
    if ((d1.array() <= 0.0).any() || (d2.array() <= 0.0).any()) return kInf;
    double value = t * Objective(z);
    value -= 2.0 * d1.array().log().sum();
    value -= 2.0 * d2.array().log().sum();
    value -= abar.array().log().sum();
    value -= (nu - abar.array()).log().sum();
    value -= std::log(slack_sum);
    value -= std::log(nu_cap_ - nu);
    return value;
  }

  // Gradient and Hessian of Value at an interior point.
  void Derivatives(const Eigen::VectorXd& z, double t, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const auto abar = z.head(m_);
    const double kappa = z(m_);
    const double nu = z(m_ + 1);
    const Eigen::MatrixXd X = Combination(z);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n_, n_);
    const Eigen::LLT<Eigen::MatrixXd> lower(X - I);
    const Eigen::LLT<Eigen::MatrixXd> upper(kappa * I - X);
    const Eigen::MatrixXd B1 = lower.matrixL().solve(I);
    const Eigen::MatrixXd B2 = upper.matrixL().solve(I);

    const int vech = n_ * (n_ + 1) / 2;
    Eigen::MatrixXd V1(vech, m_);
    Eigen::MatrixXd V2(vech, m_);
    Eigen::VectorXd tr1(m_);
    Eigen::VectorXd tr2(m_);
    for (int i = 0; i < m_; ++i) {
      const Eigen::MatrixXd G1 = B1 * W_[i] * B1.transpose();
      const Eigen::MatrixXd G2 = B2 * W_[i] * B2.transpose();
      VechS(G1, V1.col(i));
      VechS(G2, V2.col(i));
      tr1(i) = G1.trace();
      tr2(i) = G2.trace();
    }
    const Eigen::MatrixXd E2 = B2 * B2.transpose();
    Eigen::VectorXd e2(vech);
    VechS(E2, e2);

    const Eigen::ArrayXd upper_gap = nu - abar.array();
    const double slack_sum = budget_ * nu - abar.sum();
    const double cap_gap = nu_cap_ - nu;

    grad.resize(num_vars());
    grad.head(m_) = (-tr1 + tr2).array() - 1.0 / abar.array() +
                    1.0 / upper_gap + 1.0 / slack_sum;
    grad(m_) = t - E2.trace();
    grad(m_ + 1) = t * weight_ - (1.0 / upper_gap).sum() - budget_ / slack_sum +
                   1.0 / cap_gap;

    hess.setZero(num_vars(), num_vars());
    auto haa = hess.topLeftCorner(m_, m_);
    haa.selfadjointView<Eigen::Lower>().rankUpdate(V1.transpose());
    haa.selfadjointView<Eigen::Lower>().rankUpdate(V2.transpose());
    haa.triangularView<Eigen::StrictlyUpper>() = haa.transpose();
    haa.diagonal().array() +=
        1.0 / abar.array().square() + 1.0 / upper_gap.square();
    haa.array() += 1.0 / (slack_sum * slack_sum);
    const Eigen::VectorXd cross_kappa = -V2.transpose() * e2;
    hess.col(m_).head(m_) = cross_kappa;
    hess.row(m_).head(m_) = cross_kappa.transpose();
    hess(m_, m_) = E2.squaredNorm();
    const Eigen::VectorXd cross_nu =
        (-1.0 / upper_gap.square() - budget_ / (slack_sum * slack_sum)).matrix();
    hess.col(m_ + 1).head(m_) = cross_nu;
    hess.row(m_ + 1).head(m_) = cross_nu.transpose();
    hess(m_ + 1, m_ + 1) = (1.0 / upper_gap.square()).sum() +
                           budget_ * budget_ / (slack_sum * slack_sum) +
                           1.0 / (cap_gap * cap_gap);
  }

  // Largest violation of any constraint, relative to ||W(abar)||.
  double ConstraintResidual(const Eigen::VectorXd& z) const {
    const auto abar = z.head(m_);
    const double kappa = z(m_);
    const double nu = z(m_ + 1);
    const Eigen::MatrixXd X = Combination(z);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        X, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()(0);
    const double lmax = eig.eigenvalues()(n_ - 1);
    double worst = 0.0;
    worst = std::max(worst, 1.0 - lmin);
    worst = std::max(worst, lmax - kappa);
    worst = std::max(worst, -abar.minCoeff());
    worst = std::max(worst, (abar.array() - nu).maxCoeff());
    worst = std::max(worst, abar.sum() - budget_ * nu);
    return worst / std::max(1.0, X.norm());
  }

  // Largest step in (0, 1] keeping the scalar slacks positive along dz.
  double ScalarStepBound(const Eigen::VectorXd& z, const Eigen::VectorXd& dz) const {
    double step = 1.0;
    const auto shrink = [&step](double slack, double rate) {
      if (rate < 0.0) step = std::min(step, 0.99 * slack / -rate);
    };
    const double nu = z(m_ + 1);
    const double dnu = dz(m_ + 1);
    for (int i = 0; i < m_; ++i) {
      shrink(z(i), dz(i));
      shrink(nu - z(i), dnu - dz(i));
    }
    shrink(budget_ * nu - z.head(m_).sum(), budget_ * dnu - dz.head(m_).sum());
    shrink(nu_cap_ - nu, -dnu);
    return step;
  }

 private:
  std::vector<Eigen::MatrixXd> W_;
  int n_;
  int m_;
  double budget_;
  double weight_;
  double nu_cap_;
};

}  // namespace

PlacementSolution SolveRelaxation(std::span<const Eigen::MatrixXd> gramians,
                                  int budget, const RelaxationOptions& options) {
  if (gramians.empty()) {
    throw std::invalid_argument("SolveRelaxation: no candidate Gramians");
  }
  if (budget < 1) throw std::invalid_argument("SolveRelaxation: budget < 1");
  if (budget > static_cast<int>(gramians.size())) {
    throw std::invalid_argument("SolveRelaxation: budget exceeds candidate count");
  }
  if (!(options.weight >= 0.0)) {
    throw std::invalid_argument("SolveRelaxation: weight must be >= 0");
  }
  const int m = static_cast<int>(gramians.size());
  const int n = static_cast<int>(gramians[0].rows());
  for (const Eigen::MatrixXd& W : gramians) {
    if (W.rows() != n || W.cols() != n) {
      throw std::invalid_argument("SolveRelaxation: Gramian dimension mismatch");
    }
  }

  PlacementSolution sol;
  sol.budget = budget;
  sol.weight = options.weight;

  std::vector<Eigen::MatrixXd> all(gramians.begin(), gramians.end());
  std::vector<int> everything(m);
  std::iota(everything.begin(), everything.end(), 0);
  const MetricSet all_on = ComputeMetrics(SumGramians(all, everything), options.weight);
  if (all_on.singular) {
    sol.status = SolverStatus::kInfeasible;
    return sol;
  }
  sol.scale = all_on.lambda_min;
  std::vector<Eigen::MatrixXd> scaled;
  scaled.reserve(m);
  for (const Eigen::MatrixXd& W : all) {
    scaled.push_back(0.5 * (W + W.transpose()) / sol.scale);
  }
  const double lambda_max_all = all_on.lambda_max / sol.scale;

  // Interior start: abar = 2 gives W(abar) = 2 sum W_i >= 2 I.
  const double nu0 = std::max(4.0, 4.0 * m / budget);
  Eigen::VectorXd z(m + 2);
  z.head(m).setConstant(2.0);
  z(m) = 3.0 * lambda_max_all + 1.0;
  z(m + 1) = nu0;
  RelaxationBarrier barrier(std::move(scaled), budget, options.weight,
                            options.nu_cap_factor * nu0);

  double t = barrier.barrier_degree() / std::max(1.0, barrier.Objective(z));
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  int iterations = 0;
  sol.status = SolverStatus::kMaxIterations;
  double gap = kInf;
  while (iterations < options.max_iterations) {
    // Centring.
    while (iterations < options.max_iterations) {
      barrier.Derivatives(z, t, grad, hess);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      Eigen::VectorXd dz = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !dz.allFinite()) {
        hess.diagonal().array() += 1e-12 * hess.diagonal().cwiseAbs().maxCoeff();
        ldlt.compute(hess);
        dz = ldlt.solve(-grad);
      }
      const double decrement = -grad.dot(dz);
      if (!(decrement > 2e-10)) break;
      double step = barrier.ScalarStepBound(z, dz);
      const double current = barrier.Value(z, t);
      Eigen::VectorXd trial;
      bool accepted = false;
      for (int k = 0; k < 60; ++k) {
        trial = z + step * dz;
        const double value = barrier.Value(trial, t);
        if (value <= current - 0.25 * step * decrement) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++iterations;
      if (!accepted) break;
      const double decrease = current - barrier.Value(trial, t);
      z = trial;
      // Progress below roundoff of the barrier value: the centre is reached.
      if (decrease <= 1e-13 * std::max(1.0, std::abs(current))) break;
    }
    gap = barrier.barrier_degree() / t;
    const double objective = barrier.Objective(z);
    sol.trace.push_back({iterations, t, objective, gap});
    if (gap <= options.gap_tolerance * std::max(1.0, std::abs(objective))) {
      sol.status = SolverStatus::kConverged;
      break;
    }
    t *= options.barrier_growth;
  }

  barrier.Derivatives(z, t, grad, hess);
  const Eigen::LDLT<Eigen::MatrixXd> final_ldlt(hess);
  const double decrement = std::sqrt(std::max(0.0, grad.dot(final_ldlt.solve(grad))));
  const double degree = barrier.barrier_degree();
  // Suboptimality bound of an approximately centred iterate.
  const double bound = (degree + decrement * std::sqrt(degree)) / t;
  sol.iterations = iterations;
  sol.relaxed = z.head(m);
  sol.kappa_hat = z(m);
  sol.nu_hat = z(m + 1);
  sol.activation = sol.relaxed / sol.nu_hat;
  sol.objective = barrier.Objective(z);
  sol.duality_gap = gap;
  sol.lower_bound = sol.objective - bound;
  sol.nu_original = sol.nu_hat / sol.scale;
  sol.kkt_residual = bound / std::max(1.0, std::abs(sol.objective));
  sol.constraint_residual = barrier.ConstraintResidual(z);
  return sol;
}

namespace {

struct ScoredSet {
  std::vector<int> members;
  MetricSet scaled;
};

MetricSet ScaledMetrics(std::span<const Eigen::MatrixXd> gramians,
                        const std::vector<int>& members, double scale,
                        double weight) {
  return ComputeMetrics(SumGramians(gramians, members) / scale, weight);
}

}  // namespace

BinarySelection RoundToBinary(const PlacementSolution& relaxed,
                              std::span<const Eigen::MatrixXd> gramians,
                              std::span<const double> positions, int budget,
                              double tie_tolerance) {
  const int m = static_cast<int>(gramians.size());
  if (relaxed.activation.size() != m || static_cast<int>(positions.size()) != m) {
    throw std::invalid_argument("RoundToBinary: size mismatch");
  }
  if (budget < 1) throw std::invalid_argument("RoundToBinary: budget < 1");
  const double scale = relaxed.scale > 0.0 ? relaxed.scale : 1.0;
  const double weight = relaxed.weight;
  const int keep = std::min(budget, m);

  std::vector<double> level(m);
  for (int i = 0; i < m; ++i) {
    level[i] = tie_tolerance > 0.0
                   ? std::floor(relaxed.activation(i) / tie_tolerance)
                   : relaxed.activation(i);
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (level[a] != level[b]) return level[a] > level[b];
    return positions[a] < positions[b];
  });

  BinarySelection out;
  std::vector<int> selected(order.begin(), order.begin() + keep);
  MetricSet current = ScaledMetrics(gramians, selected, scale, weight);

  // Repair a singular selection: grow by the best lambda_min, then trim.
  while (current.singular && static_cast<int>(selected.size()) < m) {
    int best = -1;
    double best_lmin = -kInf;
    for (int j = 0; j < m; ++j) {
      if (std::find(selected.begin(), selected.end(), j) != selected.end()) continue;
      std::vector<int> trial = selected;
      trial.push_back(j);
      const double lmin = ScaledMetrics(gramians, trial, scale, weight).lambda_min;
      if (lmin > best_lmin) {
        best_lmin = lmin;
        best = j;
      }
    }
    selected.push_back(best);
    current = ScaledMetrics(gramians, selected, scale, weight);
    ++out.repairs;
  }
  while (static_cast<int>(selected.size()) > keep) {
    int drop = -1;
    MetricSet best_metrics;
    best_metrics.objective = kInf;
    for (std::size_t k = 0; k < selected.size(); ++k) {
      std::vector<int> trial = selected;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
      const MetricSet metrics = ScaledMetrics(gramians, trial, scale, weight);
      if (!metrics.singular && metrics.objective < best_metrics.objective) {
        best_metrics = metrics;
        drop = static_cast<int>(k);
      }
    }
    if (drop < 0) break;
    selected.erase(selected.begin() + drop);
    current = best_metrics;
  }

  // One sweep of neighbour exchanges.
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const int node = selected[k];
    int best = -1;
    MetricSet best_metrics = current;
    for (int neighbour : {node - 1, node + 1}) {
      if (neighbour < 0 || neighbour >= m) continue;
      if (std::find(selected.begin(), selected.end(), neighbour) != selected.end()) {
        continue;
      }
      std::vector<int> trial = selected;
      trial[k] = neighbour;
      const MetricSet metrics = ScaledMetrics(gramians, trial, scale, weight);
      if (metrics.objective < best_metrics.objective) {
        best_metrics = metrics;
        best = neighbour;
      }
    }
    if (best >= 0) {
      selected[k] = best;
      current = best_metrics;
      ++out.exchanges;
    }
  }

  std::sort(selected.begin(), selected.end());
  out.selected = selected;
  out.scaled_metrics = current;
  out.metrics = ComputeMetrics(SumGramians(gramians, selected), weight);
  return out;
}

PlacementSolution OptimizePlacement(std::span<const Eigen::MatrixXd> gramians,
                                    std::span<const double> positions, int budget,
                                    const RelaxationOptions& options) {
  PlacementSolution sol = SolveRelaxation(gramians, budget, options);
  if (sol.status != SolverStatus::kInfeasible) {
    sol.binary = RoundToBinary(sol, gramians, positions, budget);
  }
  return sol;
}

std::vector<int> RandomPlacement(int grid_size, int budget, std::uint64_t seed) {
  if (budget < 0 || budget > grid_size) {
    throw std::invalid_argument("RandomPlacement: budget outside [0, grid size]");
  }
  std::vector<int> nodes(grid_size);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < budget; ++i) {
    std::uniform_int_distribution<int> pick(i, grid_size - 1);
    std::swap(nodes[i], nodes[pick(rng)]);
  }
  nodes.resize(budget);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

BaselinePlacements MakeBaselinePlacements(const ModalBasis& basis, int budget,
                                          std::uint64_t seed) {
  const int n = basis.grid_size();
  if (budget < 1 || budget > n) {
    throw std::invalid_argument("MakeBaselinePlacements: budget outside [1, N]");
  }
  BaselinePlacements out;
  out.random = RandomPlacement(n, budget, seed);

  out.uniform.resize(budget);
  for (int k = 0; k < budget; ++k) {
    out.uniform[k] = budget == 1 ? 0
                                 : static_cast<int>(std::lround(
                                       static_cast<double>(k) * (n - 1) / (budget - 1)));
  }

  const Eigen::VectorXd strain = basis.curvatures.cwiseAbs().rowwise().sum();
  std::vector<int> peaks;
  std::vector<int> rest;
  for (int k = 0; k < n; ++k) {
    const bool left_ok = k == 0 || strain(k) >= strain(k - 1);
    const bool right_ok = k == n - 1 || strain(k) >= strain(k + 1);
    (left_ok && right_ok ? peaks : rest).push_back(k);
  }
  const auto by_strain = [&strain](int a, int b) {
    if (strain(a) != strain(b)) return strain(a) > strain(b);
    return a < b;
  };
  std::sort(peaks.begin(), peaks.end(), by_strain);
  std::sort(rest.begin(), rest.end(), by_strain);
  peaks.insert(peaks.end(), rest.begin(), rest.end());
  out.curvature_peak.assign(peaks.begin(), peaks.begin() + budget);
  std::sort(out.curvature_peak.begin(), out.curvature_peak.end());
  return out;
}

}  // namespace beamobs
