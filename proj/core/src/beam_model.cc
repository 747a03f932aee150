#include "beamobs/beam_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "beamobs/quadrature.h"

namespace beamobs {

namespace {

void RequirePositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("BeamSpec: ") + name +
                                " must be finite and strictly positive");
  }
}

// cos(x) + sech(x); same roots as cos(x) cosh(x) + 1 without the growth.
double ScaledCharacteristic(double x) { return std::cos(x) + 1.0 / std::cosh(x); }

double ScaledCharacteristicSlope(double x) {
  return -std::sin(x) - std::tanh(x) / std::cosh(x);
}

}  // namespace

BeamSpec::BeamSpec(double length, double width, double thickness,
                   double elastic_modulus, double density)
    : length_(length),
      width_(width),
      thickness_(thickness),
      elastic_modulus_(elastic_modulus),
      density_(density) {
  RequirePositive(length, "length");
  RequirePositive(width, "width");
  RequirePositive(thickness, "thickness");
  RequirePositive(elastic_modulus, "elastic modulus");
  RequirePositive(density, "density");
  area_ = width_ * thickness_;
  second_moment_ = width_ * thickness_ * thickness_ * thickness_ / 12.0;
  mass_per_length_ = density_ * area_;
}

BeamSpec BeamSpec::AluminumStrip() {
  return BeamSpec(2.0, 0.02, 0.005, 70e9, 2700.0);
}

double BeamSpec::flexural_coefficient() const {
  return std::sqrt(elastic_modulus_ * second_moment_ / mass_per_length_);
}

std::vector<double> FindCharacteristicRoots(int num_modes, double tol) {
  if (num_modes < 1) {
    throw std::invalid_argument("FindCharacteristicRoots: num_modes < 1");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("FindCharacteristicRoots: tol must be > 0");
  }
  std::vector<double> roots;
  roots.reserve(num_modes);
  for (int i = 1; i <= num_modes; ++i) {
    const double centre = (2.0 * i - 1.0) * std::numbers::pi / 2.0;
    double lo = centre - 1.0;
    double hi = centre + 1.0;
    double f_lo = ScaledCharacteristic(lo);
    const double f_hi = ScaledCharacteristic(hi);
    if (f_lo * f_hi > 0.0) {
      throw std::runtime_error("FindCharacteristicRoots: bracket " +
                               std::to_string(i) + " lost its root");
    }
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double f_mid = ScaledCharacteristic(mid);
      if (f_mid == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((f_mid > 0.0) == (f_lo > 0.0)) {
        lo = mid;
        f_lo = f_mid;
      } else {
        hi = mid;
      }
    }
    double x = 0.5 * (lo + hi);
    const double newton = x - ScaledCharacteristic(x) / ScaledCharacteristicSlope(x);
    if (std::abs(ScaledCharacteristic(newton)) <= std::abs(ScaledCharacteristic(x))) {
      x = newton;
    }
    if (std::abs(ScaledCharacteristic(x)) > tol) {
      throw std::runtime_error(
          "FindCharacteristicRoots: tolerance not attainable for root " +
          std::to_string(i));
    }
    if (!roots.empty() && x <= roots.back()) {
      throw std::runtime_error("FindCharacteristicRoots: root count mismatch");
    }
    roots.push_back(x);
  }
  return roots;
}

CantileverMode::CantileverMode(double root, double length)
    : b_(root), length_(length) {
  const double beta = b_ * length_;
  const double e = std::exp(-beta);
  const double s = std::sin(beta);
  const double c = std::cos(beta);
  // sinh(beta) + sin(beta) = denominator_ / (2 e).
  denominator_ = 1.0 - e * e + 2.0 * s * e;
  // q = (1 - f) (sinh(beta) + sin(beta)).
  q_ = s - c - e;
  f_ = 1.0 - q_ * 2.0 * e / denominator_;
}

double CantileverMode::SinhRatio(double x) const {
  return (std::exp(b_ * (x - length_)) - std::exp(-b_ * (x + length_))) /
         denominator_;
}

double CantileverMode::CoshRatio(double x) const {
  return (std::exp(b_ * (x - length_)) + std::exp(-b_ * (x + length_))) /
         denominator_;
}

double CantileverMode::Shape(double x) const {
  if (x == 0.0) return 0.0;
  const double bx = b_ * x;
  return std::exp(-bx) + q_ * SinhRatio(x) - std::cos(bx) + f_ * std::sin(bx);
}

double CantileverMode::Slope(double x) const {
  if (x == 0.0) return 0.0;
  const double bx = b_ * x;
  return b_ * (-std::exp(-bx) + q_ * CoshRatio(x) + std::sin(bx) +
               f_ * std::cos(bx));
}

double CantileverMode::Curvature(double x) const {
  if (x == length_) return 0.0;
  const double bx = b_ * x;
  return b_ * b_ *
         (std::exp(-bx) + q_ * SinhRatio(x) + std::cos(bx) - f_ * std::sin(bx));
}

double CantileverMode::ThirdDerivative(double x) const {
  if (x == length_) return 0.0;
  const double bx = b_ * x;
  return b_ * b_ * b_ *
         (-std::exp(-bx) + q_ * CoshRatio(x) - std::sin(bx) - f_ * std::cos(bx));
}

double ModalBasis::grid_spacing() const {
  return length() / static_cast<double>(grid_size() - 1);
}

CantileverMode ModalBasis::mode(int i) const {
  return CantileverMode(roots(i), length());
}

Eigen::VectorXd ModalBasis::CurvaturesAt(double x) const {
  Eigen::VectorXd out(num_modes());
  for (int i = 0; i < num_modes(); ++i) out(i) = mode(i).Curvature(x);
  return out;
}

int ModalBasis::NearestGridIndex(double x) const {
  const double clamped = std::clamp(x, 0.0, length());
  const long k = std::lround(clamped / grid_spacing());
  return static_cast<int>(std::clamp<long>(k, 0, grid_size() - 1));
}

double ModalBasis::SlowestPeriod() const {
  return 2.0 * std::numbers::pi / frequencies(0);
}

ModalBasis BuildModalBasis(const BeamSpec& beam, int num_modes, int grid_size) {
  if (num_modes < 1) {
    throw std::invalid_argument("BuildModalBasis: num_modes must be >= 1");
  }
  if (grid_size < 20 * num_modes) {
    throw std::invalid_argument(
        "BuildModalBasis: grid_size must be at least 20 * num_modes");
  }
  const std::vector<double> dimensionless = FindCharacteristicRoots(num_modes);
  if (dimensionless.back() > std::log(std::numeric_limits<double>::max())) {
    throw std::overflow_error(
        "BuildModalBasis: cosh(b L) overflows for the requested mode count");
  }

  ModalBasis basis{.beam = beam, .roots = {}, .frequencies = {}, .grid = {},
                   .mode_shapes = {}, .curvatures = {}, .norms = {}};
  const double length = beam.length();
  basis.roots.resize(num_modes);
  basis.frequencies.resize(num_modes);
  for (int i = 0; i < num_modes; ++i) {
    basis.roots(i) = dimensionless[i] / length;
    basis.frequencies(i) =
        basis.roots(i) * basis.roots(i) * beam.flexural_coefficient();
  }

  basis.grid = Eigen::VectorXd::LinSpaced(grid_size, 0.0, length);
  basis.mode_shapes.resize(grid_size, num_modes);
  basis.curvatures.resize(grid_size, num_modes);
  for (int i = 0; i < num_modes; ++i) {
    const CantileverMode mode(basis.roots(i), length);
    for (int k = 0; k < grid_size; ++k) {
      basis.mode_shapes(k, i) = mode.Shape(basis.grid(k));
      basis.curvatures(k, i) = mode.Curvature(basis.grid(k));
    }
  }
  const Eigen::VectorXd weights =
      QuadratureWeights(grid_size, basis.grid_spacing(), QuadratureRule::kSimpson);
  basis.norms.resize(num_modes);
  for (int i = 0; i < num_modes; ++i) {
    basis.norms(i) = weights.dot(basis.mode_shapes.col(i).cwiseAbs2());
  }
  return basis;
}

double TruncatedSystem::max_snap_distance() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < sensor_locations.size(); ++k) {
    worst = std::max(worst, std::abs(sensor_locations[k] - requested_locations[k]));
  }
  return worst;
}

namespace {

TruncatedSystem MakeSystemShell(const ModalBasis& basis, int num_sensors) {
  const int n = basis.num_modes();
  TruncatedSystem sys;
  sys.frequencies = basis.frequencies;
  sys.half_height = basis.beam.half_height();
  sys.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sys.A.topRightCorner(n, n).setIdentity();
  sys.A.bottomLeftCorner(n, n).diagonal() = -basis.frequencies.cwiseAbs2();
  sys.C = Eigen::MatrixXd::Zero(num_sensors, 2 * n);
  return sys;
}

}  // namespace

TruncatedSystem AssembleTruncatedSystem(const ModalBasis& basis,
                                        std::span<const double> sensor_locations,
                                        SensorSnap snap) {
  const int n = basis.num_modes();
  TruncatedSystem sys =
      MakeSystemShell(basis, static_cast<int>(sensor_locations.size()));
  for (std::size_t l = 0; l < sensor_locations.size(); ++l) {
    const double x = sensor_locations[l];
    if (!(x >= 0.0 && x <= basis.length())) {
      throw std::invalid_argument(
          "AssembleTruncatedSystem: sensor location outside [0, L]");
    }
    sys.requested_locations.push_back(x);
    if (snap == SensorSnap::kNearestGridNode) {
      const int k = basis.NearestGridIndex(x);
      sys.grid_indices.push_back(k);
      sys.sensor_locations.push_back(basis.grid(k));
      sys.C.row(l).head(n) = sys.half_height * basis.curvatures.row(k);
    } else {
      sys.grid_indices.push_back(-1);
      sys.sensor_locations.push_back(x);
      sys.C.row(l).head(n) = sys.half_height * basis.CurvaturesAt(x).transpose();
    }
  }
  return sys;
}

TruncatedSystem AssembleTruncatedSystemAtNodes(const ModalBasis& basis,
                                               std::span<const int> nodes) {
  const int n = basis.num_modes();
  TruncatedSystem sys = MakeSystemShell(basis, static_cast<int>(nodes.size()));
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    const int k = nodes[l];
    if (k < 0 || k >= basis.grid_size()) {
      throw std::invalid_argument("AssembleTruncatedSystemAtNodes: bad node");
    }
    sys.requested_locations.push_back(basis.grid(k));
    sys.sensor_locations.push_back(basis.grid(k));
    sys.grid_indices.push_back(k);
    sys.C.row(l).head(n) = sys.half_height * basis.curvatures.row(k);
  }
  return sys;
}

InitialCondition InitialCondition::FromCoefficients(
    Eigen::VectorXd alpha_displacement, Eigen::VectorXd alpha_velocity) {
  if (alpha_displacement.size() != alpha_velocity.size()) {
    throw std::invalid_argument("InitialCondition: coefficient size mismatch");
  }
  InitialCondition ic;
  ic.alpha_displacement = std::move(alpha_displacement);
  ic.alpha_velocity = std::move(alpha_velocity);
  return ic;
}

InitialCondition InitialCondition::Zero(int num_modes) {
  return FromCoefficients(Eigen::VectorXd::Zero(num_modes),
                          Eigen::VectorXd::Zero(num_modes));
}

Eigen::VectorXd InitialCondition::State() const {
  Eigen::VectorXd h(alpha_displacement.size() + alpha_velocity.size());
  h << alpha_displacement, alpha_velocity;
  return h;
}

InitialCondition ProjectInitialCondition(
    const ModalBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& w0,
    const Eigen::Ref<const Eigen::VectorXd>& w0_dot) {
  if (w0.size() != basis.grid_size() || w0_dot.size() != basis.grid_size()) {
    throw std::invalid_argument(
        "ProjectInitialCondition: samples must match the grid length");
  }
  const Eigen::VectorXd weights = QuadratureWeights(
      basis.grid_size(), basis.grid_spacing(), QuadratureRule::kSimpson);
  InitialCondition ic;
  ic.displacement = w0;
  ic.velocity = w0_dot;
  const Eigen::MatrixXd weighted = basis.mode_shapes.transpose() * weights.asDiagonal();
  ic.alpha_displacement = (weighted * w0).cwiseQuotient(basis.norms);
  ic.alpha_velocity = (weighted * w0_dot).cwiseQuotient(basis.norms);
  const Eigen::VectorXd w_fit = basis.mode_shapes * ic.alpha_displacement;
  const Eigen::VectorXd v_fit = basis.mode_shapes * ic.alpha_velocity;
  ic.reconstruction_residual = std::max((w_fit - w0).cwiseAbs().maxCoeff(),
                                        (v_fit - w0_dot).cwiseAbs().maxCoeff());
  return ic;
}

}  // namespace beamobs
