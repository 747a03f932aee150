#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace beamobs {

/// Geometry and material of a uniform rectangular cantilever, SI units.
///
/// The derived section properties are computed once at construction and
/// stored; all primitive values must be strictly positive.
class BeamSpec {
 public:
  BeamSpec(double length, double width, double thickness,
           double elastic_modulus, double density);

  /// 2 m x 20 mm x 5 mm aluminium strip (E = 70 GPa, rho = 2700 kg/m^3).
  static BeamSpec AluminumStrip();

  double length() const { return length_; }
  double width() const { return width_; }
  double thickness() const { return thickness_; }
  double elastic_modulus() const { return elastic_modulus_; }
  double density() const { return density_; }

  double area() const { return area_; }
  double second_moment() const { return second_moment_; }
  double mass_per_length() const { return mass_per_length_; }
  /// Distance from the neutral axis to the outer fibre, where strain is read.
  double half_height() const { return thickness_ / 2.0; }
  /// sqrt(E I / mu); multiplies b_i^2 to give the natural frequency.
  double flexural_coefficient() const;

 private:
  double length_;
  double width_;
  double thickness_;
  double elastic_modulus_;
  double density_;
  double area_;
  double second_moment_;
  double mass_per_length_;
};

/// Positive roots of cos(x) cosh(x) + 1 = 0 in ascending order, i.e. the
/// dimensionless products b_i L of a clamped-free beam.
///
/// Each root is bracketed in [(2i-1)pi/2 - 1, (2i-1)pi/2 + 1], bisected on the
/// equivalent equation cos(x) + sech(x) = 0 and polished with one Newton step.
/// `tol` bounds |cos(x) + sech(x)| at the returned roots. Throws
/// std::invalid_argument on bad arguments and std::runtime_error if a bracket
/// does not contain a sign change.
std::vector<double> FindCharacteristicRoots(int num_modes, double tol = 1e-12);

/// One clamped-free mode shape, evaluated in closed form.
///
/// Uses the form with exp(-b x) factored out of the hyperbolic terms, so no
/// intermediate overflows for any mode whose root fits in a double.
class CantileverMode {
 public:
  /// Clamped (x = 0) and free (x = L) boundary values are returned exactly.
  /// `root` is b_i (1/m), `length` the beam length L.
  CantileverMode(double root, double length);

  double root() const { return b_; }
  /// f_i(L) = (cos bL + cosh bL) / (sin bL + sinh bL).
  double shape_factor() const { return f_; }

  double Shape(double x) const;
  double Slope(double x) const;
  double Curvature(double x) const;
  double ThirdDerivative(double x) const;

 private:
  double b_;
  double length_;
  double f_;
  double q_;
  double denominator_;

  double SinhRatio(double x) const;
  double CoshRatio(double x) const;
};

/// Modal description of a uniform cantilever sampled on a uniform grid.
struct ModalBasis {
  BeamSpec beam;
  /// b_i in 1/m, ascending.
  Eigen::VectorXd roots;
  /// omega_i = b_i^2 sqrt(EI/mu) in rad/s, ascending.
  Eigen::VectorXd frequencies;
  /// Uniform grid over [0, L].
  Eigen::VectorXd grid;
  /// grid_size x num_modes samples of phi_i.
  Eigen::MatrixXd mode_shapes;
  /// grid_size x num_modes samples of d^2 phi_i / dx^2 (closed form).
  Eigen::MatrixXd curvatures;
  /// c_i = integral of phi_i^2 over [0, L] (composite Simpson).
  Eigen::VectorXd norms;

  int num_modes() const { return static_cast<int>(roots.size()); }
  int grid_size() const { return static_cast<int>(grid.size()); }
  double grid_spacing() const;
  double length() const { return beam.length(); }

  CantileverMode mode(int i) const;
  /// Curvatures of all modes at an arbitrary x, closed form.
  Eigen::VectorXd CurvaturesAt(double x) const;
  /// Index of the grid node nearest to x (x is clamped to [0, L]).
  int NearestGridIndex(double x) const;
  /// Period of the slowest mode, 2 pi / omega_1.
  double SlowestPeriod() const;
};

/// Builds the modal basis. Requires num_modes >= 1 and
/// grid_size >= 20 * num_modes. Throws std::invalid_argument otherwise and
/// std::overflow_error when a root b_i L exceeds the range where cosh(b_i L)
/// is representable.
ModalBasis BuildModalBasis(const BeamSpec& beam, int num_modes, int grid_size);

enum class SensorSnap {
  /// Move each sensor to the nearest grid node (candidate location).
  kNearestGridNode,
  /// Evaluate curvatures at the requested coordinate.
  kExact,
};

/// The truncated modal LTI pair: dH/dt = A H, y = C H with
/// H = [eta_1..eta_n, deta_1..deta_n].
struct TruncatedSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::VectorXd frequencies;
  /// Locations as requested by the caller.
  std::vector<double> requested_locations;
  /// Locations the rows of C were evaluated at.
  std::vector<double> sensor_locations;
  /// Grid indices when snapped, -1 for exact placement.
  std::vector<int> grid_indices;
  double half_height = 0.0;

  int num_modes() const { return static_cast<int>(frequencies.size()); }
  int state_dim() const { return 2 * num_modes(); }
  int num_outputs() const { return static_cast<int>(C.rows()); }
  /// Largest |requested - used| over all sensors.
  double max_snap_distance() const;
};

/// Assembles A = [0 I; diag(-omega^2) 0] and the strain rows
/// h/2 [phi_1''(x) ... phi_n''(x) 0 ... 0]. Every location must lie in [0, L].
TruncatedSystem AssembleTruncatedSystem(
    const ModalBasis& basis, std::span<const double> sensor_locations,
    SensorSnap snap = SensorSnap::kNearestGridNode);

/// Same as above but from grid indices directly.
TruncatedSystem AssembleTruncatedSystemAtNodes(const ModalBasis& basis,
                                               std::span<const int> nodes);

/// Initial displacement/velocity fields and their modal coefficients.
struct InitialCondition {
  Eigen::VectorXd displacement;
  Eigen::VectorXd velocity;
  /// alpha_{1,i} = (1/c_i) integral w0 phi_i.
  Eigen::VectorXd alpha_displacement;
  /// alpha_{2,i} = (1/c_i) integral w0dot phi_i.
  Eigen::VectorXd alpha_velocity;
  /// max |field - modal reconstruction| over the grid for either field.
  double reconstruction_residual = 0.0;

  /// Coefficient-only initial condition (fields left empty).
  static InitialCondition FromCoefficients(Eigen::VectorXd alpha_displacement,
                                           Eigen::VectorXd alpha_velocity);
  /// Zero state for `num_modes` modes.
  static InitialCondition Zero(int num_modes);

  /// Truncated state H(0) = [alpha_1; alpha_2].
  Eigen::VectorXd State() const;
};

/// Projects sampled fields onto the mode shapes with Simpson quadrature.
InitialCondition ProjectInitialCondition(
    const ModalBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& w0,
    const Eigen::Ref<const Eigen::VectorXd>& w0_dot);

}  // namespace beamobs
