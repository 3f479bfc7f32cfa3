#pragma once

#include "cyclic/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cyclic {

/// Central-difference step used wherever a field has no analytic derivative.
inline constexpr double kFiniteDifferenceStep = 1e-6;

/// Mass matrix m(y). Depends on the shape coordinates only, which makes the
/// first r coordinates cyclic by construction.
class MassMatrixField {
 public:
  using Partials = std::function<std::vector<Matrix>(const Vector& y)>;

  /// Analytic partials: partials(y)[a] = dm/dy^a.
  MassMatrixField(DimensionSplit dims, MatrixField eval, Partials partials);
  /// Partials by central differences with kFiniteDifferenceStep.
  MassMatrixField(DimensionSplit dims, MatrixField eval);

  Matrix operator()(const Vector& y) const { return eval_(y); }
  std::vector<Matrix> partials(const Vector& y) const;
  bool analytic() const noexcept { return static_cast<bool>(partials_); }
  const DimensionSplit& dims() const noexcept { return dims_; }

 private:
  DimensionSplit dims_;
  MatrixField eval_;
  Partials partials_;
};

/// Potential energy V(y) and its gradient.
class PotentialField {
 public:
  PotentialField(ScalarField eval, VectorField gradient);
  /// Gradient by central differences.
  explicit PotentialField(ScalarField eval);

  static PotentialField zero(int shape_dim);

  double operator()(const Vector& y) const { return eval_(y); }
  Vector gradient(const Vector& y) const;

 private:
  ScalarField eval_;
  VectorField gradient_;
};

/// Damping coefficients k(x) acting on the cyclic velocities as -k(x) xdot.
///
/// A field may carry closed-form h and U (dh/dx = k, dU/dx = h). When the
/// matrix is diagonal with per-axis coefficient functions, those are kept
/// too so the per-axis construction can be used.
class DampingField {
 public:
  using AxisFunction = std::function<double(double)>;

  DampingField(int r, MatrixField eval);

  DampingField& with_closed_form(VectorField h, ScalarField U);
  DampingField& with_description(std::string text);

  Matrix operator()(const Vector& x) const { return eval_(x); }
  int dim() const noexcept { return r_; }
  const std::string& description() const noexcept { return description_; }

  const std::optional<VectorField>& closed_form_h() const noexcept { return h_; }
  const std::optional<ScalarField>& closed_form_U() const noexcept { return U_; }
  const std::vector<AxisFunction>& axis_functions() const noexcept { return axis_; }
  bool is_diagonal() const noexcept { return !axis_.empty(); }

  friend DampingField diagonal_damping(std::vector<AxisFunction> k);

 private:
  int r_;
  MatrixField eval_;
  std::optional<VectorField> h_;
  std::optional<ScalarField> U_;
  std::vector<AxisFunction> axis_;
  std::string description_;
};

DampingField zero_damping(int r);
/// Constant symmetric or non-symmetric matrix; no closed forms attached unless symmetric.
DampingField constant_damping(const Matrix& k);
/// k = diag(k_1(x^1), ..., k_r(x^r)).
DampingField diagonal_damping(std::vector<DampingField::AxisFunction> k);
/// [[5 + 2 cos x, 4], [4, 4 + 2 cos y]], the Hessian of
/// x^2/2 + 2 (x + y)^2 - 2 cos x - 2 cos y.
DampingField cosine_coupled_damping();

/// Mechanical system with r cyclic coordinates x and n - r shape coordinates y.
struct MechanicalSystem {
  std::string name;
  DimensionSplit dims;
  MassMatrixField mass;
  PotentialField potential;
  DampingField damping;
  std::vector<std::string> cyclic_names;
  std::vector<std::string> shape_names;
  /// Shape configurations where the model is well defined.
  std::function<bool(const Vector& y)> valid_domain = [](const Vector&) { return true; };
  std::string domain_description = "all shape configurations";

  /// Same system with the damping field replaced.
  MechanicalSystem with_damping(DampingField k) const;
  /// Throws ValidationError if component fields disagree with dims at y.
  void check_consistency(const Vector& y) const;
};

// -- built-in models --------------------------------------------------------

/// Base block sliding freely in the plane with a rod on a two-axis gimbal.
/// Defaults are the reference parameter set (slider 2 kg, gantry bar 3 kg,
/// ball 3 kg, rod 0.5 m).
struct PlanarPendulumParams {
  double slider_mass = 2.0;
  double gantry_mass = 3.0;
  double ball_mass = 3.0;
  double rod_length = 0.5;
  double gravity = 9.81;
};

/// Cyclic x = (x, y) base position; shape y = (theta1, theta2).
/// Valid for |theta2| < pi/2 - 0.05 where m_33 = m r^2 cos^2(theta2) stays away from zero.
MechanicalSystem planar_pendulum(const PlanarPendulumParams& p = {},
                                 DampingField damping = zero_damping(2));

inline constexpr double kPendulumTheta2Limit = 1.5207963267948966;  // pi/2 - 0.05

/// Three-link planar chain on a horizontal plane, link 3 centred on its joint.
/// Defaults are the reference parameter set.
struct ThreeLinkParams {
  double l1 = 0.5, l2 = 0.5;
  double r1 = 0.1, r2 = 0.1;
  double I1 = 2.0, I2 = 2.0, I3 = 2.0;
  double m1 = 10.0, m2 = 10.0, m3 = 10.0;
};

struct ThreeLinkInertia {
  double alpha;
  double beta;
  double delta;
};

ThreeLinkInertia three_link_inertia(const ThreeLinkParams& p);

/// Cyclic x = (theta1, theta3); shape y = (theta2). No potential.
MechanicalSystem three_link(const ThreeLinkParams& p = {},
                            DampingField damping = zero_damping(2));

/// Text description of a model: mass entries are expressions of the shape
/// variables, damping entries expressions of the cyclic variables.
struct GenericModelSpec {
  std::string name = "generic";
  std::vector<std::string> cyclic_names;
  std::vector<std::string> shape_names;
  std::vector<std::vector<std::string>> mass;     ///< n x n
  std::vector<std::vector<std::string>> damping;  ///< r x r; empty means zero
  std::string potential;                          ///< empty means zero
};

/// Builds a system with finite-difference partials. Rejects asymmetric
/// mass matrices and mass entries that reference cyclic variables.
MechanicalSystem generic_system(const GenericModelSpec& spec);

/// Parses a damping matrix of expressions over the cyclic variable names.
DampingField expression_damping(const std::vector<std::vector<std::string>>& entries,
                                const std::vector<std::string>& cyclic_names);

struct BuiltinModelInfo {
  std::string name;
  std::string summary;
};

std::vector<BuiltinModelInfo> builtin_models();

}  // namespace cyclic
