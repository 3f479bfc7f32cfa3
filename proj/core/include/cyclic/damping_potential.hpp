#pragma once

#include "cyclic/mechanical_system.hpp"
#include "cyclic/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cyclic {

/// Step and tolerance for the finite-difference integrability test.
inline constexpr double kIntegrabilityStep = 1e-5;
inline constexpr double kIntegrabilityTolerance = 1e-4;
/// Pointwise symmetry tolerance for k(x).
inline constexpr double kSymmetryTolerance = 1e-12;
/// Absolute tolerance for path quadratures.
inline constexpr double kQuadratureTolerance = 1e-10;
/// Newton stopping criterion on |h(x) - mu|.
inline constexpr double kEquilibriumTolerance = 1e-10;

struct ConditionCheck {
  bool evaluated = false;
  bool pass = true;
  double worst_residual = 0.0;
  /// Point of the worst residual. Always present on failure.
  std::optional<Vector> witness;
  std::string detail;
};

/// Outcome of sampled condition checks on a compact box.
struct ConditionReport {
  Box domain;
  int grid = 0;
  ConditionCheck symmetry;
  ConditionCheck integrability;
  ConditionCheck unique_minimum;  ///< unique critical point which is a minimum
  ConditionCheck level_separation;  ///< U_mu bounded away from U_mu(x_e) outside a ball
  ConditionCheck gradient_separation;  ///< |dU_mu| bounded away from zero outside a ball
  std::string scope_note;

  bool damping_conditions_pass() const { return symmetry.pass && integrability.pass; }
  /// True when every evaluated check passed.
  bool all_pass() const;
};

nlohmann::json to_json(const ConditionReport& report);

/// Checks k = k^T pointwise and dk_ab/dx^c = dk_ac/dx^b by central differences on a
/// grid x grid x ... lattice over `box`. Failures are reported, never thrown.
ConditionReport verify_damping_conditions(const DampingField& damping, const Box& box, int grid);

enum class PotentialSource { ClosedForm, PathIntegral, AxisIntegral };

std::string to_string(PotentialSource s);

/// Largest finite-difference discrepancy found when checking a derivative identity.
struct DerivativeCheck {
  double max_relative_residual = 0.0;
  Vector worst_point;
  int samples = 0;
};

/// The functions h (dh_a/dx^b = k_ab) and U (dU/dx^a = h_a) generated by a
/// damping field, normalized so that h(0) = 0 and U(0) = 0.
class DampingPotential {
 public:
  DampingPotential(DampingField damping, VectorField h, std::optional<ScalarField> U,
                   PotentialSource source);

  Vector h(const Vector& x) const { return h_(x); }
  /// Throws std::logic_error if U has not been constructed.
  double U(const Vector& x) const;
  bool has_U() const noexcept { return U_.has_value(); }

  int dim() const noexcept { return damping_.dim(); }
  PotentialSource source() const noexcept { return source_; }
  const DampingField& damping() const noexcept { return damping_; }

  /// Residuals of dh/dx against k at the construction sample points.
  const DerivativeCheck& jacobian_report() const noexcept { return report_; }

 private:
  friend DampingPotential construct_U(const DampingPotential&, const Box&);
  friend DampingPotential construct_h(const DampingField&, const Box&, int);
  friend DampingPotential diagonal_h(std::vector<DampingField::AxisFunction>);

  DampingField damping_;
  VectorField h_;
  std::optional<ScalarField> U_;
  PotentialSource source_;
  DerivativeCheck report_;
};

/// h from k. Uses the field's closed form when present, otherwise
/// h_a(x) = int_0^1 k_ab(s x) x^b ds by adaptive Gauss-Kronrod quadrature.
/// Throws ValidationError when the integrability check fails on `working_box`.
DampingPotential construct_h(const DampingField& damping, const Box& working_box, int grid = 9);

/// Adds U(x) = int_0^1 h(s x) . x ds (or the shifted closed form).
/// Throws ValidationError if the Jacobian of h is not symmetric on `working_box`.
DampingPotential construct_U(const DampingPotential& with_h, const Box& working_box);

/// Potential generated directly from a vector field h with symmetric Jacobian.
/// The associated damping field is the finite-difference Jacobian of h.
DampingPotential construct_U(VectorField h, int r, const Box& working_box);

/// construct_U(construct_h(...)).
DampingPotential construct_potential(const DampingField& damping, const Box& working_box,
                                     int grid = 9);

/// Per-axis construction for diagonal damping k = diag(k_1(x^1), ..., k_r(x^r)):
/// h_a(x) = int_0^{x^a} k_a(s) ds and U(x) = sum_a int_0^{x^a} h_a(s) ds.
DampingPotential diagonal_h(std::vector<DampingField::AxisFunction> k_funcs);

/// Max relative residual of the finite-difference Jacobian of h against k.
DerivativeCheck check_h_jacobian(const DampingPotential& p, const std::vector<Vector>& points);
/// Max relative residual of the finite-difference gradient of U against h.
DerivativeCheck check_U_gradient(const DampingPotential& p, const std::vector<Vector>& points);
/// Max relative residual of the finite-difference Hessian of U against k.
DerivativeCheck check_U_hessian(const DampingPotential& p, const std::vector<Vector>& points);

struct Equilibrium {
  Vector point;
  int iterations = 0;
  std::vector<double> residual_trace;
};

/// Newton iteration on h(x) = mu with Jacobian k(x), falling back to step
/// halving (up to 50 halvings) when a full step does not reduce the residual.
/// Throws SolverError after 200 iterations or on stagnation.
Equilibrium find_equilibrium(const DampingPotential& base, const Vector& mu, const Vector& x0);

/// U_mu(x) = U(x) - mu . x, shifted so that U_mu(x_e) = 0 at its critical point x_e.
class ShiftedPotential {
 public:
  ShiftedPotential(DampingPotential base, Vector mu, Vector x_e);

  double operator()(const Vector& x) const;
  /// h(x) - mu.
  Vector gradient(const Vector& x) const { return base_.h(x) - mu_; }

  const DampingPotential& base() const noexcept { return base_; }
  const Vector& mu() const noexcept { return mu_; }
  const Vector& equilibrium() const noexcept { return x_e_; }

 private:
  DampingPotential base_;
  Vector mu_;
  Vector x_e_;
  double offset_;
};

/// Solves for x_e (starting at x0, default origin) and builds U_mu.
ShiftedPotential build_shifted_potential(const DampingPotential& base, const Vector& mu,
                                         const std::optional<Vector>& x0 = std::nullopt);

/// Grid certificate for the critical-point conditions on a compact box:
/// unique minimum - the grid minimizer of U_mu lies next to x_e and k(x_e) is positive definite;
/// level separation - U_mu > U_mu(x_e) at every grid point outside a small ball around x_e;
/// gradient separation - |dU_mu| > 0 at every grid point outside that ball.
/// This is a surrogate on the box only.
ConditionReport check_critical_point(const ShiftedPotential& shifted, const Box& box, int grid = 401);

/// Per-axis conditions for diagonal damping, scanned on a box.
struct AxisConditions {
  int root_count = 0;             ///< sign changes of h_a - mu_a on the scan
  double root = 0.0;              ///< x_e^a when root_count == 1
  bool unique_root = false;       ///< (i)
  bool positive_at_root = false;  ///< (ii) k_a(x_e^a) > 0
  bool separated = false;         ///< (iii) inf |h_a - mu_a| > 0 away from x_e^a
  bool divergent = false;         ///< (iv) h_a grows without bound towards both box ends
  double separation = 0.0;
};

struct DiagonalConditionReport {
  std::vector<AxisConditions> axes;
  Box domain;
  std::string scope_note;
  bool recovery_conditions() const;  ///< (i)-(iii) on every axis
  bool boundedness_conditions() const;  ///< (i)-(iv) on every axis
};

DiagonalConditionReport check_diagonal_conditions(const DampingPotential& diagonal,
                                                  const Vector& mu, const Box& box,
                                                  int samples = 4001);

}  // namespace cyclic
