#pragma once

#include "cyclic/damping_potential.hpp"
#include "cyclic/mechanical_system.hpp"

#include <functional>
#include <vector>

namespace cyclic {

/// Fixed-step classical RK4 settings.
struct IntegratorSpec {
  double dt = 1e-3;
  double t_final = 1.0;
  /// Keep every k-th step in the returned trajectory (the final step is always kept).
  int record_every = 1;

  void validate() const;
};

/// Maps the current state (including time) to actuated forces u, length n - r.
using Controller = std::function<Vector(const GeneralizedState&)>;

Controller zero_controller(const DimensionSplit& dims);

struct Trajectory {
  std::vector<double> times;
  std::vector<GeneralizedState> states;
  std::vector<Vector> controls;
  /// Damping-added momenta p + h(x) per sample.
  std::vector<Vector> momenta;
  /// |p + h(x) - mu| per sample, componentwise.
  std::vector<Vector> residuals;
  /// Values of the first integrals at the initial state.
  Vector mu;
  /// Largest residual component over every integration step, recorded or not.
  double max_residual = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  const GeneralizedState& final_state() const { return states.back(); }
};

/// Christoffel symbol of the first kind [ij,k], 0-based indices into q = (x, y).
/// Throws std::out_of_range for bad indices.
double christoffel(const MechanicalSystem& system, const Vector& q, int i, int j, int k);

/// sum_ij [ij,k] qdot^i qdot^j for every k.
Vector velocity_forces(const MechanicalSystem& system, const Vector& y, const Vector& qdot);

/// Solves m(y) qddot = rhs for the forced Euler-Lagrange equations:
/// cyclic rows carry -k(x) xdot, shape rows carry u - dV/dy, both minus the
/// velocity forces. Throws DomainError if m(y) is not positive definite.
Vector forced_accelerations(const MechanicalSystem& system, const GeneralizedState& state,
                            const Vector& u);

/// dL/dxdot = m_xx xdot + m_xy ydot.
Vector ordinary_momentum(const MechanicalSystem& system, const GeneralizedState& state);

/// dL/dxdot + h(x); constant along every trajectory of the forced dynamics.
Vector damping_added_momentum(const MechanicalSystem& system, const DampingPotential& potential,
                              const GeneralizedState& state);

double kinetic_energy(const MechanicalSystem& system, const GeneralizedState& state);
double mechanical_energy(const MechanicalSystem& system, const GeneralizedState& state);
/// Rate of work done on the system: u . ydot - xdot^T k(x) xdot.
double input_power(const MechanicalSystem& system, const GeneralizedState& state, const Vector& u);

/// RK4 over [0, t_final]. mu is taken from the initial state and never re-estimated.
/// Throws IntegrationError on domain exit or a non-finite state.
Trajectory integrate(const MechanicalSystem& system, const DampingPotential& potential,
                     const GeneralizedState& initial, const Controller& controller,
                     const IntegratorSpec& spec);

/// xdot = -m_xx^{-1} dU_mu/dx - m_xx^{-1} m_xy ydot.
Vector reduced_cyclic_velocity(const MechanicalSystem& system, const ShiftedPotential& shifted,
                               const Vector& x, const Vector& y, const Vector& ydot);

/// New control input tau (desired shape acceleration) as a function of state.
using AccelerationLaw = std::function<Vector(const GeneralizedState&)>;

/// Integrates the decoupled pair (reduced cyclic equation, yddot = tau) by RK4.
/// States carry xdot from the reduced equation; controls hold tau.
Trajectory integrate_decoupled(const MechanicalSystem& system, const ShiftedPotential& shifted,
                               const GeneralizedState& initial, const AccelerationLaw& tau,
                               const IntegratorSpec& spec);

/// Empirical check of the inertia bounds and the settling of the shape
/// velocities along a trajectory.
struct HypothesisReport {
  double c1 = 0.0;  ///< min eigenvalue of m_xx(y(t))
  double c2 = 0.0;  ///< max eigenvalue of m_xx(y(t))
  double c3 = 0.0;  ///< max spectral norm of m_xy(y(t))
  double tail_ydot_mean = 0.0;  ///< mean |ydot| over the last 10% of the horizon
  bool tail_settled = false;    ///< tail_ydot_mean < 1e-4
  bool pass = false;            ///< c1 > 0 and all bounds finite
};

inline constexpr double kTailWindowFraction = 0.1;
inline constexpr double kTailSettleThreshold = 1e-4;

HypothesisReport check_recovery_hypotheses(const MechanicalSystem& system,
                                           const Trajectory& trajectory);

}  // namespace cyclic
