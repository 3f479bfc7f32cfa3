#pragma once

#include "cyclic/dynamics.hpp"
#include "cyclic/mechanical_system.hpp"

#include <string>

namespace cyclic {

/// Desired shape motion y_d(t) with its first two derivatives.
struct ReferenceTrajectory {
  std::function<Vector(double)> position;
  std::function<Vector(double)> velocity;
  std::function<Vector(double)> acceleration;
  std::string description;
};

/// Per-axis PD gains for the tracking law. c1 multiplies the rate error,
/// c0 the position error; both strictly positive.
struct PdGains {
  Vector c1;
  Vector c0;

  static PdGains uniform(int dim, double c1, double c0);
  void validate(int dim) const;
};

/// Critically damped, settling in about 1.5 s.
inline constexpr double kDefaultRateGain = 6.0;
inline constexpr double kDefaultPositionGain = 9.0;

/// Terms of the partial feedback linearization u = f + g tau.
struct PflTerms {
  Vector f;
  Matrix g;
};

/// f_a = ([ij,a] - m_a,alpha m^alpha,beta [ij,beta]) qdot^i qdot^j
///       - m_a,alpha m^alpha,beta k_beta,gamma xdot^gamma + dV/dy^a
/// g_ab = m_ab - m_a,alpha m^alpha,beta m_beta,b
/// Throws DomainError when the cyclic mass block is not invertible.
PflTerms pfl_terms(const MechanicalSystem& system, const GeneralizedState& state);

/// Actuated force that makes the closed loop satisfy yddot = tau exactly.
Vector pfl_control(const MechanicalSystem& system, const GeneralizedState& state,
                   const Vector& tau);

/// tau = yddot_d - c1 (ydot - ydot_d) - c0 (y - y_d), evaluated at state.t.
Vector pd_tau(const ReferenceTrajectory& ref, const PdGains& gains, const GeneralizedState& state);

/// Quintic rest-to-rest move per axis (zero velocity and acceleration at both
/// ends), held at `goal` after t_move and at `start` before 0.
ReferenceTrajectory rest_to_rest_reference(const Vector& start, const Vector& goal, double t_move);

/// Constant-rate move from `start` to `goal` over t_move, with velocity
/// blended in and out over t_blend at each end (smootherstep velocity, so the
/// acceleration and jerk are continuous). Requires 0 < 2 t_blend <= t_move.
ReferenceTrajectory blended_ramp_reference(const Vector& start, const Vector& goal, double t_move,
                                           double t_blend);

/// y_d = offset + A sin(2 pi f t) e_axis; other axes stay at `offset`.
ReferenceTrajectory sinusoid_reference(double amplitude, double frequency, int axis,
                                       const Vector& offset);

/// Checks derivative consistency of a reference by central differences over [0, horizon].
/// Returns the largest absolute mismatch (velocity vs position and acceleration vs velocity).
double reference_consistency(const ReferenceTrajectory& ref, double horizon, int samples = 200);

/// pd_tau wrapped as a state feedback law.
AccelerationLaw pd_tracking_law(ReferenceTrajectory ref, PdGains gains);

/// pfl_control(pd_tau(...)).
Controller pfl_pd_controller(const MechanicalSystem& system, ReferenceTrajectory ref, PdGains gains);

/// u = c0 (y_d - y) + c1 (ydot_d - ydot), applied directly without the
/// feedback-linearizing transformation. Offered for comparison only.
Controller plain_pd_controller(ReferenceTrajectory ref, PdGains gains);

}  // namespace cyclic
