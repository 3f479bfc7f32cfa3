#include "cyclic/control.hpp"

#include "cyclic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cyclic {

PdGains PdGains::uniform(int dim, double c1, double c0) {
  PdGains g{Vector::Constant(dim, c1), Vector::Constant(dim, c0)};
  g.validate(dim);
  return g;
}

void PdGains::validate(int dim) const {
  if (c1.size() != dim || c0.size() != dim)
    throw ValidationError("PD gains must have one entry per actuated axis");
  if (!(c1.array() > 0.0).all() || !(c0.array() > 0.0).all())
    throw ValidationError("PD gains must be strictly positive");
}

PflTerms pfl_terms(const MechanicalSystem& system, const GeneralizedState& state) {
  const int r = system.dims.r, m = system.dims.shape();
  const Matrix M = system.mass(state.y);
  const auto Mxx = M.topLeftCorner(r, r);
  const auto Mxy = M.topRightCorner(r, m);
  const auto Myx = M.bottomLeftCorner(m, r);
  const auto Myy = M.bottomRightCorner(m, m);

  Eigen::LLT<Matrix> llt(Mxx);
  if (llt.info() != Eigen::Success)
    throw DomainError(system.name + ": cyclic mass block is not invertible");

  const Vector c = velocity_forces(system, state.y, state.qdot());
  const Vector cyclic_force = c.head(r) + system.damping(state.x) * state.xdot;

  PflTerms out;
  out.f = c.tail(m) - Myx * llt.solve(cyclic_force) + system.potential.gradient(state.y);
  out.g = Myy - Myx * llt.solve(Matrix(Mxy));
  return out;
}

Vector pfl_control(const MechanicalSystem& system, const GeneralizedState& state,
                   const Vector& tau) {
  if (tau.size() != system.dims.shape()) throw ValidationError("tau must have length n - r");
  const PflTerms t = pfl_terms(system, state);
  return t.f + t.g * tau;
}

Vector pd_tau(const ReferenceTrajectory& ref, const PdGains& gains, const GeneralizedState& state) {
  const double t = state.t;
  return ref.acceleration(t) -
         gains.c1.cwiseProduct(state.ydot - ref.velocity(t)) -
         gains.c0.cwiseProduct(state.y - ref.position(t));
}

ReferenceTrajectory rest_to_rest_reference(const Vector& start, const Vector& goal, double t_move) {
  if (!(t_move > 0.0)) throw ValidationError("rest-to-rest move time must be positive");
  if (start.size() != goal.size()) throw ValidationError("start and goal must have equal length");
  const Vector delta = goal - start;

  // s(u) = 10u^3 - 15u^4 + 6u^5 on u = t / t_move in [0, 1].
  auto phase = [t_move](double t) { return std::clamp(t / t_move, 0.0, 1.0); };
  auto inside = [t_move](double t) { return t > 0.0 && t < t_move; };

  ReferenceTrajectory ref;
  ref.position = [=](double t) {
    const double u = phase(t);
    return (start + delta * (u * u * u * (10.0 + u * (-15.0 + 6.0 * u)))).eval();
  };
  ref.velocity = [=](double t) {
    if (!inside(t)) return Vector::Zero(delta.size()).eval();
    const double u = phase(t);
    return (delta * (30.0 * u * u * (1.0 - u) * (1.0 - u) / t_move)).eval();
  };
  ref.acceleration = [=](double t) {
    if (!inside(t)) return Vector::Zero(delta.size()).eval();
    const double u = phase(t);
    return (delta * (60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (t_move * t_move))).eval();
  };
  ref.description = "quintic rest-to-rest over " + std::to_string(t_move) + " s";
  return ref;
}

ReferenceTrajectory blended_ramp_reference(const Vector& start, const Vector& goal, double t_move,
                                           double t_blend) {
  if (!(t_blend > 0.0) || !(2.0 * t_blend <= t_move))
    throw ValidationError("blended ramp needs 0 < 2 * t_blend <= t_move");
  if (start.size() != goal.size()) throw ValidationError("start and goal must have equal length");
  const Vector delta = goal - start;
  const double b = t_blend, T = t_move;
  // Cruise rate such that the blends plus the cruise cover delta exactly.
  const Vector rate = delta / (T - b);

  struct Sample {
    double p, v, a;  // per unit of `rate`
  };
  auto unit = [b, T](double t) -> Sample {
    if (t <= 0.0) return {0.0, 0.0, 0.0};
    if (t >= T) return {T - b, 0.0, 0.0};
    // Velocity follows smootherstep 10s^3 - 15s^4 + 6s^5 inside a blend.
    auto blend = [b](double s) -> Sample {
      const double s2 = s * s, s3 = s2 * s;
      return {b * s2 * s2 * (2.5 + s * (-3.0 + s)), s3 * (10.0 + s * (-15.0 + 6.0 * s)),
              30.0 * s2 * (1.0 - s) * (1.0 - s) / b};
    };
    if (t < b) return blend(t / b);
    if (t <= T - b) return {0.5 * b + (t - b), 1.0, 0.0};
    const Sample m = blend((T - t) / b);
    return {(T - b) - m.p, m.v, -m.a};
  };

  ReferenceTrajectory ref;
  ref.position = [=](double t) { return (start + rate * unit(t).p).eval(); };
  ref.velocity = [=](double t) { return (rate * unit(t).v).eval(); };
  ref.acceleration = [=](double t) { return (rate * unit(t).a).eval(); };
  ref.description = "constant-rate move over " + std::to_string(t_move) + " s with " +
                    std::to_string(t_blend) + " s blends";
  return ref;
}

ReferenceTrajectory sinusoid_reference(double amplitude, double frequency, int axis,
                                       const Vector& offset) {
  if (!(frequency > 0.0)) throw ValidationError("sinusoid frequency must be positive");
  if (axis < 0 || axis >= offset.size()) throw ValidationError("sinusoid axis out of range");
  const double w = 2.0 * std::numbers::pi * frequency;
  const Eigen::Index ax = axis;

  ReferenceTrajectory ref;
  ref.position = [=](double t) {
    Vector y = offset;
    y[ax] += amplitude * std::sin(w * t);
    return y;
  };
  ref.velocity = [=](double t) {
    Vector v = Vector::Zero(offset.size());
    v[ax] = amplitude * w * std::cos(w * t);
    return v;
  };
  ref.acceleration = [=](double t) {
    Vector a = Vector::Zero(offset.size());
    a[ax] = -amplitude * w * w * std::sin(w * t);
    return a;
  };
  ref.description = "sinusoid on axis " + std::to_string(axis);
  return ref;
}

double reference_consistency(const ReferenceTrajectory& ref, double horizon, int samples) {
  constexpr double step = 1e-5;
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = horizon * i / samples;
    const Vector dv = (ref.position(t + step) - ref.position(t - step)) / (2.0 * step);
    const Vector da = (ref.velocity(t + step) - ref.velocity(t - step)) / (2.0 * step);
    worst = std::max(worst, (dv - ref.velocity(t)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (da - ref.acceleration(t)).cwiseAbs().maxCoeff());
  }
  return worst;
}

AccelerationLaw pd_tracking_law(ReferenceTrajectory ref, PdGains gains) {
  return [ref = std::move(ref), gains = std::move(gains)](const GeneralizedState& s) {
    return pd_tau(ref, gains, s);
  };
}

Controller pfl_pd_controller(const MechanicalSystem& system, ReferenceTrajectory ref, PdGains gains) {
  gains.validate(system.dims.shape());
  return [system, law = pd_tracking_law(std::move(ref), std::move(gains))](
             const GeneralizedState& s) { return pfl_control(system, s, law(s)); };
}

Controller plain_pd_controller(ReferenceTrajectory ref, PdGains gains) {
  return [ref = std::move(ref), gains = std::move(gains)](const GeneralizedState& s) {
    return (gains.c0.cwiseProduct(ref.position(s.t) - s.y) +
            gains.c1.cwiseProduct(ref.velocity(s.t) - s.ydot))
        .eval();
  };
}

}  // namespace cyclic
