#include "cyclic/dynamics.hpp"

#include "cyclic/errors.hpp"

#include <cmath>
#include <limits>

namespace cyclic {

void IntegratorSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("integrator dt must be positive");
  if (!(t_final >= dt) || !std::isfinite(t_final))
    throw ValidationError("integrator t_final must be at least dt");
  if (record_every < 1) throw ValidationError("record_every must be >= 1");
}

Controller zero_controller(const DimensionSplit& dims) {
  return [m = dims.shape()](const GeneralizedState&) { return Vector::Zero(m).eval(); };
}

double christoffel(const MechanicalSystem& system, const Vector& q, int i, int j, int k) {
  const int n = system.dims.n, r = system.dims.r;
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n)
    throw std::out_of_range("christoffel: index out of range");
  if (q.size() != n) throw std::out_of_range("christoffel: q must have length n");
  const std::vector<Matrix> d = system.mass.partials(q.tail(n - r));
  // d/dx^alpha of the mass matrix vanishes.
  auto dm = [&](int row, int col, int wrt) {
    return wrt < r ? 0.0 : d[static_cast<std::size_t>(wrt - r)](row, col);
  };
  return 0.5 * (dm(i, k, j) + dm(j, k, i) - dm(i, j, k));
}

Vector velocity_forces(const MechanicalSystem& system, const Vector& y, const Vector& qdot) {
  const int r = system.dims.r;
  const std::vector<Matrix> d = system.mass.partials(y);
  Vector c = Vector::Zero(system.dims.n);
  for (std::size_t a = 0; a < d.size(); ++a) {
    const Vector dq = d[a] * qdot;
    c += qdot[r + static_cast<Eigen::Index>(a)] * dq;
    c[r + static_cast<Eigen::Index>(a)] -= 0.5 * qdot.dot(dq);
  }
  return c;
}

Vector forced_accelerations(const MechanicalSystem& system, const GeneralizedState& state,
                            const Vector& u) {
  const int r = system.dims.r, m = system.dims.shape();
  if (u.size() != m) throw ValidationError("control vector must have length n - r");
  if (!system.valid_domain(state.y))
    throw DomainError(system.name + ": configuration outside the valid domain (" +
                      system.domain_description + ")");
  const Vector qdot = state.qdot();
  Vector rhs = -velocity_forces(system, state.y, qdot);
  rhs.head(r) -= system.damping(state.x) * state.xdot;
  rhs.tail(m) += u - system.potential.gradient(state.y);

  Eigen::LLT<Matrix> llt(system.mass(state.y));
  if (llt.info() != Eigen::Success)
    throw DomainError(system.name + ": mass matrix is not positive definite at this configuration");
  return llt.solve(rhs);
}

Vector ordinary_momentum(const MechanicalSystem& system, const GeneralizedState& state) {
  const int r = system.dims.r, m = system.dims.shape();
  const Matrix M = system.mass(state.y);
  return M.topLeftCorner(r, r) * state.xdot + M.topRightCorner(r, m) * state.ydot;
}

Vector damping_added_momentum(const MechanicalSystem& system, const DampingPotential& potential,
                              const GeneralizedState& state) {
  return ordinary_momentum(system, state) + potential.h(state.x);
}

double kinetic_energy(const MechanicalSystem& system, const GeneralizedState& state) {
  const Vector qdot = state.qdot();
  return 0.5 * qdot.dot(system.mass(state.y) * qdot);
}

double mechanical_energy(const MechanicalSystem& system, const GeneralizedState& state) {
  return kinetic_energy(system, state) + system.potential(state.y);
}

double input_power(const MechanicalSystem& system, const GeneralizedState& state, const Vector& u) {
  return u.dot(state.ydot) - state.xdot.dot(system.damping(state.x) * state.xdot);
}

namespace {

/// Shared fixed-step RK4 driver over a flat state vector.
template <class Rhs, class Record, class Check>
void rk4(Vector z, const IntegratorSpec& spec, Rhs&& rhs, Record&& record, Check&& check) {
  spec.validate();
  const auto steps = static_cast<long>(std::ceil(spec.t_final / spec.dt - 1e-9));
  record(0L, 0.0, z, true);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    const double t_next = std::min(static_cast<double>(k + 1) * spec.dt, spec.t_final);
    const double h = t_next - t;
    const Vector k1 = rhs(t, z);
    const Vector k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1);
    const Vector k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2);
    const Vector k4 = rhs(t + h, z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) throw IntegrationError("non-finite state (integration unstable)", t_next);
    check(t_next, z);
    const bool last = k + 1 == steps;
    record(k + 1, t_next, z, last || (k + 1) % spec.record_every == 0);
  }
}

}  // namespace

Trajectory integrate(const MechanicalSystem& system, const DampingPotential& potential,
                     const GeneralizedState& initial, const Controller& controller,
                     const IntegratorSpec& spec) {
  initial.check_dims(system.dims);
  if (!initial.finite()) throw ValidationError("initial state must be finite");
  if (potential.dim() != system.dims.r)
    throw ValidationError("damping potential dimension differs from r");
  if (!system.valid_domain(initial.y))
    throw IntegrationError(system.name + ": initial state outside the valid domain (" +
                               system.domain_description + ")",
                           initial.t);

  const DimensionSplit dims = system.dims;
  const int n = dims.n;
  Trajectory traj;
  traj.mu = damping_added_momentum(system, potential, initial);

  auto unpack = [&](double t, const Vector& z) {
    return GeneralizedState::from_q(dims, z.head(n), z.tail(n), initial.t + t);
  };

  auto rhs = [&](double t, const Vector& z) {
    const GeneralizedState s = unpack(t, z);
    Vector dz(2 * n);
    dz.head(n) = z.tail(n);
    try {
      dz.tail(n) = forced_accelerations(system, s, controller(s));
    } catch (const DomainError& e) {
      throw IntegrationError(e.what(), s.t);
    }
    return dz;
  };

  auto check = [&](double t, const Vector& z) {
    if (!system.valid_domain(z.segment(dims.r, dims.shape())))
      throw IntegrationError(system.name + ": trajectory left the valid domain (" +
                                 system.domain_description + ")",
                             initial.t + t);
  };

  auto record = [&](long, double t, const Vector& z, bool keep) {
    const GeneralizedState s = unpack(t, z);
    const Vector p = damping_added_momentum(system, potential, s);
    const Vector res = (p - traj.mu).cwiseAbs();
    traj.max_residual = std::max(traj.max_residual, res.maxCoeff());
    if (!keep) return;
    traj.times.push_back(s.t);
    traj.controls.push_back(controller(s));
    traj.momenta.push_back(p);
    traj.residuals.push_back(res);
    traj.states.push_back(s);
  };

  Vector z(2 * n);
  z << initial.q(), initial.qdot();
  rk4(std::move(z), spec, rhs, record, check);
  return traj;
}

Vector reduced_cyclic_velocity(const MechanicalSystem& system, const ShiftedPotential& shifted,
                               const Vector& x, const Vector& y, const Vector& ydot) {
  const int r = system.dims.r, m = system.dims.shape();
  const Matrix M = system.mass(y);
  Eigen::LLT<Matrix> llt(M.topLeftCorner(r, r));
  if (llt.info() != Eigen::Success)
    throw DomainError(system.name + ": cyclic mass block is singular or indefinite");
  return -llt.solve(shifted.gradient(x) + M.topRightCorner(r, m) * ydot);
}

Trajectory integrate_decoupled(const MechanicalSystem& system, const ShiftedPotential& shifted,
                               const GeneralizedState& initial, const AccelerationLaw& tau,
                               const IntegratorSpec& spec) {
  initial.check_dims(system.dims);
  const int r = system.dims.r, m = system.dims.shape();
  const DampingPotential& potential = shifted.base();

  Trajectory traj;
  traj.mu = shifted.mu();

  auto unpack = [&](double t, const Vector& z) {
    GeneralizedState s;
    s.x = z.head(r);
    s.y = z.segment(r, m);
    s.ydot = z.tail(m);
    s.xdot = reduced_cyclic_velocity(system, shifted, s.x, s.y, s.ydot);
    s.t = initial.t + t;
    return s;
  };

  auto rhs = [&](double t, const Vector& z) {
    const GeneralizedState s = unpack(t, z);
    Vector dz(r + 2 * m);
    dz << s.xdot, s.ydot, tau(s);
    return dz;
  };

  auto check = [&](double t, const Vector& z) {
    if (!system.valid_domain(z.segment(r, m)))
      throw IntegrationError(system.name + ": trajectory left the valid domain", initial.t + t);
  };

  auto record = [&](long, double t, const Vector& z, bool keep) {
    const GeneralizedState s = unpack(t, z);
    const Vector p = damping_added_momentum(system, potential, s);
    const Vector res = (p - traj.mu).cwiseAbs();
    traj.max_residual = std::max(traj.max_residual, res.maxCoeff());
    if (!keep) return;
    traj.times.push_back(s.t);
    traj.controls.push_back(tau(s));
    traj.momenta.push_back(p);
    traj.residuals.push_back(res);
    traj.states.push_back(s);
  };

  Vector z(r + 2 * m);
  z << initial.x, initial.y, initial.ydot;
  rk4(std::move(z), spec, rhs, record, check);
  return traj;
}

HypothesisReport check_recovery_hypotheses(const MechanicalSystem& system,
                                           const Trajectory& trajectory) {
  HypothesisReport rep;
  if (trajectory.empty()) {
    rep.c1 = rep.c2 = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const int r = system.dims.r, m = system.dims.shape();
  rep.c1 = std::numeric_limits<double>::infinity();
  rep.c2 = -std::numeric_limits<double>::infinity();
  for (const GeneralizedState& s : trajectory.states) {
    const Matrix M = system.mass(s.y);
    const Matrix block = M.topLeftCorner(r, r);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
    rep.c1 = std::min(rep.c1, eig.eigenvalues().minCoeff());
    rep.c2 = std::max(rep.c2, eig.eigenvalues().maxCoeff());
    Eigen::JacobiSVD<Matrix> svd(M.topRightCorner(r, m));
    rep.c3 = std::max(rep.c3, svd.singularValues()(0));
  }

  const double t0 = trajectory.times.front(), t1 = trajectory.times.back();
  const double tail_start = t1 - kTailWindowFraction * (t1 - t0);
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (trajectory.times[i] < tail_start) continue;
    sum += trajectory.states[i].ydot.norm();
    ++count;
  }
  rep.tail_ydot_mean = count > 0 ? sum / count : 0.0;
  rep.tail_settled = rep.tail_ydot_mean < kTailSettleThreshold;
  rep.pass = rep.c1 > 0.0 && std::isfinite(rep.c1) && std::isfinite(rep.c2) &&
             std::isfinite(rep.c3);
  return rep;
}

}  // namespace cyclic
