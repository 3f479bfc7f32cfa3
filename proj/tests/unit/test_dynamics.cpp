#include "cyclic/control.hpp"
#include "cyclic/dynamics.hpp"
#include "cyclic/errors.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cyclic;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

const Box kBox = Box::cube(2, 20.0);

struct Run {
  MechanicalSystem system;
  DampingPotential potential;
  Trajectory trajectory;
};

Run pendulum_run(DampingField k, double dt, double t_final, int record_every = 10) {
  auto sys = planar_pendulum({}, std::move(k));
  auto pot = construct_potential(sys.damping, kBox);
  Vector goal(2);
  goal << kPi / 3, kPi / 4;
  auto ctl = pfl_pd_controller(sys, rest_to_rest_reference(Vector::Zero(2), goal, 3.0),
                               PdGains::uniform(2, 6, 9));
  IntegratorSpec spec{dt, t_final, record_every};
  auto traj = integrate(sys, pot, GeneralizedState::at_rest(sys.dims), ctl, spec);
  return {std::move(sys), std::move(pot), std::move(traj)};
}

Run three_link_run(double dt, double t_final, int record_every = 10) {
  auto sys = three_link({}, constant_damping(diag2(6, 3)));
  auto pot = construct_potential(sys.damping, kBox);
  const Vector start = Vector::Constant(1, kPi / 3);
  auto ctl = pfl_pd_controller(sys, blended_ramp_reference(start, start.array() + 32 * kPi, 8.0, 0.5),
                               PdGains::uniform(1, 6, 9));
  GeneralizedState s0 = GeneralizedState::at_rest(sys.dims);
  s0.y = start;
  auto traj = integrate(sys, pot, s0, ctl, IntegratorSpec{dt, t_final, record_every});
  return {std::move(sys), std::move(pot), std::move(traj)};
}

/// Unit-mass decoupled pair: free cyclic x, shape y on a unit spring.
MechanicalSystem oscillator() {
  GenericModelSpec s;
  s.cyclic_names = {"x"};
  s.shape_names = {"y"};
  s.mass = {{"1", "0"}, {"0", "1"}};
  s.potential = "0.5*y^2";
  return generic_system(s);
}

GeneralizedState random_state(std::mt19937_64& rng, const MechanicalSystem& sys, double y_lim) {
  GeneralizedState s;
  s.x = oracle::uniform(rng, sys.dims.r, -3, 3);
  s.y = oracle::uniform(rng, sys.dims.shape(), -y_lim, y_lim);
  s.xdot = oracle::uniform(rng, sys.dims.r, -2, 2);
  s.ydot = oracle::uniform(rng, sys.dims.shape(), -2, 2);
  return s;
}

}  // namespace

// -- Christoffel symbols and accelerations ----------------------------------

TEST(Christoffel, ConstantMassVanishes) {
  const auto sys = oscillator();
  Vector q(2);
  q << 0.3, 1.1;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) EXPECT_EQ(christoffel(sys, q, i, j, k), 0.0);
}

TEST(Christoffel, ThreeLinkAtQuarterTurn) {
  const auto sys = three_link();
  Vector q(3);
  q << 0.0, 0.0, kPi / 2;
  // [11,3] in 1-based (theta1, theta1, theta2) indexing.
  EXPECT_NEAR(christoffel(sys, q, 0, 0, 2), 3.0, 1e-12);
  EXPECT_THROW(christoffel(sys, q, 0, 0, 3), std::out_of_range);
  EXPECT_THROW(christoffel(sys, q, -1, 0, 0), std::out_of_range);
}

TEST(Christoffel, SymmetricInFirstTwoIndices) {
  const auto sys = planar_pendulum();
  std::mt19937_64 rng(41);
  for (int s = 0; s < 100; ++s) {
    Vector q(4);
    q << oracle::uniform(rng, 2, -3, 3), oracle::uniform(rng, 2, -1.4, 1.4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          EXPECT_DOUBLE_EQ(christoffel(sys, q, i, j, k), christoffel(sys, q, j, i, k));
  }
}

TEST(Christoffel, VelocityForcesAgreeWithSymbols) {
  const auto sys = planar_pendulum();
  std::mt19937_64 rng(43);
  const auto s = random_state(rng, sys, 1.2);
  const Vector q = s.q(), v = s.qdot();
  const Vector c = velocity_forces(sys, s.y, v);
  for (int k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) sum += christoffel(sys, q, i, j, k) * v[i] * v[j];
    EXPECT_NEAR(c[k], sum, 1e-12);
  }
}

TEST(ForcedAccelerations, RestWithoutForcesStaysAtRest) {
  const auto sys = three_link({}, constant_damping(diag2(6, 3)));
  const auto a = forced_accelerations(sys, GeneralizedState::at_rest(sys.dims), Vector::Zero(1));
  EXPECT_EQ(a.norm(), 0.0);
}

TEST(ForcedAccelerations, ThreeLinkMatchesLagrangianOracle) {
  const auto sys = three_link({}, constant_damping(diag2(6, 3)));
  GeneralizedState s = GeneralizedState::at_rest(sys.dims);
  s.ydot[0] = 1.0;
  const Vector a = forced_accelerations(sys, s, Vector::Zero(1));
  const Vector Q = Vector::Zero(3);  // xdot = 0, so no damping force
  const Vector ref = oracle::lagrangian_accelerations(sys, s.q(), s.qdot(), Q);
  EXPECT_LE((a - ref).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(ForcedAccelerations, RandomStatesMatchLagrangianOracle) {
  std::mt19937_64 rng(47);
  const std::vector<MechanicalSystem> systems{
      planar_pendulum({}, cosine_coupled_damping()),
      three_link({}, constant_damping(diag2(6, 3)))};
  for (const auto& sys : systems) {
    for (int i = 0; i < 50; ++i) {
      const auto s = random_state(rng, sys, 1.2);
      const Vector u = oracle::uniform(rng, sys.dims.shape(), -5, 5);
      Vector Q(sys.dims.n);
      Q << -sys.damping(s.x) * s.xdot, u;
      const Vector a = forced_accelerations(sys, s, u);
      const Vector ref = oracle::lagrangian_accelerations(sys, s.q(), s.qdot(), Q);
      EXPECT_LE((a - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff()), 1e-5)
          << sys.name;
    }
  }
}

TEST(ForcedAccelerations, DegenerateMassIsADomainError) {
  const auto sys = planar_pendulum();
  GeneralizedState s = GeneralizedState::at_rest(sys.dims);
  s.y[1] = kPi / 2;
  EXPECT_THROW(forced_accelerations(sys, s, Vector::Zero(2)), DomainError);
  EXPECT_THROW(forced_accelerations(sys, GeneralizedState::at_rest(sys.dims), Vector::Zero(3)),
               ValidationError);
}

// -- integration ------------------------------------------------------------

TEST(Integrate, FreeParticleIsExact) {
  GenericModelSpec spec;
  spec.cyclic_names = {"x"};
  spec.shape_names = {"y"};
  spec.mass = {{"1", "0"}, {"0", "1"}};
  const auto sys = generic_system(spec);
  const auto pot = construct_potential(sys.damping, Box::cube(1, 5));
  GeneralizedState s0 = GeneralizedState::at_rest(sys.dims);
  s0.xdot[0] = 1.0;
  const auto traj = integrate(sys, pot, s0, zero_controller(sys.dims), IntegratorSpec{1e-2, 1.0, 1});
  EXPECT_NEAR(traj.final_state().x[0], 1.0, 1e-12);
  EXPECT_NEAR(traj.times.back(), 1.0, 1e-12);
}

TEST(Integrate, HarmonicOscillatorMatchesCosine) {
  const auto sys = oscillator();
  const auto pot = construct_potential(sys.damping, Box::cube(1, 5));
  GeneralizedState s0 = GeneralizedState::at_rest(sys.dims);
  s0.y[0] = 1.0;
  const auto traj = integrate(sys, pot, s0, zero_controller(sys.dims), IntegratorSpec{1e-3, 1.0, 100});
  EXPECT_NEAR(traj.final_state().y[0], std::cos(1.0), 1e-8);
  EXPECT_NEAR(traj.final_state().ydot[0], -std::sin(1.0), 1e-8);
}

TEST(Integrate, TrajectoryBookkeeping) {
  const auto run = pendulum_run(constant_damping(diag2(3, 3)), 1e-2, 1.05, 7);
  const auto& t = run.trajectory;
  ASSERT_FALSE(t.empty());
  EXPECT_EQ(t.states.size(), t.size());
  EXPECT_EQ(t.controls.size(), t.size());
  EXPECT_EQ(t.momenta.size(), t.size());
  EXPECT_EQ(t.residuals.size(), t.size());
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t.times[i], t.times[i - 1]);
  EXPECT_DOUBLE_EQ(t.times.back(), 1.05);
  EXPECT_EQ(t.times[1], 7 * 1e-2);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t.states[i].t, t.times[i]);
}

TEST(Integrate, LeavingTheDomainIsReportedWithTime) {
  auto sys = planar_pendulum();
  const auto pot = construct_potential(sys.damping, Box::cube(2, 5));
  Vector goal(2);
  goal << 0.0, 2.0;
  auto ctl = pfl_pd_controller(sys, rest_to_rest_reference(Vector::Zero(2), goal, 1.0),
                               PdGains::uniform(2, 6, 9));
  try {
    integrate(sys, pot, GeneralizedState::at_rest(sys.dims), ctl, IntegratorSpec{1e-3, 3.0, 10});
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LT(e.time(), 1.0);
  }
}

TEST(Integrate, NonFiniteStateIsReported) {
  const auto sys = oscillator();
  const auto pot = construct_potential(sys.damping, Box::cube(1, 5));
  Controller blowup = [](const GeneralizedState& s) {
    return Vector::Constant(1, s.t > 0.5 ? std::numeric_limits<double>::infinity() : 0.0);
  };
  EXPECT_THROW(integrate(sys, pot, GeneralizedState::at_rest(sys.dims), blowup, IntegratorSpec{1e-2, 1.0, 1}),
               IntegrationError);
}

TEST(Integrate, RejectsBadSpecAndState) {
  const auto sys = oscillator();
  const auto pot = construct_potential(sys.damping, Box::cube(1, 5));
  const auto s0 = GeneralizedState::at_rest(sys.dims);
  EXPECT_THROW(integrate(sys, pot, s0, zero_controller(sys.dims), IntegratorSpec{0.0, 1.0, 1}), ValidationError);
  EXPECT_THROW(integrate(sys, pot, s0, zero_controller(sys.dims), IntegratorSpec{0.1, 0.01, 1}), ValidationError);
  EXPECT_THROW(integrate(sys, pot, s0, zero_controller(sys.dims), IntegratorSpec{0.1, 1.0, 0}), ValidationError);
  auto bad = s0;
  bad.x[0] = NAN;
  EXPECT_THROW(integrate(sys, pot, bad, zero_controller(sys.dims), IntegratorSpec{}), ValidationError);
}

TEST(Integrate, Deterministic) {
  const auto a = pendulum_run(cosine_coupled_damping(), 1e-2, 5.0, 1).trajectory;
  const auto b = pendulum_run(cosine_coupled_damping(), 1e-2, 5.0, 1).trajectory;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.states[i].x, b.states[i].x);
    EXPECT_EQ(a.states[i].ydot, b.states[i].ydot);
  }
}

// -- momenta and conservation -----------------------------------------------

TEST(Momentum, RestValues) {
  const auto sys = planar_pendulum({}, constant_damping(diag2(3, 3)));
  const auto pot = construct_potential(sys.damping, Box::cube(2, 5));
  auto s = GeneralizedState::at_rest(sys.dims);
  EXPECT_EQ(damping_added_momentum(sys, pot, s).norm(), 0.0);
  EXPECT_EQ(ordinary_momentum(sys, s).norm(), 0.0);
  s.x << 0.5, -0.2;
  s.y << 0.4, 0.3;
  const Vector p = damping_added_momentum(sys, pot, s);
  EXPECT_NEAR(p[0], 1.5, 1e-14);
  EXPECT_NEAR(p[1], -0.6, 1e-14);
}

TEST(Momentum, ZeroDampingConservesOrdinaryMomentum) {
  const auto run = pendulum_run(zero_damping(2), 1e-3, 10.0, 10);
  const Vector p0 = ordinary_momentum(run.system, run.trajectory.states.front());
  double drift = 0.0;
  for (const auto& s : run.trajectory.states)
    drift = std::max(drift, (ordinary_momentum(run.system, s) - p0).cwiseAbs().maxCoeff());
  EXPECT_LE(drift, 1e-9);
  // Both momenta coincide without damping.
  for (const auto& s : run.trajectory.states)
    EXPECT_LE((damping_added_momentum(run.system, run.potential, s) - ordinary_momentum(run.system, s)).norm(), 1e-15);
}

TEST(Momentum, DampingMakesOrdinaryMomentumVary) {
  const auto run = pendulum_run(constant_damping(diag2(3, 3)), 1e-3, 6.0, 10);
  double dev = 0.0;
  for (const auto& s : run.trajectory.states)
    dev = std::max(dev, ordinary_momentum(run.system, s).cwiseAbs().maxCoeff());
  EXPECT_GT(dev, 0.01);
  EXPECT_LE(run.trajectory.max_residual, 1e-10);
}

TEST(Conservation, FourthOrderUnderStepHalving) {
  // Three-link: residuals stay well above round-off at these steps.
  const double r1 = three_link_run(1e-3, 12.0, 1000).trajectory.max_residual;
  const double r2 = three_link_run(5e-4, 12.0, 1000).trajectory.max_residual;
  EXPECT_GE(std::log2(r1 / r2), 3.5) << r1 << " " << r2;

  // The pendulum reaches round-off near dt = 1e-3, so measure the order at coarser steps.
  const double p1 = pendulum_run(constant_damping(diag2(3, 3)), 1e-2, 10.0, 100).trajectory.max_residual;
  const double p2 = pendulum_run(constant_damping(diag2(3, 3)), 5e-3, 10.0, 100).trajectory.max_residual;
  EXPECT_GE(std::log2(p1 / p2), 3.5) << p1 << " " << p2;
}

TEST(Conservation, EnergyBookkeeping) {
  for (const auto& run : {pendulum_run(cosine_coupled_damping(), 1e-3, 10.0, 1), three_link_run(1e-3, 10.0, 1)}) {
    const auto& t = run.trajectory;
    std::vector<double> power;
    double scale = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      power.push_back(input_power(run.system, t.states[i], t.controls[i]));
      scale += std::abs(power.back()) * 1e-3;
    }
    const double work = oracle::simpson_samples(power, 1e-3);
    const double dE = mechanical_energy(run.system, t.states.back()) - mechanical_energy(run.system, t.states.front());
    EXPECT_LE(std::abs(dE - work), 1e-5 * std::max(1.0, scale)) << run.system.name;
  }
}

// -- reduced dynamics -------------------------------------------------------

TEST(ReducedVelocity, VanishesAtEquilibrium) {
  const auto sys = planar_pendulum({}, cosine_coupled_damping());
  const auto shifted = build_shifted_potential(construct_potential(sys.damping, Box::cube(2, 5)),
                                               (Vector(2) << 1.0, -0.5).finished());
  Vector y(2);
  y << 0.3, 0.2;
  EXPECT_LE(reduced_cyclic_velocity(sys, shifted, shifted.equilibrium(), y, Vector::Zero(2)).norm(), 1e-9);
}

TEST(ReducedVelocity, MatchesFullSimulation) {
  for (const auto& run : {pendulum_run(cosine_coupled_damping(), 1e-3, 20.0, 50), three_link_run(1e-3, 20.0, 50)}) {
    const auto shifted = build_shifted_potential(run.potential, run.trajectory.mu);
    double worst = 0.0;
    for (const auto& s : run.trajectory.states)
      worst = std::max(worst, (reduced_cyclic_velocity(run.system, shifted, s.x, s.y, s.ydot) - s.xdot).cwiseAbs().maxCoeff());
    EXPECT_LE(worst, 1e-6) << run.system.name;
  }
}

TEST(ReducedVelocity, ZeroDampingIsMomentumConservation) {
  const auto sys = planar_pendulum();
  const auto pot = construct_potential(sys.damping, Box::cube(2, 5));
  std::mt19937_64 rng(53);
  const auto s = random_state(rng, sys, 1.2);
  const Vector mu = ordinary_momentum(sys, s);
  const ShiftedPotential shifted(pot, mu, Vector::Zero(2));
  const Matrix M = sys.mass(s.y);
  const Vector expected = M.topLeftCorner(2, 2).ldlt().solve(mu - M.topRightCorner(2, 2) * s.ydot);
  EXPECT_LE((reduced_cyclic_velocity(sys, shifted, s.x, s.y, s.ydot) - expected).norm(), 1e-12);
  EXPECT_LE((expected - s.xdot).norm(), 1e-12);
}

// -- recovery hypotheses ----------------------------------------------------

TEST(Hypotheses, PendulumCyclicBlockIsConstant) {
  const auto run = pendulum_run(constant_damping(diag2(3, 3)), 1e-3, 40.0, 100);
  const auto h = check_recovery_hypotheses(run.system, run.trajectory);
  EXPECT_EQ(h.c1, 5.0);
  EXPECT_EQ(h.c2, 8.0);
  EXPECT_TRUE(h.pass);
  EXPECT_TRUE(h.tail_settled);
}

TEST(Hypotheses, ThreeLinkLowerBoundMatchesEigenvalueScan) {
  const auto run = three_link_run(1e-3, 30.0, 1);
  const auto h = check_recovery_hypotheses(run.system, run.trajectory);
  // theta2 sweeps through every angle, so the bound matches a full-circle scan.
  double scan = INFINITY;
  for (int i = 0; i <= 20000; ++i) {
    const double c = std::cos(2 * kPi * i / 20000.0);
    const double a = 13.7 + 6.0 * c, b = 2.0, d = 2.0;
    scan = std::min(scan, 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b));
  }
  EXPECT_GT(h.c1, 0.0);
  EXPECT_NEAR(h.c1, scan, 1e-3);
  EXPECT_TRUE(h.pass);
}

TEST(Hypotheses, RestStartTailPasses) {
  const auto sys = three_link({}, constant_damping(diag2(6, 3)));
  const auto pot = construct_potential(sys.damping, Box::cube(2, 5));
  const auto traj = integrate(sys, pot, GeneralizedState::at_rest(sys.dims), zero_controller(sys.dims),
                              IntegratorSpec{1e-2, 2.0, 1});
  const auto h = check_recovery_hypotheses(sys, traj);
  EXPECT_EQ(h.tail_ydot_mean, 0.0);
  EXPECT_TRUE(h.tail_settled);
  EXPECT_TRUE(h.pass);
}
