#include "cyclic/damping_potential.hpp"
#include "cyclic/errors.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cyclic;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

/// Hand-derived h for K2, used as the oracle wherever the library's own closed form would be circular.
Vector h_k2(const Vector& x) {
  Vector h(2);
  h << 5 * x[0] + 4 * x[1] + 2 * std::sin(x[0]), 4 * x[0] + 4 * x[1] + 2 * std::sin(x[1]);
  return h;
}

/// K2 without the closed forms, so construction has to integrate.
DampingField k2_numeric() {
  const DampingField k2 = cosine_coupled_damping();
  return DampingField(2, [k2](const Vector& x) { return k2(x); });
}

Matrix fd_hessian(const DampingPotential& p, const Vector& x, double step = 1e-4) {
  const auto r = x.size();
  Matrix H(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      auto U = [&](double di, double dj) {
        Vector q = x;
        q[i] += di;
        q[j] += dj;
        return p.U(q);
      };
      H(i, j) = (U(step, step) - U(step, -step) - U(-step, step) + U(-step, -step)) / (4 * step * step);
    }
  return H;
}

double rel(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

const Box kBox = Box::cube(2, 5.0);

}  // namespace

// -- condition checks -------------------------------------------------------

TEST(VerifyDampingConditions, CosineCoupledPasses) {
  const auto rep = verify_damping_conditions(cosine_coupled_damping(), kBox, 21);
  EXPECT_TRUE(rep.symmetry.pass);
  EXPECT_TRUE(rep.integrability.pass);
  EXPECT_TRUE(rep.damping_conditions_pass());
}

TEST(VerifyDampingConditions, AsymmetricConstantFailsWithWitness) {
  Matrix k(2, 2);
  k << 1, 1, 0, 1;
  const auto rep = verify_damping_conditions(constant_damping(k), kBox, 5);
  EXPECT_FALSE(rep.symmetry.pass);
  ASSERT_TRUE(rep.symmetry.witness.has_value());
  EXPECT_NEAR(rep.symmetry.worst_residual, 1.0, 1e-15);
}

TEST(VerifyDampingConditions, CurlFreeViolationFails) {
  const DampingField k(2, [](const Vector& x) {
    Matrix m(2, 2);
    m << 1, x[0] * x[0], x[0] * x[0], 1;
    return m;
  });
  const auto rep = verify_damping_conditions(k, kBox, 11);
  EXPECT_TRUE(rep.symmetry.pass);
  EXPECT_FALSE(rep.integrability.pass);
  ASSERT_TRUE(rep.integrability.witness.has_value());
  // |dk11/dx2 - dk12/dx1| = 2|x1| is largest on the box edge.
  EXPECT_NEAR(rep.integrability.worst_residual, 10.0, 1e-4);
  EXPECT_THROW(construct_h(k, kBox), ValidationError);
}

TEST(VerifyDampingConditions, RejectsCoarseGridAndMismatch) {
  EXPECT_THROW(verify_damping_conditions(zero_damping(2), kBox, 4), ValidationError);
  EXPECT_THROW(verify_damping_conditions(zero_damping(3), kBox, 9), ValidationError);
}

TEST(ConditionReport, SerializesEveryCheck) {
  const auto j = to_json(verify_damping_conditions(cosine_coupled_damping(), kBox, 5));
  EXPECT_TRUE(j.contains("symmetry"));
  EXPECT_TRUE(j.contains("integrability"));
  EXPECT_TRUE(j.contains("scope"));
  EXPECT_TRUE(j["pass"].get<bool>());
}

// -- h and U ----------------------------------------------------------------

TEST(ConstructH, ConstantDamping) {
  const auto p = construct_h(constant_damping(diag2(3, 3)), kBox);
  Vector x(2);
  x << 0.7, -1.9;
  EXPECT_LE((p.h(x) - 3.0 * x).norm(), 1e-14);
  EXPECT_EQ(p.source(), PotentialSource::ClosedForm);
}

TEST(ConstructH, CosineCoupledClosedFormAndQuadrature) {
  std::mt19937_64 rng(3);
  const auto closed = construct_h(cosine_coupled_damping(), kBox);
  const auto numeric = construct_h(k2_numeric(), kBox);
  EXPECT_EQ(numeric.source(), PotentialSource::PathIntegral);
  for (int i = 0; i < 50; ++i) {
    const Vector x = oracle::uniform(rng, 2, -5, 5);
    EXPECT_LE((closed.h(x) - h_k2(x)).norm(), 1e-12);
    EXPECT_LE((numeric.h(x) - h_k2(x)).norm(), 1e-10);
  }
  EXPECT_LE(numeric.jacobian_report().max_relative_residual, 1e-5);
}

TEST(ConstructH, ZeroDamping) {
  const auto p = construct_potential(zero_damping(2), kBox);
  Vector x(2);
  x << 1.0, 2.0;
  EXPECT_EQ(p.h(x).norm(), 0.0);
  EXPECT_EQ(p.U(x), 0.0);
}

TEST(ConstructH, PathIndependenceAgainstStaircase) {
  std::mt19937_64 rng(5);
  const auto numeric = construct_h(k2_numeric(), kBox);
  for (int i = 0; i < 50; ++i) {
    const Vector x = oracle::uniform(rng, 2, -5, 5);
    EXPECT_LE((numeric.h(x) - oracle::staircase_h(k2_numeric(), x)).norm(), 1e-8);
  }
}

TEST(ConstructU, QuadraticFromConstantDamping) {
  const auto p = construct_potential(constant_damping(diag2(3, 3)), kBox);
  Vector x(2);
  x << 0.4, -2.0;
  EXPECT_NEAR(p.U(x), 1.5 * x.squaredNorm(), 1e-13);
}

TEST(ConstructU, CosineCoupledNormalizedAtOrigin) {
  std::mt19937_64 rng(9);
  auto U2 = [](const Vector& x) {
    const double s = x[0] + x[1];
    return 0.5 * x[0] * x[0] + 2 * s * s - 2 * std::cos(x[0]) - 2 * std::cos(x[1]);
  };
  const auto closed = construct_potential(cosine_coupled_damping(), kBox);
  const auto numeric = construct_potential(k2_numeric(), kBox);
  EXPECT_NEAR(numeric.U(Vector::Zero(2)), 0.0, 1e-15);
  for (int i = 0; i < 30; ++i) {
    const Vector x = oracle::uniform(rng, 2, -5, 5);
    EXPECT_NEAR(closed.U(x), U2(x) + 4.0, 1e-12);
    EXPECT_NEAR(numeric.U(x), U2(x) + 4.0, 1e-9);
  }
}

TEST(ConstructU, FromVectorField) {
  const auto p = construct_U([](const Vector& x) { return (3.0 * x).eval(); }, 2, kBox);
  Vector x(2);
  x << 1.0, -1.0;
  EXPECT_NEAR(p.U(x), 3.0, 1e-12);
  EXPECT_NEAR(p.damping()(x)(0, 0), 3.0, 1e-6);

  const auto zero = construct_U([](const Vector& x) { return Vector::Zero(x.size()).eval(); }, 2, kBox);
  EXPECT_EQ(zero.U(x), 0.0);
}

TEST(ConstructU, RejectsNonGradientField) {
  auto rot = [](const Vector& x) {
    Vector h(2);
    h << -x[1], x[0];
    return h;
  };
  EXPECT_THROW(construct_U(rot, 2, kBox), ValidationError);
}

TEST(ConstructU, MissingUIsALogicError) {
  const auto p = construct_h(cosine_coupled_damping(), kBox);
  EXPECT_FALSE(p.has_U());
  EXPECT_THROW(p.U(Vector::Zero(2)), std::logic_error);
}

TEST(RoundTrip, JacobianOfHAndHessianOfU) {
  std::mt19937_64 rng(21);
  for (const auto& k : {constant_damping(diag2(3, 3)), cosine_coupled_damping(), k2_numeric(),
                        constant_damping(diag2(6, 3))}) {
    const auto p = construct_potential(k, kBox);
    std::vector<Vector> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(oracle::uniform(rng, 2, -4.9, 4.9));
    EXPECT_LE(check_h_jacobian(p, pts).max_relative_residual, 1e-5);
    EXPECT_LE(check_U_gradient(p, pts).max_relative_residual, 1e-5);
    EXPECT_LE(check_U_hessian(p, pts).max_relative_residual, 1e-4);
    // Independent second differences of U.
    for (const auto& x : pts) EXPECT_LE(rel(fd_hessian(p, x), k(x)), 1e-4);
  }
}

// -- equilibrium and shifted potential --------------------------------------

TEST(FindEquilibrium, LinearOneStep) {
  const auto p = construct_potential(constant_damping(diag2(3, 3)), kBox);
  const auto eq = find_equilibrium(p, Vector::Constant(2, 3.0), Vector::Zero(2));
  EXPECT_LE((eq.point - Vector::Ones(2)).norm(), 1e-14);
  EXPECT_EQ(eq.iterations, 1);
}

TEST(FindEquilibrium, ReturnsGuessWhenAlreadySolved) {
  const auto p = construct_potential(cosine_coupled_damping(), kBox);
  Vector x0(2);
  x0 << 0.3, -0.8;
  const auto eq = find_equilibrium(p, p.h(x0), x0);
  EXPECT_EQ(eq.point, x0);
  EXPECT_EQ(eq.iterations, 0);
}

TEST(FindEquilibrium, CosineCoupledMatchesScanOracle) {
  const auto p = construct_potential(cosine_coupled_damping(), kBox);
  Vector mu(2);
  mu << 2.0, 0.0;
  const auto eq = find_equilibrium(p, mu, Vector::Zero(2));
  const Vector ref = oracle::scan_root_2d([&](const Vector& x) { return (h_k2(x) - mu).eval(); }, -2, 2);
  EXPECT_LE((eq.point - ref).norm(), 1e-6);
  EXPECT_LE((h_k2(eq.point) - mu).norm(), 1e-9);
}

TEST(FindEquilibrium, RandomMomentaMatchScanOracle) {
  const auto p = construct_potential(cosine_coupled_damping(), kBox);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const Vector mu = h_k2(oracle::uniform(rng, 2, -1, 1));
    const auto eq = find_equilibrium(p, mu, Vector::Zero(2));
    const Vector ref =
        oracle::scan_root_2d([&](const Vector& x) { return (h_k2(x) - mu).eval(); }, -1.5, 1.5, 121);
    EXPECT_LE((eq.point - ref).norm(), 1e-6);
  }
}

TEST(FindEquilibrium, ErrorsCarryTrace) {
  // h = x - 3 sin x has three roots near the origin; Newton from a point
  // where k < 0 is refused.
  const auto p = diagonal_h({[](double s) { return 1.0 - 3.0 * std::cos(s); }});
  EXPECT_THROW(find_equilibrium(p, Vector::Constant(1, 0.5), Vector::Zero(1)), SolverError);

  // No root at all: h is bounded while mu is not reachable.
  const auto bounded = diagonal_h({[](double s) { return std::exp(-s * s); }});
  try {
    find_equilibrium(bounded, Vector::Constant(1, 5.0), Vector::Zero(1));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_FALSE(e.trace().empty());
  }
}

TEST(ShiftedPotential, ZeroMomentum) {
  const auto s = build_shifted_potential(construct_potential(constant_damping(diag2(3, 3)), kBox),
                                         Vector::Zero(2));
  Vector x(2);
  x << 0.5, 1.5;
  EXPECT_LE(s.equilibrium().norm(), 1e-15);
  EXPECT_NEAR(s(x), 1.5 * x.squaredNorm(), 1e-13);
}

TEST(ShiftedPotential, NonzeroMomentum) {
  const auto s = build_shifted_potential(construct_potential(constant_damping(diag2(3, 3)), kBox),
                                         Vector::Constant(2, 3.0));
  EXPECT_LE((s.equilibrium() - Vector::Ones(2)).norm(), 1e-14);
  Vector x(2);
  x << -0.5, 2.5;
  EXPECT_NEAR(s(x), 1.5 * (x - Vector::Ones(2)).squaredNorm(), 1e-12);
  EXPECT_NEAR(s(s.equilibrium()), 0.0, 1e-15);
}

TEST(ShiftedPotential, CosineCoupledGradientAndEquilibrium) {
  const auto base = construct_potential(cosine_coupled_damping(), kBox);
  EXPECT_LE(build_shifted_potential(base, Vector::Zero(2)).equilibrium().norm(), 1e-15);

  std::mt19937_64 rng(29);
  const Vector mu = h_k2(oracle::uniform(rng, 2, -1, 1));
  const auto s = build_shifted_potential(base, mu);
  EXPECT_LE((base.h(s.equilibrium()) - mu).norm(), 1e-9);
  for (int i = 0; i < 50; ++i) {
    const Vector x = oracle::uniform(rng, 2, -4, 4);
    Vector fd(2);
    for (int a = 0; a < 2; ++a) {
      Vector xp = x, xm = x;
      xp[a] += 1e-6;
      xm[a] -= 1e-6;
      fd[a] = (s(xp) - s(xm)) / 2e-6;
    }
    const Vector g = s.gradient(x);
    EXPECT_LE((g - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()), 1e-5);
    EXPECT_LE((g - (h_k2(x) - mu)).norm(), 1e-12);
  }
}

// -- critical-point surrogate -----------------------------------------------

TEST(CriticalPoint, ConvexQuadraticPasses) {
  const auto s = build_shifted_potential(construct_potential(constant_damping(diag2(3, 3)), kBox),
                                         Vector::Constant(2, 3.0));
  for (double hw : {2.0, 10.0, 100.0}) {
    const auto rep = check_critical_point(s, Box::cube(2, hw), 101);
    EXPECT_TRUE(rep.unique_minimum.pass && rep.level_separation.pass && rep.gradient_separation.pass) << hw;
    EXPECT_FALSE(rep.scope_note.empty());
  }
}

TEST(CriticalPoint, CosineCoupledPassesOnLargeBox) {
  const auto s = build_shifted_potential(construct_potential(cosine_coupled_damping(), Box::cube(2, 10)),
                                         Vector::Zero(2));
  const auto rep = check_critical_point(s, Box::cube(2, 10.0), 401);
  EXPECT_TRUE(rep.unique_minimum.pass);
  EXPECT_TRUE(rep.level_separation.pass);
  EXPECT_TRUE(rep.gradient_separation.pass);
}

TEST(CriticalPoint, NegativeDampingIsAMaximum) {
  const auto s = build_shifted_potential(construct_potential(constant_damping(diag2(-2, -2)), kBox),
                                         Vector::Zero(2));
  EXPECT_NEAR(s(Vector::Ones(2)), -2.0, 1e-12);
  const auto rep = check_critical_point(s, kBox, 51);
  EXPECT_FALSE(rep.unique_minimum.pass);
  ASSERT_TRUE(rep.unique_minimum.witness.has_value());
  EXPECT_FALSE(rep.all_pass());
}

TEST(CriticalPoint, BoxMustContainEquilibrium) {
  const auto s = build_shifted_potential(construct_potential(constant_damping(diag2(3, 3)), kBox),
                                         Vector::Constant(2, 30.0));
  EXPECT_THROW(check_critical_point(s, kBox, 11), ValidationError);
}

// -- per-axis construction --------------------------------------------------

TEST(DiagonalH, ConstantAxes) {
  const auto p = diagonal_h({[](double) { return 3.0; }, [](double) { return 3.0; }});
  Vector x(2);
  x << 1.25, -0.5;
  EXPECT_LE((p.h(x) - 3.0 * x).norm(), 1e-13);
  EXPECT_EQ(p.source(), PotentialSource::AxisIntegral);
}

TEST(DiagonalH, ThreeLinkPotential) {
  const auto p = diagonal_h({[](double) { return 6.0; }, [](double) { return 3.0; }});
  Vector x(2);
  x << 2.0, -3.0;
  EXPECT_NEAR(p.U(x), 3.0 * 4.0 + 1.5 * 9.0, 1e-12);
}

TEST(DiagonalH, CubicGrowthSatisfiesAllConditions) {
  const auto p = diagonal_h({[](double s) { return 1.0 + s * s; }});
  for (double s : {-2.0, 0.3, 1.7}) EXPECT_NEAR(p.h(Vector::Constant(1, s))[0], s + s * s * s / 3, 1e-13);
  const auto rep = check_diagonal_conditions(p, Vector::Constant(1, 0.5), Box::cube(1, 5.0));
  ASSERT_EQ(rep.axes.size(), 1u);
  EXPECT_TRUE(rep.axes[0].unique_root);
  EXPECT_TRUE(rep.axes[0].positive_at_root);
  EXPECT_TRUE(rep.axes[0].separated);
  EXPECT_TRUE(rep.axes[0].divergent);
  EXPECT_TRUE(rep.boundedness_conditions());
  const double root = rep.axes[0].root;
  EXPECT_NEAR(root + root * root * root / 3, 0.5, 1e-12);
}

TEST(DiagonalH, SaturatingDampingIsNotDivergent) {
  // h = atan(x) is bounded, so mu outside (-pi/2, pi/2) has no equilibrium.
  const auto p = diagonal_h({[](double s) { return 1.0 / (1.0 + s * s); }});
  const auto rep = check_diagonal_conditions(p, Vector::Constant(1, 2.0), Box::cube(1, 50.0));
  EXPECT_FALSE(rep.axes[0].unique_root);
  EXPECT_FALSE(rep.recovery_conditions());
}

TEST(DiagonalH, UniformlyPositiveDampingPassesEverywhere) {
  std::vector<DampingField::AxisFunction> k{[](double s) { return 2.0 + std::sin(s) * std::sin(s); },
                                            [](double s) { return 1.0 + 0.5 * std::cos(3 * s); }};
  const auto p = diagonal_h(k);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 5; ++i) {
    const Vector mu = oracle::uniform(rng, 2, -4, 4);
    const auto s = build_shifted_potential(p, mu);
    const auto rep = check_diagonal_conditions(p, mu, Box::cube(2, 8.0), 2001);
    EXPECT_TRUE(rep.boundedness_conditions());
    for (int a = 0; a < 2; ++a) EXPECT_NEAR(rep.axes[static_cast<std::size_t>(a)].root, s.equilibrium()[a], 1e-9);
    const auto cp = check_critical_point(s, Box::cube(2, 8.0), 61);
    EXPECT_TRUE(cp.unique_minimum.pass && cp.level_separation.pass && cp.gradient_separation.pass);
  }
}

TEST(DiagonalH, RequiresDiagonalField) {
  const auto p = construct_potential(cosine_coupled_damping(), kBox);
  EXPECT_THROW(check_diagonal_conditions(p, Vector::Zero(2), kBox), ValidationError);
}
