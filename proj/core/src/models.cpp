#include "cyclic/errors.hpp"
#include "cyclic/mechanical_system.hpp"

#include <cmath>

namespace cyclic {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string(what) + " must be positive and finite");
}

}  // namespace

MechanicalSystem planar_pendulum(const PlanarPendulumParams& p, DampingField damping) {
  require_positive(p.slider_mass, "slider mass");
  require_positive(p.gantry_mass, "gantry bar mass");
  require_positive(p.ball_mass, "pendulum ball mass");
  require_positive(p.rod_length, "rod length");
  if (!(p.gravity >= 0.0)) throw ValidationError("gravity must be non-negative");
  if (damping.dim() != 2) throw ValidationError("planar pendulum needs a 2x2 damping field");

  const DimensionSplit dims = DimensionSplit::make(4, 2);
  const double Ma = p.slider_mass, Mb = p.gantry_mass, m = p.ball_mass, r = p.rod_length;
  const double mr = m * r, mr2 = m * r * r, mgr = m * p.gravity * r;

  // q = (x, y, theta1, theta2)
  auto eval = [=](const Vector& th) {
    const double c1 = std::cos(th[0]), s1 = std::sin(th[0]);
    const double c2 = std::cos(th[1]), s2 = std::sin(th[1]);
    Matrix M = Matrix::Zero(4, 4);
    M(0, 0) = Ma + Mb + m;
    M(1, 1) = Ma + m;
    M(0, 2) = M(2, 0) = -mr * c1 * c2;
    M(0, 3) = M(3, 0) = mr * s1 * s2;
    M(1, 3) = M(3, 1) = mr * c2;
    M(2, 2) = mr2 * c2 * c2;
    M(3, 3) = mr2;
    return M;
  };

  auto partials = [=](const Vector& th) {
    const double c1 = std::cos(th[0]), s1 = std::sin(th[0]);
    const double c2 = std::cos(th[1]), s2 = std::sin(th[1]);
    Matrix d1 = Matrix::Zero(4, 4);
    d1(0, 2) = d1(2, 0) = mr * s1 * c2;
    d1(0, 3) = d1(3, 0) = mr * c1 * s2;

    Matrix d2 = Matrix::Zero(4, 4);
    d2(0, 2) = d2(2, 0) = mr * c1 * s2;
    d2(0, 3) = d2(3, 0) = mr * s1 * c2;
    d2(1, 3) = d2(3, 1) = -mr * s2;
    d2(2, 2) = -2.0 * mr2 * c2 * s2;
    return std::vector<Matrix>{d1, d2};
  };

  // Rod hangs below the base at zero angles.
  PotentialField potential(
      [mgr](const Vector& th) { return -mgr * std::cos(th[0]) * std::cos(th[1]); },
      [mgr](const Vector& th) {
        Vector g(2);
        g << mgr * std::sin(th[0]) * std::cos(th[1]), mgr * std::cos(th[0]) * std::sin(th[1]);
        return g;
      });

  MechanicalSystem sys{
      .name = "planar_pendulum",
      .dims = dims,
      .mass = MassMatrixField(dims, eval, partials),
      .potential = std::move(potential),
      .damping = std::move(damping),
      .cyclic_names = {"x", "y"},
      .shape_names = {"theta1", "theta2"},
  };
  sys.valid_domain = [](const Vector& th) { return std::abs(th[1]) < kPendulumTheta2Limit; };
  sys.domain_description = "|theta2| < pi/2 - 0.05 rad";
  return sys;
}

ThreeLinkInertia three_link_inertia(const ThreeLinkParams& p) {
  return ThreeLinkInertia{
      .alpha = p.I1 + p.I2 + p.I3 + p.m1 * p.r1 * p.r1 + p.m2 * (p.l1 * p.l1 + p.r2 * p.r2) +
               p.m3 * (p.l1 * p.l1 + p.l2 * p.l2),
      .beta = p.l1 * (p.m2 * p.r2 + p.m3 * p.l2),
      .delta = p.I2 + p.I3 + p.m2 * p.r2 * p.r2 + p.m3 * p.l2 * p.l2,
  };
}

MechanicalSystem three_link(const ThreeLinkParams& p, DampingField damping) {
  for (auto [v, what] : {std::pair{p.l1, "l1"}, {p.l2, "l2"}, {p.r1, "r1"}, {p.r2, "r2"},
                         {p.I1, "I1"}, {p.I2, "I2"}, {p.I3, "I3"}, {p.m1, "m1"}, {p.m2, "m2"},
                         {p.m3, "m3"}})
    require_positive(v, what);
  if (damping.dim() != 2) throw ValidationError("three-link model needs a 2x2 damping field");

  const DimensionSplit dims = DimensionSplit::make(3, 2);
  const auto [alpha, beta, delta] = three_link_inertia(p);
  const double I3 = p.I3;

  // q = (theta1, theta3, theta2)
  auto eval = [=](const Vector& y) {
    const double c2 = std::cos(y[0]);
    Matrix M(3, 3);
    M << alpha + 2.0 * beta * c2, I3, delta + beta * c2,
         I3, I3, I3,
         delta + beta * c2, I3, delta;
    return M;
  };
  auto partials = [=](const Vector& y) {
    const double s2 = std::sin(y[0]);
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = -2.0 * beta * s2;
    d(0, 2) = d(2, 0) = -beta * s2;
    return std::vector<Matrix>{d};
  };

  return MechanicalSystem{
      .name = "three_link",
      .dims = dims,
      .mass = MassMatrixField(dims, eval, partials),
      .potential = PotentialField::zero(1),
      .damping = std::move(damping),
      .cyclic_names = {"theta1", "theta3"},
      .shape_names = {"theta2"},
  };
}

std::vector<BuiltinModelInfo> builtin_models() {
  return {
      {"planar_pendulum",
       "base block free in the plane (cyclic x, y) with a gimbal-actuated rod (theta1, theta2); "
       "params slider_mass, gantry_mass, ball_mass, rod_length, gravity"},
      {"three_link",
       "three-link planar chain on a horizontal plane, joints 1 and 3 unactuated and cyclic "
       "(theta1, theta3), joint 2 actuated; params l1, l2, r1, r2, I1, I2, I3, m1, m2, m3"},
  };
}

}  // namespace cyclic
