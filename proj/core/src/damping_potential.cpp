#include "cyclic/damping_potential.hpp"

#include "cyclic/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cyclic {

namespace {

constexpr double kQuadratureRelTol = 1e-13;
constexpr unsigned kQuadratureMaxDepth = 15;
constexpr double kJacobianStep = 1e-6;
constexpr double kHessianStep = 1e-4;

template <class F>
double gauss_kronrod(F f, double a, double b) {
  if (a == b) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, kQuadratureMaxDepth, kQuadratureRelTol, &error);
}

/// Calls fn(point) for each node of a grid^dim lattice over the box.
template <class F>
void for_each_lattice_point(const Box& box, int grid, F&& fn) {
  const int dim = box.dim();
  const Vector step = (box.upper - box.lower) / static_cast<double>(grid - 1);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Vector p = box.lower;
  for (;;) {
    for (int d = 0; d < dim; ++d) p[d] = box.lower[d] + step[d] * idx[static_cast<std::size_t>(d)];
    fn(p);
    int d = 0;
    while (d < dim && ++idx[static_cast<std::size_t>(d)] == grid) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == dim) break;
  }
}

double relative(double residual, double scale) { return residual / std::max(1.0, scale); }

std::string format_point(const Vector& p) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

std::vector<Vector> sample_points(const Box& box, int per_axis) {
  std::vector<Vector> pts;
  for_each_lattice_point(box, per_axis, [&](const Vector& p) { pts.push_back(p); });
  return pts;
}

Matrix fd_jacobian(const VectorField& f, const Vector& x, double step) {
  const Eigen::Index r = x.size();
  Matrix J(r, r);
  Vector probe = x;
  for (Eigen::Index b = 0; b < r; ++b) {
    probe[b] = x[b] + step;
    Vector plus = f(probe);
    probe[b] = x[b] - step;
    Vector minus = f(probe);
    probe[b] = x[b];
    J.col(b) = (plus - minus) / (2.0 * step);
  }
  return J;
}

Vector straight_path_h(const DampingField& k, const Vector& x) {
  const Eigen::Index r = x.size();
  Vector out = Vector::Zero(r);
  if (x.isZero(0.0)) return out;
  for (Eigen::Index a = 0; a < r; ++a) {
    out[a] = gauss_kronrod([&](double s) { return k(s * x).row(a).dot(x); }, 0.0, 1.0);
  }
  return out;
}

}  // namespace

bool ConditionReport::all_pass() const {
  for (const ConditionCheck* c :
       {&symmetry, &integrability, &unique_minimum, &level_separation, &gradient_separation})
    if (c->evaluated && !c->pass) return false;
  return true;
}

nlohmann::json to_json(const ConditionReport& report) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  auto check = [&](const ConditionCheck& c) {
    nlohmann::json j;
    j["evaluated"] = c.evaluated;
    if (!c.evaluated) return j;
    j["pass"] = c.pass;
    j["worst_residual"] = c.worst_residual;
    j["witness"] = c.witness ? nlohmann::json(vec(*c.witness)) : nlohmann::json(nullptr);
    j["detail"] = c.detail;
    return j;
  };
  nlohmann::json j;
  j["domain"] = {{"lower", vec(report.domain.lower)}, {"upper", vec(report.domain.upper)}};
  j["grid"] = report.grid;
  j["symmetry"] = check(report.symmetry);
  j["integrability"] = check(report.integrability);
  j["unique_minimum"] = check(report.unique_minimum);
  j["level_separation"] = check(report.level_separation);
  j["gradient_separation"] = check(report.gradient_separation);
  j["scope"] = report.scope_note;
  j["pass"] = report.all_pass();
  return j;
}

ConditionReport verify_damping_conditions(const DampingField& damping, const Box& box, int grid) {
  box.validate();
  if (grid < 5) throw ValidationError("condition grid needs at least 5 points per axis");
  if (box.dim() != damping.dim()) throw ValidationError("box dimension differs from damping dimension");

  ConditionReport rep;
  rep.domain = box;
  rep.grid = grid;
  rep.symmetry.evaluated = true;
  rep.integrability.evaluated = true;
  rep.scope_note = "sampled on a " + std::to_string(grid) + "-point-per-axis lattice over the box; "
                   "integrability by central differences (step 1e-5, tolerance 1e-4)";

  const int r = damping.dim();
  double worst_sym = -1.0, worst_int = -1.0;
  Vector sym_at, int_at;
  std::string int_detail;
  std::vector<Matrix> dk(static_cast<std::size_t>(r));

  for_each_lattice_point(box, grid, [&](const Vector& x) {
    Matrix k = damping(x);
    double sym = (k - k.transpose()).cwiseAbs().maxCoeff();
    if (sym > worst_sym) {
      worst_sym = sym;
      sym_at = x;
    }
    Vector probe = x;
    for (int c = 0; c < r; ++c) {
      probe[c] = x[c] + kIntegrabilityStep;
      Matrix plus = damping(probe);
      probe[c] = x[c] - kIntegrabilityStep;
      Matrix minus = damping(probe);
      probe[c] = x[c];
      dk[static_cast<std::size_t>(c)] = (plus - minus) / (2.0 * kIntegrabilityStep);
    }
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) {
          double res = std::abs(dk[static_cast<std::size_t>(c)](a, b) -
                                dk[static_cast<std::size_t>(b)](a, c));
          if (res > worst_int) {
            worst_int = res;
            int_at = x;
            int_detail = "dk" + std::to_string(a + 1) + std::to_string(b + 1) + "/dx" +
                         std::to_string(c + 1) + " differs from dk" + std::to_string(a + 1) +
                         std::to_string(c + 1) + "/dx" + std::to_string(b + 1);
          }
        }
  });

  rep.symmetry.worst_residual = worst_sym;
  rep.symmetry.witness = sym_at;
  rep.symmetry.pass = worst_sym <= kSymmetryTolerance;
  rep.symmetry.detail = rep.symmetry.pass ? "k symmetric at every sample"
                                          : "k != k^T at " + format_point(sym_at);
  rep.integrability.worst_residual = worst_int;
  rep.integrability.witness = int_at;
  rep.integrability.pass = worst_int <= kIntegrabilityTolerance;
  rep.integrability.detail = rep.integrability.pass
                                 ? "mixed partials agree at every sample"
                                 : int_detail + " at " + format_point(int_at);
  return rep;
}

std::string to_string(PotentialSource s) {
  switch (s) {
    case PotentialSource::ClosedForm: return "closed-form";
    case PotentialSource::PathIntegral: return "path-integral";
    case PotentialSource::AxisIntegral: return "axis-integral";
  }
  return "unknown";
}

// -- DampingPotential -------------------------------------------------------

DampingPotential::DampingPotential(DampingField damping, VectorField h,
                                   std::optional<ScalarField> U, PotentialSource source)
    : damping_(std::move(damping)), h_(std::move(h)), U_(std::move(U)), source_(source) {}

double DampingPotential::U(const Vector& x) const {
  if (!U_) throw std::logic_error("DampingPotential: U has not been constructed");
  return (*U_)(x);
}

DerivativeCheck check_h_jacobian(const DampingPotential& p, const std::vector<Vector>& points) {
  DerivativeCheck out;
  VectorField h = [&p](const Vector& x) { return p.h(x); };
  for (const Vector& x : points) {
    Matrix k = p.damping()(x);
    Matrix J = fd_jacobian(h, x, kJacobianStep);
    double res = relative((J - k).cwiseAbs().maxCoeff(), k.cwiseAbs().maxCoeff());
    if (res >= out.max_relative_residual) {
      out.max_relative_residual = res;
      out.worst_point = x;
    }
    ++out.samples;
  }
  return out;
}

DerivativeCheck check_U_gradient(const DampingPotential& p, const std::vector<Vector>& points) {
  DerivativeCheck out;
  for (const Vector& x : points) {
    Vector h = p.h(x);
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index a = 0; a < x.size(); ++a) {
      probe[a] = x[a] + kJacobianStep;
      double plus = p.U(probe);
      probe[a] = x[a] - kJacobianStep;
      double minus = p.U(probe);
      probe[a] = x[a];
      g[a] = (plus - minus) / (2.0 * kJacobianStep);
    }
    double res = relative((g - h).cwiseAbs().maxCoeff(), h.cwiseAbs().maxCoeff());
    if (res >= out.max_relative_residual) {
      out.max_relative_residual = res;
      out.worst_point = x;
    }
    ++out.samples;
  }
  return out;
}

DerivativeCheck check_U_hessian(const DampingPotential& p, const std::vector<Vector>& points) {
  DerivativeCheck out;
  const double s = kHessianStep;
  for (const Vector& x : points) {
    const Eigen::Index r = x.size();
    Matrix k = p.damping()(x);
    Matrix H(r, r);
    for (Eigen::Index a = 0; a < r; ++a)
      for (Eigen::Index b = 0; b < r; ++b) {
        auto at = [&](double da, double db) {
          Vector q = x;
          q[a] += da;
          q[b] += db;
          return p.U(q);
        };
        H(a, b) = (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4.0 * s * s);
      }
    double res = relative((H - k).cwiseAbs().maxCoeff(), k.cwiseAbs().maxCoeff());
    if (res >= out.max_relative_residual) {
      out.max_relative_residual = res;
      out.worst_point = x;
    }
    ++out.samples;
  }
  return out;
}

DampingPotential construct_h(const DampingField& damping, const Box& working_box, int grid) {
  ConditionReport rep = verify_damping_conditions(damping, working_box, grid);
  if (!rep.integrability.pass)
    throw ValidationError("damping field fails the integrability condition, no h exists: " +
                          rep.integrability.detail);

  const int r = damping.dim();
  VectorField h;
  PotentialSource source;
  if (damping.closed_form_h()) {
    VectorField cf = *damping.closed_form_h();
    Vector h0 = cf(Vector::Zero(r));
    h = [cf, h0](const Vector& x) { return (cf(x) - h0).eval(); };
    source = PotentialSource::ClosedForm;
  } else {
    h = [damping](const Vector& x) { return straight_path_h(damping, x); };
    source = PotentialSource::PathIntegral;
  }

  DampingPotential out(damping, std::move(h), std::nullopt, source);
  out.report_ = check_h_jacobian(out, sample_points(working_box, 3));
  return out;
}

DampingPotential construct_U(const DampingPotential& with_h, const Box& working_box) {
  if (with_h.has_U()) return with_h;
  working_box.validate();

  VectorField hf = [with_h](const Vector& x) { return with_h.h(x); };
  double worst = 0.0;
  Vector worst_at;
  for (const Vector& x : sample_points(working_box, 5)) {
    Matrix J = fd_jacobian(hf, x, kJacobianStep);
    double asym = (J - J.transpose()).cwiseAbs().maxCoeff();
    if (asym >= worst) {
      worst = asym;
      worst_at = x;
    }
  }
  if (worst > kIntegrabilityTolerance)
    throw ValidationError("Jacobian of h is not symmetric (residual " + std::to_string(worst) +
                          " at " + format_point(worst_at) + "), no U exists");

  DampingPotential out = with_h;
  const int r = with_h.dim();
  const DampingField& k = with_h.damping();
  if (with_h.source() == PotentialSource::ClosedForm && k.closed_form_U()) {
    ScalarField cf = *k.closed_form_U();
    double u0 = cf(Vector::Zero(r));
    out.U_ = [cf, u0](const Vector& x) { return cf(x) - u0; };
  } else if (with_h.source() == PotentialSource::PathIntegral) {
    // Swapping the order of the double integral int_0^1 h(t x).x dt leaves a
    // single quadrature with kernel (1 - s).
    out.U_ = [k](const Vector& x) {
      if (x.isZero(0.0)) return 0.0;
      return gauss_kronrod([&](double s) { return (1.0 - s) * x.dot(k(s * x) * x); }, 0.0, 1.0);
    };
  } else {
    out.U_ = [with_h](const Vector& x) {
      if (x.isZero(0.0)) return 0.0;
      return gauss_kronrod([&](double s) { return with_h.h(s * x).dot(x); }, 0.0, 1.0);
    };
  }
  return out;
}

DampingPotential construct_U(VectorField h, int r, const Box& working_box) {
  Vector h0 = h(Vector::Zero(r));
  VectorField shifted = [h, h0](const Vector& x) { return (h(x) - h0).eval(); };
  DampingField k(r, [shifted](const Vector& x) { return fd_jacobian(shifted, x, kJacobianStep); });
  k.with_description("jacobian of supplied h");
  return construct_U(DampingPotential(std::move(k), shifted, std::nullopt, PotentialSource::ClosedForm),
                     working_box);
}

DampingPotential construct_potential(const DampingField& damping, const Box& working_box, int grid) {
  ConditionReport rep = verify_damping_conditions(damping, working_box, grid);
  if (!rep.symmetry.pass)
    throw ValidationError("damping field is not symmetric, no U exists: " + rep.symmetry.detail);
  return construct_U(construct_h(damping, working_box, grid), working_box);
}

DampingPotential diagonal_h(std::vector<DampingField::AxisFunction> k_funcs) {
  DampingField damping = diagonal_damping(k_funcs);
  auto axis_h = [k_funcs](std::size_t a, double xa) {
    return gauss_kronrod([&](double s) { return k_funcs[a](s); }, 0.0, xa);
  };
  VectorField h = [axis_h](const Vector& x) {
    Vector out(x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a) out[a] = axis_h(static_cast<std::size_t>(a), x[a]);
    return out;
  };
  // int_0^x h_a = int_0^x (x - s) k_a(s) ds, one quadrature per axis.
  ScalarField U = [k_funcs](const Vector& x) {
    double sum = 0.0;
    for (Eigen::Index a = 0; a < x.size(); ++a) {
      const auto& ka = k_funcs[static_cast<std::size_t>(a)];
      const double xa = x[a];
      sum += gauss_kronrod([&](double s) { return (xa - s) * ka(s); }, 0.0, xa);
    }
    return sum;
  };
  DampingPotential out(damping, std::move(h), std::move(U), PotentialSource::AxisIntegral);
  out.report_ = check_h_jacobian(out, sample_points(Box::cube(damping.dim(), 1.0), 3));
  return out;
}

// -- equilibrium ------------------------------------------------------------

Equilibrium find_equilibrium(const DampingPotential& base, const Vector& mu, const Vector& x0) {
  constexpr int kMaxIterations = 200;
  constexpr int kMaxHalvings = 50;
  if (mu.size() != base.dim() || x0.size() != base.dim())
    throw ValidationError("equilibrium search: mu and x0 must have length r");

  Equilibrium eq;
  eq.point = x0;
  Vector residual = base.h(x0) - mu;
  double norm = residual.norm();
  eq.residual_trace.push_back(norm);
  if (norm <= kEquilibriumTolerance) return eq;

  if (base.damping()(x0).llt().info() != Eigen::Success)
    throw SolverError("equilibrium search: damping matrix is not positive definite at the "
                      "initial guess " + format_point(x0),
                      eq.residual_trace);

  for (int it = 1; it <= kMaxIterations; ++it) {
    Eigen::FullPivLU<Matrix> lu(base.damping()(eq.point));
    if (!lu.isInvertible())
      throw SolverError("equilibrium search: singular damping matrix at " + format_point(eq.point),
                        eq.residual_trace);
    Vector step = lu.solve(residual);

    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      Vector trial = eq.point - lambda * step;
      Vector trial_res = base.h(trial) - mu;
      double trial_norm = trial_res.norm();
      if (std::isfinite(trial_norm) && trial_norm < norm) {
        eq.point = trial;
        residual = trial_res;
        norm = trial_norm;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    eq.iterations = it;
    eq.residual_trace.push_back(norm);
    if (norm <= kEquilibriumTolerance) return eq;
    if (!improved)
      throw SolverError("equilibrium search stagnated at residual " + std::to_string(norm),
                        eq.residual_trace);
  }
  throw SolverError("equilibrium search did not converge within 200 iterations", eq.residual_trace);
}

ShiftedPotential::ShiftedPotential(DampingPotential base, Vector mu, Vector x_e)
    : base_(std::move(base)), mu_(std::move(mu)), x_e_(std::move(x_e)) {
  offset_ = base_.U(x_e_) - mu_.dot(x_e_);
}

double ShiftedPotential::operator()(const Vector& x) const {
  return base_.U(x) - mu_.dot(x) - offset_;
}

ShiftedPotential build_shifted_potential(const DampingPotential& base, const Vector& mu,
                                         const std::optional<Vector>& x0) {
  if (!base.has_U()) throw std::logic_error("build_shifted_potential needs a constructed U");
  Vector guess = x0.value_or(Vector::Zero(base.dim()));
  Equilibrium eq = find_equilibrium(base, mu, guess);
  return ShiftedPotential(base, mu, eq.point);
}

// -- critical point conditions ---------------------------------------------

ConditionReport check_critical_point(const ShiftedPotential& shifted, const Box& box, int grid) {
  box.validate();
  if (grid < 5) throw ValidationError("condition grid needs at least 5 points per axis");
  const Vector& xe = shifted.equilibrium();
  if (!box.contains(xe))
    throw ValidationError("critical-point check: box does not contain x_e = " + format_point(xe));

  ConditionReport rep;
  rep.domain = box;
  rep.grid = grid;
  rep.scope_note =
      "compact-domain surrogate on a " + std::to_string(grid) +
      "-point-per-axis lattice; this certifies the box only and is not a global proof";

  const double spacing = ((box.upper - box.lower) / static_cast<double>(grid - 1)).maxCoeff();
  const double ball = 2.5 * spacing;

  const double inf = std::numeric_limits<double>::infinity();
  double min_all = inf, min_out = inf, min_grad_out = inf;
  Vector argmin_all, argmin_out, argmin_grad;

  for_each_lattice_point(box, grid, [&](const Vector& x) {
    double u = shifted(x);
    if (u < min_all) {
      min_all = u;
      argmin_all = x;
    }
    if ((x - xe).norm() >= ball) {
      if (u < min_out) {
        min_out = u;
        argmin_out = x;
      }
      double g = shifted.gradient(x).norm();
      if (g < min_grad_out) {
        min_grad_out = g;
        argmin_grad = x;
      }
    }
  });

  const bool hessian_pd = shifted.base().damping()(xe).llt().info() == Eigen::Success;
  const double min_dist = (argmin_all - xe).norm();
  rep.unique_minimum.evaluated = true;
  rep.unique_minimum.pass = hessian_pd && min_dist <= ball;
  rep.unique_minimum.worst_residual = min_dist;
  rep.unique_minimum.witness = hessian_pd ? argmin_all : xe;
  rep.unique_minimum.detail =
      !hessian_pd ? "k(x_e) is not positive definite, x_e is not a minimum"
      : rep.unique_minimum.pass ? "lattice minimizer lies within " + std::to_string(ball) + " of x_e"
                                : "lattice minimizer " + format_point(argmin_all) + " is away from x_e";

  rep.level_separation.evaluated = true;
  rep.level_separation.worst_residual = min_out;
  rep.level_separation.witness = argmin_out;
  rep.level_separation.pass = argmin_out.size() > 0 ? min_out > 0.0 : true;
  rep.level_separation.detail = "min of U_mu - U_mu(x_e) outside the ball of radius " + std::to_string(ball) +
                  " is " + std::to_string(min_out);

  rep.gradient_separation.evaluated = true;
  rep.gradient_separation.worst_residual = min_grad_out;
  rep.gradient_separation.witness = argmin_grad;
  rep.gradient_separation.pass = argmin_grad.size() > 0 ? min_grad_out > 1e-9 : true;
  rep.gradient_separation.detail = "min |dU_mu| outside the ball is " + std::to_string(min_grad_out);
  return rep;
}

bool DiagonalConditionReport::recovery_conditions() const {
  for (const auto& a : axes)
    if (!(a.unique_root && a.positive_at_root && a.separated)) return false;
  return !axes.empty();
}

bool DiagonalConditionReport::boundedness_conditions() const {
  if (!recovery_conditions()) return false;
  for (const auto& a : axes)
    if (!a.divergent) return false;
  return true;
}

DiagonalConditionReport check_diagonal_conditions(const DampingPotential& diagonal,
                                                  const Vector& mu, const Box& box, int samples) {
  box.validate();
  const DampingField& k = diagonal.damping();
  if (!k.is_diagonal()) throw ValidationError("per-axis conditions need a diagonal damping field");
  if (box.dim() != k.dim() || mu.size() != k.dim())
    throw ValidationError("box and mu must have length r");
  if (samples < 11) throw ValidationError("per-axis scan needs at least 11 samples");

  DiagonalConditionReport rep;
  rep.domain = box;
  rep.scope_note = "per-axis scan of " + std::to_string(samples) +
                   " samples; conditions certified on the box only";

  for (int a = 0; a < k.dim(); ++a) {
    const double lo = box.lower[a], hi = box.upper[a];
    const double ds = (hi - lo) / (samples - 1);
    auto g = [&](double s) {
      Vector x = Vector::Zero(k.dim());
      x[a] = s;
      return diagonal.h(x)[a] - mu[a];
    };
    std::vector<double> s_vals(static_cast<std::size_t>(samples)), g_vals(s_vals.size());
    for (int i = 0; i < samples; ++i) {
      s_vals[static_cast<std::size_t>(i)] = lo + ds * i;
      g_vals[static_cast<std::size_t>(i)] = g(s_vals[static_cast<std::size_t>(i)]);
    }

    AxisConditions ax;
    int crossing = -1;
    for (int i = 0; i + 1 < samples; ++i) {
      const double g0 = g_vals[static_cast<std::size_t>(i)], g1 = g_vals[static_cast<std::size_t>(i + 1)];
      if (g0 == 0.0 || (g0 < 0.0) != (g1 < 0.0)) {
        if (g0 == 0.0 && i > 0 && g_vals[static_cast<std::size_t>(i - 1)] == 0.0) continue;
        ++ax.root_count;
        crossing = i;
      }
    }
    if (g_vals.back() == 0.0 && g_vals[g_vals.size() - 2] != 0.0) {
      ++ax.root_count;
      crossing = samples - 1;
    }
    ax.unique_root = ax.root_count == 1;
    if (ax.unique_root) {
      const double s0 = s_vals[static_cast<std::size_t>(crossing)];
      if (g(s0) == 0.0) {
        ax.root = s0;
      } else {
        boost::uintmax_t iters = 200;
        auto bracket = boost::math::tools::toms748_solve(
            g, s0, s0 + ds, boost::math::tools::eps_tolerance<double>(50), iters);
        ax.root = 0.5 * (bracket.first + bracket.second);
      }
      ax.positive_at_root = k.axis_functions()[static_cast<std::size_t>(a)](ax.root) > 0.0;

      const double half = 10.0 * ds;
      double sep = std::numeric_limits<double>::infinity();
      for (int i = 0; i < samples; ++i) {
        const double s = s_vals[static_cast<std::size_t>(i)];
        if (std::abs(s - ax.root) >= half) sep = std::min(sep, std::abs(g_vals[static_cast<std::size_t>(i)]));
      }
      ax.separation = sep;
      ax.separated = sep > 0.0;
    }

    const auto [mn, mx] = std::minmax_element(g_vals.begin(), g_vals.end());
    const int tail = std::max(2, samples / 10);
    bool rising = true;
    for (int i = 0; i < tail; ++i) {
      rising = rising && g_vals[static_cast<std::size_t>(i + 1)] > g_vals[static_cast<std::size_t>(i)];
      rising = rising && g_vals[static_cast<std::size_t>(samples - 1 - i)] >
                             g_vals[static_cast<std::size_t>(samples - 2 - i)];
    }
    ax.divergent = rising && mx == std::prev(g_vals.end()) && mn == g_vals.begin() &&
                   g_vals.front() < 0.0 && g_vals.back() > 0.0;
    rep.axes.push_back(ax);
  }
  return rep;
}

}  // namespace cyclic
