#include "cyclic/mechanical_system.hpp"

#include "cyclic/errors.hpp"
#include "cyclic/expression.hpp"

#include <cmath>
#include <random>

namespace cyclic {

DimensionSplit DimensionSplit::make(int n, int r) {
  if (r < 1 || r >= n)
    throw ValidationError("dimension split requires 1 <= r < n (got n=" + std::to_string(n) +
                          ", r=" + std::to_string(r) + ")");
  return DimensionSplit{n, r};
}

GeneralizedState GeneralizedState::at_rest(const DimensionSplit& dims, double t) {
  return GeneralizedState{Vector::Zero(dims.r), Vector::Zero(dims.shape()), Vector::Zero(dims.r),
                          Vector::Zero(dims.shape()), t};
}

GeneralizedState GeneralizedState::from_q(const DimensionSplit& dims, const Vector& q,
                                          const Vector& qdot, double t) {
  return GeneralizedState{q.head(dims.r), q.tail(dims.shape()), qdot.head(dims.r),
                          qdot.tail(dims.shape()), t};
}

Vector GeneralizedState::q() const {
  Vector out(x.size() + y.size());
  out << x, y;
  return out;
}

Vector GeneralizedState::qdot() const {
  Vector out(xdot.size() + ydot.size());
  out << xdot, ydot;
  return out;
}

bool GeneralizedState::finite() const {
  return x.allFinite() && y.allFinite() && xdot.allFinite() && ydot.allFinite() &&
         std::isfinite(t);
}

void GeneralizedState::check_dims(const DimensionSplit& dims) const {
  if (x.size() != dims.r || xdot.size() != dims.r || y.size() != dims.shape() ||
      ydot.size() != dims.shape())
    throw ValidationError("state dimensions do not match the system (r=" + std::to_string(dims.r) +
                          ", n-r=" + std::to_string(dims.shape()) + ")");
}

Box Box::cube(int dim, double half_width) {
  return Box{Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width)};
}

bool Box::contains(const Vector& p) const {
  return p.size() == lower.size() && (p.array() >= lower.array()).all() &&
         (p.array() <= upper.array()).all();
}

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw ValidationError("box bounds must be non-empty and of equal length");
  if (!(lower.array() < upper.array()).all())
    throw ValidationError("box must satisfy lower < upper on every axis");
}

// -- fields -----------------------------------------------------------------

MassMatrixField::MassMatrixField(DimensionSplit dims, MatrixField eval, Partials partials)
    : dims_(dims), eval_(std::move(eval)), partials_(std::move(partials)) {}

MassMatrixField::MassMatrixField(DimensionSplit dims, MatrixField eval)
    : dims_(dims), eval_(std::move(eval)) {}

std::vector<Matrix> MassMatrixField::partials(const Vector& y) const {
  if (partials_) return partials_(y);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(y.size()));
  Vector probe = y;
  for (Eigen::Index a = 0; a < y.size(); ++a) {
    probe[a] = y[a] + kFiniteDifferenceStep;
    Matrix plus = eval_(probe);
    probe[a] = y[a] - kFiniteDifferenceStep;
    Matrix minus = eval_(probe);
    probe[a] = y[a];
    out.push_back((plus - minus) / (2.0 * kFiniteDifferenceStep));
  }
  return out;
}

PotentialField::PotentialField(ScalarField eval, VectorField gradient)
    : eval_(std::move(eval)), gradient_(std::move(gradient)) {}

PotentialField::PotentialField(ScalarField eval) : eval_(std::move(eval)) {}

PotentialField PotentialField::zero(int shape_dim) {
  return PotentialField([](const Vector&) { return 0.0; },
                        [shape_dim](const Vector&) { return Vector::Zero(shape_dim).eval(); });
}

Vector PotentialField::gradient(const Vector& y) const {
  if (gradient_) return gradient_(y);
  Vector g(y.size());
  Vector probe = y;
  for (Eigen::Index a = 0; a < y.size(); ++a) {
    probe[a] = y[a] + kFiniteDifferenceStep;
    double plus = eval_(probe);
    probe[a] = y[a] - kFiniteDifferenceStep;
    double minus = eval_(probe);
    probe[a] = y[a];
    g[a] = (plus - minus) / (2.0 * kFiniteDifferenceStep);
  }
  return g;
}

DampingField::DampingField(int r, MatrixField eval) : r_(r), eval_(std::move(eval)) {}

DampingField& DampingField::with_closed_form(VectorField h, ScalarField U) {
  h_ = std::move(h);
  U_ = std::move(U);
  return *this;
}

DampingField& DampingField::with_description(std::string text) {
  description_ = std::move(text);
  return *this;
}

DampingField zero_damping(int r) {
  DampingField k(r, [r](const Vector&) { return Matrix::Zero(r, r).eval(); });
  k.with_closed_form([r](const Vector&) { return Vector::Zero(r).eval(); },
                     [](const Vector&) { return 0.0; });
  k.with_description("zero");
  return k;
}

DampingField constant_damping(const Matrix& km) {
  if (km.rows() != km.cols() || km.rows() == 0)
    throw ValidationError("constant damping matrix must be square and non-empty");
  const int r = static_cast<int>(km.rows());
  DampingField k(r, [km](const Vector&) { return km; });
  if ((km - km.transpose()).cwiseAbs().maxCoeff() <= 1e-12) {
    k.with_closed_form([km](const Vector& x) { return (km * x).eval(); },
                       [km](const Vector& x) { return 0.5 * x.dot(km * x); });
  }
  k.with_description("constant");
  return k;
}

DampingField diagonal_damping(std::vector<DampingField::AxisFunction> fns) {
  if (fns.empty()) throw ValidationError("diagonal damping needs at least one axis function");
  const int r = static_cast<int>(fns.size());
  DampingField k(r, [fns](const Vector& x) {
    Matrix m = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a) m(a, a) = fns[static_cast<std::size_t>(a)](x[a]);
    return m;
  });
  k.axis_ = std::move(fns);
  k.with_description("diagonal");
  return k;
}

DampingField cosine_coupled_damping() {
  DampingField k(2, [](const Vector& x) {
    Matrix m(2, 2);
    m << 5.0 + 2.0 * std::cos(x[0]), 4.0, 4.0, 4.0 + 2.0 * std::cos(x[1]);
    return m;
  });
  k.with_closed_form(
      [](const Vector& x) {
        Vector h(2);
        h << 5.0 * x[0] + 4.0 * x[1] + 2.0 * std::sin(x[0]),
            4.0 * x[0] + 4.0 * x[1] + 2.0 * std::sin(x[1]);
        return h;
      },
      [](const Vector& x) {
        const double s = x[0] + x[1];
        return 0.5 * x[0] * x[0] + 2.0 * s * s - 2.0 * std::cos(x[0]) - 2.0 * std::cos(x[1]) + 4.0;
      });
  k.with_description("cosine-coupled");
  return k;
}

DampingField expression_damping(const std::vector<std::vector<std::string>>& entries,
                                const std::vector<std::string>& cyclic_names) {
  const std::size_t r = cyclic_names.size();
  if (entries.size() != r)
    throw ValidationError("damping matrix must have " + std::to_string(r) + " rows");
  std::vector<Expression> exprs;
  exprs.reserve(r * r);
  for (const auto& row : entries) {
    if (row.size() != r)
      throw ValidationError("damping matrix must have " + std::to_string(r) + " columns");
    for (const auto& text : row) exprs.push_back(Expression::parse(text, cyclic_names));
  }
  DampingField k(static_cast<int>(r), [exprs, r](const Vector& x) {
    Matrix m(r, r);
    std::span<const double> vals(x.data(), static_cast<std::size_t>(x.size()));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            exprs[i * r + j].evaluate(vals);
    return m;
  });
  k.with_description("expression");
  return k;
}

MechanicalSystem MechanicalSystem::with_damping(DampingField k) const {
  if (k.dim() != dims.r)
    throw ValidationError("damping dimension " + std::to_string(k.dim()) +
                          " does not match r=" + std::to_string(dims.r));
  MechanicalSystem out = *this;
  out.damping = std::move(k);
  return out;
}

void MechanicalSystem::check_consistency(const Vector& y) const {
  if (y.size() != dims.shape()) throw ValidationError("shape vector has wrong length");
  Matrix m = mass(y);
  if (m.rows() != dims.n || m.cols() != dims.n)
    throw ValidationError(name + ": mass matrix is not n x n");
  if (static_cast<int>(mass.partials(y).size()) != dims.shape())
    throw ValidationError(name + ": mass partial count differs from n - r");
  if (potential.gradient(y).size() != dims.shape())
    throw ValidationError(name + ": potential gradient has wrong length");
  if (damping.dim() != dims.r) throw ValidationError(name + ": damping dimension differs from r");
  if (static_cast<int>(cyclic_names.size()) != dims.r ||
      static_cast<int>(shape_names.size()) != dims.shape())
    throw ValidationError(name + ": coordinate names do not match dims");
}

// -- generic models ---------------------------------------------------------

MechanicalSystem generic_system(const GenericModelSpec& spec) {
  const int r = static_cast<int>(spec.cyclic_names.size());
  const int shape = static_cast<int>(spec.shape_names.size());
  const DimensionSplit dims = DimensionSplit::make(r + shape, r);
  const auto n = static_cast<std::size_t>(dims.n);

  std::vector<std::string> all = spec.cyclic_names;
  all.insert(all.end(), spec.shape_names.begin(), spec.shape_names.end());
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (all[i] == all[j]) throw ValidationError("duplicate coordinate name '" + all[i] + "'");

  if (spec.mass.size() != n) throw ValidationError("mass matrix must have n rows");
  std::vector<Expression> mass;
  mass.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.mass[i].size() != n) throw ValidationError("mass matrix must have n columns");
    for (std::size_t j = 0; j < n; ++j) {
      Expression e = Expression::parse(spec.mass[i][j], all);
      for (std::size_t a = 0; a < static_cast<std::size_t>(r); ++a)
        if (e.depends_on(a))
          throw ValidationError("mass entry (" + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + ") depends on cyclic variable '" + all[a] +
                                "'; mass must be a function of shape variables only");
      mass.push_back(std::move(e));
    }
  }

  auto eval_mass = [mass, n, r](const Vector& y) {
    std::vector<double> buf(n, 0.0);
    for (Eigen::Index a = 0; a < y.size(); ++a) buf[static_cast<std::size_t>(r + a)] = y[a];
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            mass[i * n + j].evaluate(buf);
    return m;
  };

  // Symmetry is checked on a deterministic sample of shape points.
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int sample = 0; sample < 16; ++sample) {
    Vector y = Vector::Zero(shape);
    if (sample > 0)
      for (Eigen::Index a = 0; a < y.size(); ++a) y[a] = dist(rng);
    Matrix m = eval_mass(y);
    Eigen::Index i = 0, j = 0;
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff(&i, &j);
    if (asym > 1e-12)
      throw ValidationError("declared mass matrix is not symmetric: entry (" +
                            std::to_string(i + 1) + "," + std::to_string(j + 1) + ") differs by " +
                            std::to_string(asym));
  }

  std::optional<Expression> potential;
  if (!spec.potential.empty()) {
    Expression e = Expression::parse(spec.potential, all);
    for (std::size_t a = 0; a < static_cast<std::size_t>(r); ++a)
      if (e.depends_on(a))
        throw ValidationError("potential depends on cyclic variable '" + all[a] + "'");
    potential = std::move(e);
  }

  DampingField damping = spec.damping.empty() ? zero_damping(r)
                                              : expression_damping(spec.damping, spec.cyclic_names);

  PotentialField pot = PotentialField::zero(shape);
  if (potential) {
    pot = PotentialField([expr = *potential, n, r](const Vector& y) {
      std::vector<double> buf(n, 0.0);
      for (Eigen::Index a = 0; a < y.size(); ++a) buf[static_cast<std::size_t>(r + a)] = y[a];
      return expr.evaluate(buf);
    });
  }

  MechanicalSystem sys{
      .name = spec.name,
      .dims = dims,
      .mass = MassMatrixField(dims, eval_mass),
      .potential = std::move(pot),
      .damping = std::move(damping),
      .cyclic_names = spec.cyclic_names,
      .shape_names = spec.shape_names,
  };
  sys.domain_description = "wherever the declared mass matrix is positive definite";
  return sys;
}

}  // namespace cyclic
