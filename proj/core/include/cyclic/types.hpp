#pragma once

#include <Eigen/Dense>

#include <functional>

namespace cyclic {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;
using MatrixField = std::function<Matrix(const Vector&)>;

/// Split of the configuration q = (x, y) into r cyclic and n - r shape coordinates.
struct DimensionSplit {
  int n = 0;
  int r = 0;

  /// Throws ValidationError unless 1 <= r < n.
  static DimensionSplit make(int n, int r);

  int shape() const noexcept { return n - r; }
  bool operator==(const DimensionSplit&) const = default;
};

/// Positions and velocities of a mechanical system at time t.
/// x: cyclic coordinates, y: shape (actuated) coordinates.
struct GeneralizedState {
  Vector x;
  Vector y;
  Vector xdot;
  Vector ydot;
  double t = 0.0;

  static GeneralizedState at_rest(const DimensionSplit& dims, double t = 0.0);
  static GeneralizedState from_q(const DimensionSplit& dims, const Vector& q,
                                 const Vector& qdot, double t);

  Vector q() const;
  Vector qdot() const;
  bool finite() const;

  /// Throws ValidationError if vector sizes disagree with dims.
  void check_dims(const DimensionSplit& dims) const;
};

/// Axis-aligned compact box used for sampled condition checks.
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(int dim, double half_width);

  int dim() const noexcept { return static_cast<int>(lower.size()); }
  bool contains(const Vector& p) const;
  /// Throws ValidationError if empty or mis-sized.
  void validate() const;
};

}  // namespace cyclic
