#pragma once

#include <cstddef>
#include <vector>

#include "cellnet/linalg.hpp"

namespace cellnet {

/// A linear subspace of Q^n (exact mode) or R^n (float mode).
///
/// Exact mode keeps the basis in reduced row-echelon form, so two exact
/// subspaces are equal iff their basis matrices are equal. Float mode keeps
/// an orthonormal basis plus a bound on its invariance defect; float
/// subspaces compare by largest principal angle (<= kAngleTol).
class Subspace {
 public:
  static constexpr double kAngleTol = 1e-8;

  Subspace() = default;

  static Subspace zero(std::size_t n);
  static Subspace full(std::size_t n);
  /// Row span of `rows` (any rank).
  static Subspace span(std::size_t n, QMatrix rows);
  /// {x : equations * x = 0}.
  static Subspace solutions(std::size_t n, const QMatrix& equations);
  /// Orthonormalizes `rows` (dropping numerically dependent ones).
  static Subspace from_float(std::size_t n, const DMatrix& rows, double defect);

  std::size_t ambient_dim() const noexcept { return ambient_; }
  std::size_t dim() const noexcept;
  bool is_exact() const noexcept { return exact_; }
  double defect() const noexcept { return defect_; }
  void set_defect(double d) { defect_ = d; }

  /// Exact RREF basis; throws invalid-input in float mode.
  const QMatrix& basis() const;
  const std::vector<std::size_t>& pivots() const;
  /// Orthonormal rows; computed from the exact basis in exact mode.
  DMatrix float_basis() const;

  bool contains(const std::vector<Rational>& v) const;
  bool contains(const Subspace& other) const;
  /// Coordinates of v (assumed to lie in the space) in the RREF basis: the
  /// entries of v at the pivot columns.
  std::vector<Rational> coordinates(const std::vector<Rational>& v) const;
  /// Rows spanning the annihilator: equations cutting out this space.
  QMatrix equations() const;

  friend bool operator==(const Subspace& a, const Subspace& b);

 private:
  std::size_t ambient_ = 0;
  bool exact_ = true;
  QMatrix basis_;
  std::vector<std::size_t> pivots_;
  DMatrix float_basis_;
  double defect_ = 0.0;
};

Subspace intersect(const Subspace& a, const Subspace& b);
Subspace sum(const Subspace& a, const Subspace& b);
Subspace sum(const std::vector<Subspace>& parts, std::size_t ambient);

/// Sine of the largest principal angle between equal-dimensional subspaces;
/// 1 when dimensions differ.
double max_principal_sine(const Subspace& a, const Subspace& b);

/// Sum of dimensions equals the dimension of the sum.
bool independent(const std::vector<Subspace>& parts, std::size_t ambient);

}  // namespace cellnet
