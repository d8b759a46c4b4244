#include "cellnet/subspace.hpp"

#include <Eigen/Dense>

namespace cellnet {

namespace {

Eigen::MatrixXd to_eigen(const DMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return e;
}

DMatrix from_eigen(const Eigen::MatrixXd& e) {
  DMatrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
  return m;
}

/// Orthonormal rows spanning the row space of `rows`.
DMatrix orthonormal_rows(const DMatrix& rows, std::size_t n) {
  if (rows.rows() == 0) return DMatrix(0, n);
  Eigen::MatrixXd cols = to_eigen(rows).transpose();  // n x r
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-9 * std::max(top, 1e-300)) ++r;
  return from_eigen(svd.matrixU().leftCols(r).transpose());
}

QMatrix stack(const QMatrix& a, const QMatrix& b, std::size_t n) {
  QMatrix out(0, n);
  for (std::size_t i = 0; i < a.rows(); ++i) out.append_row(a.row(i));
  for (std::size_t i = 0; i < b.rows(); ++i) out.append_row(b.row(i));
  return out;
}

}  // namespace

Subspace Subspace::zero(std::size_t n) {
  Subspace s;
  s.ambient_ = n;
  s.basis_ = QMatrix(0, n);
  return s;
}

Subspace Subspace::full(std::size_t n) { return span(n, QMatrix::identity(n)); }

Subspace Subspace::span(std::size_t n, QMatrix rows) {
  require(rows.rows() == 0 || rows.cols() == n, "Subspace::span: width mismatch");
  if (rows.rows() == 0) return zero(n);
  Subspace s;
  s.ambient_ = n;
  s.pivots_ = rref(rows);
  s.basis_ = std::move(rows);
  return s;
}

Subspace Subspace::solutions(std::size_t n, const QMatrix& equations) {
  if (equations.rows() == 0) return full(n);
  require(equations.cols() == n, "Subspace::solutions: width mismatch");
  return span(n, nullspace(equations));
}

Subspace Subspace::from_float(std::size_t n, const DMatrix& rows, double defect) {
  Subspace s;
  s.ambient_ = n;
  s.exact_ = false;
  s.float_basis_ = orthonormal_rows(rows, n);
  s.defect_ = defect;
  return s;
}

std::size_t Subspace::dim() const noexcept {
  return exact_ ? basis_.rows() : float_basis_.rows();
}

const QMatrix& Subspace::basis() const {
  require(exact_, "exact basis requested from a float-mode subspace");
  return basis_;
}

const std::vector<std::size_t>& Subspace::pivots() const {
  require(exact_, "pivots requested from a float-mode subspace");
  return pivots_;
}

DMatrix Subspace::float_basis() const {
  if (!exact_) return float_basis_;
  return orthonormal_rows(to_double(basis_), ambient_);
}

bool Subspace::contains(const std::vector<Rational>& v) const {
  require(exact_, "exact membership test on a float-mode subspace");
  require(v.size() == ambient_, "vector/subspace dimension mismatch");
  std::vector<Rational> r = v;
  for (std::size_t i = 0; i < pivots_.size(); ++i) {
    const Rational c = v[pivots_[i]];
    if (sgn(c) == 0) continue;
    for (std::size_t j = 0; j < ambient_; ++j) r[j] -= c * basis_(i, j);
  }
  for (const auto& x : r)
    if (sgn(x) != 0) return false;
  return true;
}

bool Subspace::contains(const Subspace& other) const {
  require(other.ambient_ == ambient_, "subspaces in different ambient spaces");
  if (exact_ && other.exact_) {
    for (std::size_t i = 0; i < other.basis_.rows(); ++i)
      if (!contains(other.basis_.row(i))) return false;
    return true;
  }
  const Eigen::MatrixXd u = to_eigen(float_basis());
  const Eigen::MatrixXd w = to_eigen(other.float_basis());
  if (w.rows() == 0) return true;
  const Eigen::MatrixXd residual = w - (w * u.transpose()) * u;
  return residual.norm() <= kAngleTol * std::sqrt(static_cast<double>(w.rows())) +
                                other.defect_ + defect_;
}

std::vector<Rational> Subspace::coordinates(const std::vector<Rational>& v) const {
  require(exact_, "exact coordinates requested from a float-mode subspace");
  std::vector<Rational> c(pivots_.size());
  for (std::size_t i = 0; i < pivots_.size(); ++i) c[i] = v[pivots_[i]];
  return c;
}

QMatrix Subspace::equations() const {
  require(exact_, "equations requested from a float-mode subspace");
  if (basis_.rows() == 0) return QMatrix::identity(ambient_);
  return nullspace(basis_);
}

bool operator==(const Subspace& a, const Subspace& b) {
  if (a.ambient_ != b.ambient_ || a.dim() != b.dim()) return false;
  if (a.exact_ && b.exact_) return a.basis_ == b.basis_;
  return max_principal_sine(a, b) <= Subspace::kAngleTol + a.defect_ + b.defect_;
}

Subspace intersect(const Subspace& a, const Subspace& b) {
  require(a.ambient_dim() == b.ambient_dim(), "intersect: ambient mismatch");
  const std::size_t n = a.ambient_dim();
  if (a.is_exact() && b.is_exact()) {
    if (a.dim() == n) return b;
    if (b.dim() == n) return a;
    return Subspace::solutions(n, stack(a.equations(), b.equations(), n));
  }
  const DMatrix ua = a.float_basis();
  const DMatrix ub = b.float_basis();
  if (ua.rows() == 0 || ub.rows() == 0) return Subspace::from_float(n, DMatrix(0, n), 0.0);
  // x = ua^T alpha = ub^T beta  <=>  [ua^T, -ub^T] (alpha; beta) = 0.
  DMatrix sys(n, ua.rows() + ub.rows());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < ua.rows(); ++i) sys(j, i) = ua(i, j);
    for (std::size_t i = 0; i < ub.rows(); ++i) sys(j, ua.rows() + i) = -ub(i, j);
  }
  const DMatrix null = nullspace_svd(sys, 1e-8);
  DMatrix vecs(null.rows(), n);
  for (std::size_t r = 0; r < null.rows(); ++r)
    for (std::size_t i = 0; i < ua.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) vecs(r, j) += null(r, i) * ua(i, j);
  return Subspace::from_float(n, vecs, std::max(a.defect(), b.defect()));
}

Subspace sum(const Subspace& a, const Subspace& b) {
  require(a.ambient_dim() == b.ambient_dim(), "sum: ambient mismatch");
  const std::size_t n = a.ambient_dim();
  if (a.is_exact() && b.is_exact()) return Subspace::span(n, stack(a.basis(), b.basis(), n));
  const DMatrix ua = a.float_basis();
  const DMatrix ub = b.float_basis();
  DMatrix rows(ua.rows() + ub.rows(), n);
  for (std::size_t i = 0; i < ua.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) rows(i, j) = ua(i, j);
  for (std::size_t i = 0; i < ub.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) rows(ua.rows() + i, j) = ub(i, j);
  return Subspace::from_float(n, rows, std::max(a.defect(), b.defect()));
}

Subspace sum(const std::vector<Subspace>& parts, std::size_t ambient) {
  Subspace total = Subspace::zero(ambient);
  for (const auto& p : parts) total = sum(total, p);
  return total;
}

double max_principal_sine(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) return 1.0;
  if (a.dim() == 0) return 0.0;
  const Eigen::MatrixXd u = to_eigen(a.float_basis());
  const Eigen::MatrixXd v = to_eigen(b.float_basis());
  const Eigen::MatrixXd residual = u - (u * v.transpose()) * v;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

bool independent(const std::vector<Subspace>& parts, std::size_t ambient) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.dim();
  return sum(parts, ambient).dim() == total;
}

}  // namespace cellnet
