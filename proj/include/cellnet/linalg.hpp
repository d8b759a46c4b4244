#pragma once

// Dense matrices over an exact field (GMP rationals) or doubles, with the
// small set of row-reduction routines the representation code needs.
// Algorithms are written once against FieldTraits<T>; the double
// instantiation swaps exact pivoting for tolerance-based decisions.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cellnet/error.hpp"

namespace cellnet {

using Rational = mpq_class;

std::string to_string(const Rational& q);  // "p/q", or "p" when q = 1
Rational parse_rational(const std::string& text);

template <class T>
struct FieldTraits;

template <>
struct FieldTraits<Rational> {
  static constexpr bool kExact = true;
  static bool is_zero(const Rational& x, double /*scale*/ = 1.0) { return sgn(x) == 0; }
  static double to_double(const Rational& x) { return x.get_d(); }
  static Rational from_int(long v) { return Rational(v); }
  static double magnitude(const Rational& x) { return std::abs(x.get_d()); }
};

template <>
struct FieldTraits<double> {
  static constexpr bool kExact = false;
  static constexpr double kRelTol = 1e-9;
  static bool is_zero(double x, double scale = 1.0) { return std::abs(x) <= kRelTol * scale; }
  static double to_double(double x) { return x; }
  static double from_int(long v) { return static_cast<double>(v); }
  static double magnitude(double x) { return std::abs(x); }
};

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<T>>& rows, std::size_t cols) {
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].size() == cols, "ragged matrix rows");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<T> row(std::size_t i) const {
    return std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  std::vector<T> col(std::size_t j) const {
    std::vector<T> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }
  void append_row(const std::vector<T>& r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    require(r.size() == cols_, "append_row: width mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }
  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool is_zero() const {
    const double s = scale();
    for (const auto& x : data_)
      if (!FieldTraits<T>::is_zero(x, s)) return false;
    return true;
  }

  /// Largest entry magnitude, at least 1; the reference scale for tolerances.
  double scale() const {
    double s = 1.0;
    for (const auto& x : data_) s = std::max(s, FieldTraits<T>::magnitude(x));
    return s;
  }

  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using QMatrix = Matrix<Rational>;
using DMatrix = Matrix<double>;

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.rows(), "matrix product: shape mismatch");
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (FieldTraits<T>::is_zero(a(i, k), 0.0)) continue;
      const T aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
Matrix<T> operator+(Matrix<T> a, const Matrix<T>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum: shape mismatch");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += b(i, j);
  return a;
}

template <class T>
Matrix<T> operator-(Matrix<T> a, const Matrix<T>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix difference: shape mismatch");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= b(i, j);
  return a;
}

template <class T>
Matrix<T> operator*(const T& s, Matrix<T> a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) *= s;
  return a;
}

template <class T>
std::vector<T> operator*(const Matrix<T>& a, const std::vector<T>& v) {
  require(a.cols() == v.size(), "matrix-vector product: shape mismatch");
  std::vector<T> out(a.rows(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

template <class T>
T trace(const Matrix<T>& a) {
  T t(0);
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

/// Trace of a*b without forming the product.
template <class T>
T trace_product(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.rows() && a.rows() == b.cols(), "trace_product: shape mismatch");
  T t(0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
  return t;
}

/// In-place reduced row-echelon form; returns pivot columns. Zero rows are
/// dropped. For doubles, partial pivoting with tolerance relative to the
/// input scale.
template <class T>
std::vector<std::size_t> rref(Matrix<T>& m) {
  using F = FieldTraits<T>;
  const double s = m.scale();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t best = m.rows();
    if constexpr (F::kExact) {
      for (std::size_t i = r; i < m.rows(); ++i)
        if (!F::is_zero(m(i, c))) {
          best = i;
          break;
        }
    } else {
      double best_mag = 0.0;
      for (std::size_t i = r; i < m.rows(); ++i) {
        const double mag = std::abs(m(i, c));
        if (mag > best_mag) {
          best_mag = mag;
          best = i;
        }
      }
      if (best != m.rows() && F::is_zero(best_mag, s)) best = m.rows();
    }
    if (best == m.rows()) {
      if constexpr (!F::kExact)
        for (std::size_t i = r; i < m.rows(); ++i) m(i, c) = 0.0;
      continue;
    }
    m.swap_rows(r, best);
    const T inv = T(1) / m(r, c);
    for (std::size_t j = c; j < m.cols(); ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || F::is_zero(m(i, c), 0.0)) continue;
      const T f = m(i, c);
      for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
      m(i, c) = T(0);
    }
    pivots.push_back(c);
    ++r;
  }
  Matrix<T> trimmed(r, m.cols());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) trimmed(i, j) = m(i, j);
  m = std::move(trimmed);
  return pivots;
}

template <class T>
std::size_t rank(Matrix<T> m) {
  return rref(m).size();
}

/// Basis (as rows) of {x : m x = 0}, itself in reduced row-echelon form.
template <class T>
Matrix<T> nullspace(const Matrix<T>& m) {
  Matrix<T> r = m;
  const auto pivots = rref(r);
  std::vector<char> is_pivot(m.cols(), 0);
  for (auto p : pivots) is_pivot[p] = 1;
  Matrix<T> basis(0, m.cols());
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<T> v(m.cols(), T(0));
    v[free] = T(1);
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -r(i, free);
    basis.append_row(v);
  }
  if (basis.rows() > 0) rref(basis);
  return basis;
}

/// Sparse exact rows: (column, value) pairs, columns ascending, no zeros.
using SparseRow = std::vector<std::pair<std::size_t, Rational>>;

/// Same result as nullspace() on the dense matrix, without ever storing it.
/// Worth it for intertwiner systems, whose rows have a handful of entries.
QMatrix sparse_nullspace(const std::vector<SparseRow>& rows, std::size_t cols);

/// Orthonormal-basis nullspace for doubles via SVD (more robust than rref).
DMatrix nullspace_svd(const DMatrix& m, double rel_tol = 1e-9);

template <>
inline DMatrix nullspace<double>(const DMatrix& m) {
  return nullspace_svd(m);
}

template <class T>
std::optional<Matrix<T>> inverse(const Matrix<T>& a) {
  require(a.rows() == a.cols(), "inverse: matrix not square");
  const std::size_t n = a.rows();
  Matrix<T> aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = T(1);
  }
  const auto pivots = rref(aug);
  if (pivots.size() < n || pivots[n - 1] != n - 1) return std::nullopt;
  Matrix<T> inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

template <class T>
T determinant(Matrix<T> a) {
  require(a.rows() == a.cols(), "determinant: matrix not square");
  using F = FieldTraits<T>;
  const std::size_t n = a.rows();
  T det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = n;
    double best = 0.0;
    for (std::size_t i = c; i < n; ++i) {
      if constexpr (F::kExact) {
        if (!F::is_zero(a(i, c))) {
          p = i;
          break;
        }
      } else if (std::abs(a(i, c)) > best) {
        best = std::abs(a(i, c));
        p = i;
      }
    }
    if (p == n || F::is_zero(a(p, c), 0.0)) return T(0);
    if (p != c) {
      a.swap_rows(p, c);
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (F::is_zero(a(i, c), 0.0)) continue;
      const T f = a(i, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
    }
  }
  return det;
}

/// Coefficients c with sum_i c_i basis[i] = target (all matrices flattened),
/// or nullopt when target is outside the span.
template <class T>
std::optional<std::vector<T>> express_in_span(const std::vector<Matrix<T>>& basis,
                                              const Matrix<T>& target) {
  const std::size_t len = target.rows() * target.cols();
  Matrix<T> sys(len, basis.size() + 1);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    require(basis[k].rows() * basis[k].cols() == len, "express_in_span: shape mismatch");
    for (std::size_t e = 0; e < len; ++e) sys(e, k) = basis[k].data()[e];
  }
  for (std::size_t e = 0; e < len; ++e) sys(e, basis.size()) = target.data()[e];
  Matrix<T> r = sys;
  const auto pivots = rref(r);
  if (!pivots.empty() && pivots.back() == basis.size()) return std::nullopt;
  std::vector<T> coeffs(basis.size(), T(0));
  for (std::size_t i = 0; i < pivots.size(); ++i) coeffs[pivots[i]] = r(i, basis.size());
  if constexpr (!FieldTraits<T>::kExact) {
    std::vector<T> recon(len, T(0));
    for (std::size_t k = 0; k < basis.size(); ++k)
      for (std::size_t e = 0; e < len; ++e) recon[e] += coeffs[k] * basis[k].data()[e];
    double err = 0.0;
    for (std::size_t e = 0; e < len; ++e)
      err = std::max(err, std::abs(recon[e] - target.data()[e]));
    if (err > 1e-7 * std::max(1.0, target.scale())) return std::nullopt;
  }
  return coeffs;
}

DMatrix to_double(const QMatrix& m);

}  // namespace cellnet
