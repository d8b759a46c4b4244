#pragma once

// Univariate polynomials over Q and the characteristic polynomial of a
// rational matrix. Factorization is tuned for the small degrees that show
// up as commutant characteristic polynomials (<= ~30).

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "cellnet/linalg.hpp"

namespace cellnet {

class QPoly {
 public:
  QPoly() = default;
  /// coeffs[i] multiplies x^i; trailing zeros are trimmed.
  explicit QPoly(std::vector<Rational> coeffs);

  static QPoly constant(const Rational& c);
  static QPoly x();

  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  const std::vector<Rational>& coeffs() const noexcept { return c_; }
  Rational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
  Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }

  QPoly monic() const;
  QPoly derivative() const;
  std::complex<double> eval(std::complex<double> z) const;

  std::string to_string() const;

  friend QPoly operator+(const QPoly& a, const QPoly& b);
  friend QPoly operator-(const QPoly& a, const QPoly& b);
  friend QPoly operator*(const QPoly& a, const QPoly& b);
  friend bool operator==(const QPoly&, const QPoly&) = default;

 private:
  void trim();
  std::vector<Rational> c_;
};

/// Quotient and remainder; throws invalid-input for a zero divisor.
std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b);
/// Monic gcd (zero when both inputs are zero).
QPoly gcd(QPoly a, QPoly b);

/// Yun's algorithm: monic f = prod_i s_i^i with s_i squarefree and pairwise
/// coprime. Entry (s, i) for every nonconstant s_i.
std::vector<std::pair<QPoly, int>> squarefree_decomposition(const QPoly& f);

/// Monic irreducible factors over Q of a squarefree polynomial.
///
/// Candidate factors come from grouping numerically computed complex roots
/// into conjugation-closed subsets; a candidate is accepted only after its
/// coefficients round to the lattice forced by Gauss's lemma and it divides
/// exactly, so the result never depends on floating point being right.
std::vector<QPoly> factor_squarefree(const QPoly& f);

/// Full factorization of a nonzero polynomial into monic irreducibles with
/// multiplicities (leading coefficient dropped).
std::vector<std::pair<QPoly, int>> factor(const QPoly& f);

/// Numerical roots (companion matrix eigenvalues).
std::vector<std::complex<double>> roots(const QPoly& f);

/// Characteristic polynomial det(xI - A) via Hessenberg reduction, exact.
QPoly charpoly(const QMatrix& a);

/// p(A), exact.
QMatrix evaluate(const QPoly& p, const QMatrix& a);
DMatrix evaluate(const std::vector<double>& coeffs, const DMatrix& a);

}  // namespace cellnet
