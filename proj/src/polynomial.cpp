#include "cellnet/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>

namespace cellnet {

QPoly::QPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

void QPoly::trim() {
  while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
}

QPoly QPoly::constant(const Rational& c) { return QPoly({c}); }
QPoly QPoly::x() { return QPoly({Rational(0), Rational(1)}); }

QPoly QPoly::monic() const {
  if (c_.empty()) return *this;
  const Rational lc = c_.back();
  std::vector<Rational> out(c_);
  for (auto& v : out) v /= lc;
  return QPoly(std::move(out));
}

QPoly QPoly::derivative() const {
  if (c_.size() <= 1) return QPoly();
  std::vector<Rational> out(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) out[i - 1] = c_[i] * static_cast<long>(i);
  return QPoly(std::move(out));
}

std::complex<double> QPoly::eval(std::complex<double> z) const {
  std::complex<double> acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + it->get_d();
  return acc;
}

std::string QPoly::to_string() const {
  if (c_.empty()) return "0";
  std::string out;
  for (int i = degree(); i >= 0; --i) {
    const Rational& c = c_[static_cast<std::size_t>(i)];
    if (sgn(c) == 0) continue;
    Rational mag = abs(c);
    if (out.empty()) {
      if (sgn(c) < 0) out += "-";
    } else {
      out += sgn(c) < 0 ? " - " : " + ";
    }
    const bool unit = mag == 1;
    if (!unit || i == 0) out += cellnet::to_string(mag);
    if (i > 0) {
      if (!unit) out += "*";
      out += "x";
      if (i > 1) out += "^" + std::to_string(i);
    }
  }
  return out;
}

QPoly operator+(const QPoly& a, const QPoly& b) {
  std::vector<Rational> out(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.coeff(i) + b.coeff(i);
  return QPoly(std::move(out));
}

QPoly operator-(const QPoly& a, const QPoly& b) {
  std::vector<Rational> out(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.coeff(i) - b.coeff(i);
  return QPoly(std::move(out));
}

QPoly operator*(const QPoly& a, const QPoly& b) {
  if (a.is_zero() || b.is_zero()) return QPoly();
  std::vector<Rational> out(a.c_.size() + b.c_.size() - 1);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
  return QPoly(std::move(out));
}

std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b) {
  require(!b.is_zero(), "polynomial division by zero");
  std::vector<Rational> rem = a.coeffs();
  const int db = b.degree();
  if (a.degree() < db) return {QPoly(), a};
  std::vector<Rational> quo(static_cast<std::size_t>(a.degree() - db + 1));
  const Rational lb = b.leading();
  for (int i = a.degree(); i >= db; --i) {
    const Rational q = rem[static_cast<std::size_t>(i)] / lb;
    quo[static_cast<std::size_t>(i - db)] = q;
    if (sgn(q) == 0) continue;
    for (int j = 0; j <= db; ++j)
      rem[static_cast<std::size_t>(i - db + j)] -= q * b.coeffs()[static_cast<std::size_t>(j)];
  }
  return {QPoly(std::move(quo)), QPoly(std::move(rem))};
}

QPoly gcd(QPoly a, QPoly b) {
  while (!b.is_zero()) {
    QPoly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

std::vector<std::pair<QPoly, int>> squarefree_decomposition(const QPoly& f) {
  require(!f.is_zero(), "squarefree decomposition of the zero polynomial");
  std::vector<std::pair<QPoly, int>> out;
  const QPoly g = f.monic();
  if (g.degree() == 0) return out;
  QPoly a = gcd(g, g.derivative());
  QPoly b = divmod(g, a).first;
  QPoly c = divmod(g.derivative(), a).first;
  QPoly d = c - b.derivative();
  for (int i = 1; b.degree() > 0; ++i) {
    QPoly s = gcd(b, d);
    b = divmod(b, s).first;
    c = divmod(d, s).first;
    d = c - b.derivative();
    if (s.degree() > 0) out.emplace_back(s.monic(), i);
  }
  return out;
}

std::vector<std::complex<double>> roots(const QPoly& f) {
  const int n = f.degree();
  if (n <= 0) return {};
  const QPoly m = f.monic();
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -m.coeff(static_cast<std::size_t>(i)).get_d();
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
  // One Newton polish per root against the exact coefficients.
  const QPoly dm = m.derivative();
  for (auto& z : out) {
    for (int it = 0; it < 3; ++it) {
      const auto d = dm.eval(z);
      if (std::abs(d) < 1e-300) break;
      z -= m.eval(z) / d;
    }
  }
  return out;
}

namespace {

/// Common denominator of the coefficients times the leading coefficient of
/// the primitive integer form: a monic rational factor of f has coefficients
/// in (1/L)Z for this L.
mpz_class lattice_denominator(const QPoly& f) {
  mpz_class den = 1;
  for (const auto& c : f.coeffs()) den = lcm(den, mpz_class(c.get_den()));
  mpz_class content = 0;
  for (const auto& c : f.coeffs()) content = gcd(content, mpz_class(c.get_num() * (den / c.get_den())));
  const Rational lead = f.leading() * Rational(den) / Rational(content);
  return abs(lead.get_num());
}

std::optional<QPoly> candidate_from_roots(const std::vector<std::complex<double>>& rs,
                                          const mpz_class& lattice) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : rs) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= c[i] * r;
    }
    c = std::move(next);
  }
  const double l = lattice.get_d();
  std::vector<Rational> coeffs;
  for (const auto& v : c) {
    const double scaled = v.real() * l;
    if (std::abs(scaled) > 1e15) return std::nullopt;
    const double rounded = std::nearbyint(scaled);
    if (std::abs(scaled - rounded) > 1e-4 * std::max(1.0, std::abs(scaled))) return std::nullopt;
    coeffs.emplace_back(mpz_class(static_cast<long>(rounded)), lattice);
    coeffs.back().canonicalize();
  }
  return QPoly(std::move(coeffs));
}

}  // namespace

std::vector<QPoly> factor_squarefree(const QPoly& f_in) {
  QPoly f = f_in.monic();
  std::vector<QPoly> out;
  if (f.degree() <= 0) return out;
  while (f.degree() > 1) {
    // Group roots: real roots alone, complex roots with their conjugate.
    const auto rs = roots(f);
    std::vector<std::vector<std::complex<double>>> groups;
    std::vector<char> used(rs.size(), 0);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (used[i]) continue;
      used[i] = 1;
      if (std::abs(rs[i].imag()) <= 1e-9 * std::max(1.0, std::abs(rs[i]))) {
        groups.push_back({std::complex<double>(rs[i].real(), 0.0)});
        continue;
      }
      std::size_t best = rs.size();
      double best_d = 1e300;
      for (std::size_t j = 0; j < rs.size(); ++j) {
        if (used[j]) continue;
        const double d = std::abs(rs[j] - std::conj(rs[i]));
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (best == rs.size()) fail(ErrorKind::kNumericFailure, "unpaired complex root in factorization");
      used[best] = 1;
      groups.push_back({rs[i], std::conj(rs[i])});
    }
    const mpz_class lattice = lattice_denominator(f);
    const std::size_t ng = groups.size();
    std::optional<QPoly> found;
    // Smallest subsets first so accepted factors are irreducible.
    for (std::size_t size = 1; size < ng && !found; ++size) {
      std::vector<std::size_t> pick(size);
      std::iota(pick.begin(), pick.end(), 0);
      while (true) {
        std::vector<std::complex<double>> sel;
        for (auto g : pick) sel.insert(sel.end(), groups[g].begin(), groups[g].end());
        if (2 * static_cast<int>(sel.size()) <= f.degree() || size == 1) {
          if (auto cand = candidate_from_roots(sel, lattice)) {
            if (cand->degree() > 0 && cand->degree() < f.degree()) {
              auto [q, r] = divmod(f, *cand);
              if (r.is_zero()) {
                found = cand;
                break;
              }
            }
          }
        }
        // next combination
        std::size_t i = size;
        while (i > 0 && pick[i - 1] == ng - size + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
    if (!found) break;
    out.push_back(found->monic());
    f = divmod(f, *found).first.monic();
  }
  if (f.degree() > 0) out.push_back(f);
  // Complementary factors of a half-degree split may still be reducible only
  // if a smaller subset had divided; the smallest-first search rules that out.
  std::sort(out.begin(), out.end(), [](const QPoly& a, const QPoly& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.to_string() < b.to_string();
  });
  return out;
}

std::vector<std::pair<QPoly, int>> factor(const QPoly& f) {
  std::vector<std::pair<QPoly, int>> out;
  for (const auto& [s, mult] : squarefree_decomposition(f))
    for (auto& p : factor_squarefree(s)) out.emplace_back(std::move(p), mult);
  return out;
}

QPoly charpoly(const QMatrix& a_in) {
  require(a_in.rows() == a_in.cols(), "charpoly: matrix not square");
  const std::size_t n = a_in.rows();
  QMatrix h = a_in;
  // Similarity reduction to upper Hessenberg form by Gaussian elimination.
  for (std::size_t m = 1; m + 1 < n; ++m) {
    std::size_t piv = n;
    for (std::size_t i = m; i < n; ++i)
      if (sgn(h(i, m - 1)) != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    if (piv != m) {
      h.swap_rows(piv, m);
      for (std::size_t i = 0; i < n; ++i) std::swap(h(i, piv), h(i, m));
    }
    for (std::size_t i = m + 1; i < n; ++i) {
      if (sgn(h(i, m - 1)) == 0) continue;
      const Rational f = h(i, m - 1) / h(m, m - 1);
      for (std::size_t j = 0; j < n; ++j) h(i, j) -= f * h(m, j);
      for (std::size_t j = 0; j < n; ++j) h(j, m) += f * h(j, i);
    }
  }
  // p_0 = 1; p_m = (x - h_mm) p_{m-1} - sum_{i<m} h_im prod_{j=i+1}^{m} h_{j,j-1} p_{i-1}
  std::vector<QPoly> p(n + 1);
  p[0] = QPoly::constant(1);
  for (std::size_t m = 1; m <= n; ++m) {
    p[m] = (QPoly::x() - QPoly::constant(h(m - 1, m - 1))) * p[m - 1];
    Rational t = 1;
    for (std::size_t i = m - 1; i >= 1; --i) {
      t *= h(i, i - 1);
      if (sgn(t) == 0) break;
      p[m] = p[m] - QPoly::constant(t * h(i - 1, m - 1)) * p[i - 1];
    }
  }
  return p[n];
}

QMatrix evaluate(const QPoly& p, const QMatrix& a) {
  const std::size_t n = a.rows();
  QMatrix acc(n, n);
  for (int i = p.degree(); i >= 0; --i) {
    acc = acc * a;
    const Rational& c = p.coeffs()[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < n; ++j) acc(j, j) += c;
  }
  return acc;
}

DMatrix evaluate(const std::vector<double>& coeffs, const DMatrix& a) {
  const std::size_t n = a.rows();
  DMatrix acc(n, n);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = acc * a;
    for (std::size_t j = 0; j < n; ++j) acc(j, j) += *it;
  }
  return acc;
}

}  // namespace cellnet
