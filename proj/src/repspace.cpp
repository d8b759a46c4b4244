#include "cellnet/repspace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <random>
#include <sstream>

namespace cellnet {

// ---------------------------------------------------------------------------
// RegularRep

RegularRep::RegularRep(const Monoid& m, std::size_t cell_dim) : monoid_(&m), d_(cell_dim) {
  require(cell_dim >= 1, "cell dimension must be positive");
}

QMatrix RegularRep::action_matrix(ElementIndex sigma) const {
  const std::size_t n = monoid_->size();
  QMatrix a(dim(), dim());
  for (std::size_t tau = 0; tau < n; ++tau) {
    const std::size_t src = monoid_->product(static_cast<ElementIndex>(tau), sigma);
    for (std::size_t c = 0; c < d_; ++c) a(tau * d_ + c, src * d_ + c) = 1;
  }
  return a;
}

std::vector<ElementIndex> RegularRep::generator_elements() const {
  std::vector<ElementIndex> out;
  for (std::size_t g = 0; g < monoid_->generator_count(); ++g)
    out.push_back(monoid_->generator_element(g));
  return out;
}

bool RegularRep::is_invariant(const Subspace& w) const {
  require(w.ambient_dim() == dim(), "subspace does not live in this representation");
  if (!w.is_exact()) return invariance_defect(w) <= 1e-8;
  const auto& basis = w.basis();
  for (auto g : generator_elements())
    for (std::size_t i = 0; i < basis.rows(); ++i)
      if (!w.contains(apply(g, basis.row(i)))) return false;
  return true;
}

double RegularRep::invariance_defect(const Subspace& w) const {
  const DMatrix u = w.float_basis();
  double worst = 0.0;
  for (auto g : generator_elements()) {
    for (std::size_t i = 0; i < u.rows(); ++i) {
      std::vector<double> v = apply(g, u.row(i));
      std::vector<double> r = v;
      for (std::size_t j = 0; j < u.rows(); ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) dot += u(j, k) * v[k];
        for (std::size_t k = 0; k < v.size(); ++k) r[k] -= dot * u(j, k);
      }
      double norm = 0.0;
      for (double x : r) norm += x * x;
      worst = std::max(worst, std::sqrt(norm));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Synchrony subspaces

Subspace synchrony_subspace(std::size_t d, const Partition& p) {
  const std::size_t n = p.size() * d;
  QMatrix rows(0, n);
  for (const auto& cls : p.classes())
    for (std::size_t c = 0; c < d; ++c) {
      std::vector<Rational> v(n);
      for (auto q : cls) v[q * d + c] = 1;
      rows.append_row(v);
    }
  return Subspace::span(n, std::move(rows));
}

Subspace synchrony_subspace(const RegularRep& rep, const Partition& p) {
  require(p.size() == rep.monoid().size(), "partition does not cover the monoid elements");
  return synchrony_subspace(rep.cell_dim(), p);
}

Partition element_partition_at_cell(const Monoid& m, CellIndex p_cell) {
  require(p_cell < m.degree(), "cell index out of range");
  std::vector<std::uint32_t> labels(m.size());
  for (std::size_t s = 0; s < m.size(); ++s) labels[s] = m.element(static_cast<ElementIndex>(s))[p_cell];
  return Partition(std::move(labels));
}

Subspace syn_Np(const RegularRep& rep, CellIndex p_cell) {
  return synchrony_subspace(rep, element_partition_at_cell(rep.monoid(), p_cell));
}

// ---------------------------------------------------------------------------
// Restricted actions and intertwiners

std::vector<QMatrix> restricted_action(const RegularRep& rep, const Subspace& w) {
  require(w.is_exact(), "exact restricted action needs an exact subspace");
  require(rep.is_invariant(w), "subspace is not invariant under the action");
  const auto& basis = w.basis();
  const std::size_t m = basis.rows();
  std::vector<QMatrix> out;
  for (auto g : rep.generator_elements()) {
    QMatrix a(m, m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto coords = w.coordinates(rep.apply(g, basis.row(j)));
      for (std::size_t i = 0; i < m; ++i) a(i, j) = coords[i];
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<DMatrix> restricted_action_float(const RegularRep& rep, const Subspace& w) {
  const DMatrix u = w.float_basis();
  const std::size_t m = u.rows();
  std::vector<DMatrix> out;
  for (auto g : rep.generator_elements()) {
    DMatrix a(m, m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto v = rep.apply(g, u.row(j));
      for (std::size_t i = 0; i < m; ++i) {
        double dot = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) dot += u(i, k) * v[k];
        a(i, j) = dot;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

template <class T>
std::vector<Matrix<T>> intertwiners(const std::vector<Matrix<T>>& a1,
                                    const std::vector<Matrix<T>>& a2) {
  require(a1.size() == a2.size() && !a1.empty(), "intertwiners: generator count mismatch");
  const std::size_t m1 = a1[0].rows();
  const std::size_t m2 = a2[0].rows();
  if (m1 == 0 || m2 == 0) return {};
  // Unknown X_{pq} at index p*m1 + q. Row (i, j): (X a1 - a2 X)_{ij} = 0.
  if constexpr (FieldTraits<T>::kExact) {
    std::vector<SparseRow> sys;
    std::map<std::size_t, Rational> acc;
    for (std::size_t g = 0; g < a1.size(); ++g)
      for (std::size_t i = 0; i < m2; ++i)
        for (std::size_t j = 0; j < m1; ++j) {
          acc.clear();
          for (std::size_t k = 0; k < m1; ++k)
            if (sgn(a1[g](k, j)) != 0) acc[i * m1 + k] += a1[g](k, j);
          for (std::size_t k = 0; k < m2; ++k)
            if (sgn(a2[g](i, k)) != 0) acc[k * m1 + j] -= a2[g](i, k);
          SparseRow row;
          for (auto& [c, v] : acc)
            if (sgn(v) != 0) row.emplace_back(c, v);
          if (!row.empty()) sys.push_back(std::move(row));
        }
    const QMatrix null = sparse_nullspace(sys, m1 * m2);
    std::vector<Matrix<T>> out;
    for (std::size_t r = 0; r < null.rows(); ++r) {
      Matrix<T> x(m2, m1);
      for (std::size_t p = 0; p < m2; ++p)
        for (std::size_t q = 0; q < m1; ++q) x(p, q) = null(r, p * m1 + q);
      out.push_back(std::move(x));
    }
    return out;
  }
  Matrix<T> sys(0, m1 * m2);
  for (std::size_t g = 0; g < a1.size(); ++g) {
    for (std::size_t i = 0; i < m2; ++i)
      for (std::size_t j = 0; j < m1; ++j) {
        std::vector<T> row(m1 * m2, T(0));
        for (std::size_t k = 0; k < m1; ++k) row[i * m1 + k] += a1[g](k, j);
        for (std::size_t k = 0; k < m2; ++k) row[k * m1 + j] -= a2[g](i, k);
        sys.append_row(row);
      }
  }
  const Matrix<T> null = nullspace(sys);
  std::vector<Matrix<T>> out;
  for (std::size_t r = 0; r < null.rows(); ++r) {
    Matrix<T> x(m2, m1);
    for (std::size_t p = 0; p < m2; ++p)
      for (std::size_t q = 0; q < m1; ++q) x(p, q) = null(r, p * m1 + q);
    out.push_back(std::move(x));
  }
  return out;
}

template std::vector<QMatrix> intertwiners(const std::vector<QMatrix>&, const std::vector<QMatrix>&);
template std::vector<DMatrix> intertwiners(const std::vector<DMatrix>&, const std::vector<DMatrix>&);

std::vector<QMatrix> commutant_basis(const RegularRep& rep, const Subspace& w) {
  if (w.dim() == 0) return {};
  const auto a = restricted_action(rep, w);
  return intertwiners(a, a);
}

std::vector<QMatrix> hom_basis(const RegularRep& rep, const Subspace& w1, const Subspace& w2) {
  if (w1.dim() == 0 || w2.dim() == 0) return {};
  return intertwiners(restricted_action(rep, w1), restricted_action(rep, w2));
}

// ---------------------------------------------------------------------------
// Idempotent projections

IdempotentProjection projection_from_idempotent(const RegularRep& rep, ElementIndex iota) {
  const Monoid& m = rep.monoid();
  require(iota < m.size(), "idempotent index out of range");
  require(m.product(iota, iota) == iota, "element " + m.word_string(iota) + " is not idempotent");
  const std::size_t d = rep.cell_dim();
  const std::size_t n = rep.dim();
  QMatrix b(n, n);
  for (std::size_t s = 0; s < m.size(); ++s) {
    const std::size_t src = m.product(iota, static_cast<ElementIndex>(s));
    for (std::size_t c = 0; c < d; ++c) b(s * d + c, src * d + c) = 1;
  }
  IdempotentProjection out;
  out.image = Subspace::span(n, b.transpose());
  out.kernel = Subspace::solutions(n, b);
  out.matrix = std::move(b);
  return out;
}

const char* to_string(FieldType t) {
  switch (t) {
    case FieldType::kReal: return "real";
    case FieldType::kComplex: return "complex";
    case FieldType::kQuaternionic: return "quaternionic";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Certification

namespace {

template <class T>
std::vector<T> flatten(const Matrix<T>& m) {
  return m.data();
}

template <class T>
Matrix<T> combine(const std::vector<Matrix<T>>& basis, const std::vector<T>& coeffs) {
  Matrix<T> out(basis[0].rows(), basis[0].cols());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (FieldTraits<T>::is_zero(coeffs[i], 0.0)) continue;
    out = out + coeffs[i] * basis[i];
  }
  return out;
}

template <class T>
bool positive(const T& x, double scale) {
  if constexpr (FieldTraits<T>::kExact) {
    (void)scale;
    return sgn(x) > 0;
  } else {
    return x > 1e-9 * scale;
  }
}

template <class T>
bool negative(const T& x, double scale) {
  if constexpr (FieldTraits<T>::kExact) {
    (void)scale;
    return sgn(x) < 0;
  } else {
    return x < -1e-9 * scale;
  }
}

bool is_rational_square(const Rational& q) {
  if (sgn(q) < 0) return false;
  return mpz_perfect_square_p(q.get_num().get_mpz_t()) != 0 &&
         mpz_perfect_square_p(q.get_den().get_mpz_t()) != 0;
}

// End/rad is a field when one element's charpoly is a power of a single
// irreducible of degree q = dim End/rad: then Q[x] fills the quotient.
bool endomorphisms_form_field(const std::vector<QMatrix>& e, std::size_t q) {
  std::vector<QMatrix> trials = e;
  for (int k = 1; k <= 4; ++k) {
    std::vector<Rational> c(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) c[i] = Rational(static_cast<long>((i * 7 + k * 3) % 11) - 5);
    trials.push_back(combine(e, c));
  }
  for (const auto& x : trials) {
    const auto f = factor(charpoly(x));
    if (f.size() == 1 && static_cast<std::size_t>(f[0].first.degree()) == q) return true;
  }
  return false;
}

template <class T>
Certificate certify_action(const std::vector<Matrix<T>>& a) {
  Certificate cert;
  cert.exact = FieldTraits<T>::kExact;
  const std::size_t m = a.empty() ? 0 : a[0].rows();
  require(m > 0, "cannot certify the zero subspace");
  const auto e = intertwiners(a, a);
  const std::size_t r = e.size();
  cert.end_dim = r;
  Matrix<T> gram(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i; j < r; ++j) gram(i, j) = gram(j, i) = trace_product(e[i], e[j]);
  const Matrix<T> rad = nullspace(gram);
  cert.radical_dim = rad.rows();
  const std::size_t q = r - rad.rows();
  std::vector<Matrix<T>> rad_mats;
  for (std::size_t i = 0; i < rad.rows(); ++i) rad_mats.push_back(combine(e, rad.row(i)));

  auto rank_of = [&](const std::vector<Matrix<T>>& mats) {
    Matrix<T> s(0, m * m);
    for (const auto& x : mats) s.append_row(flatten(x));
    return rank(s);
  };

  if (q == 1) {
    cert.type = FieldType::kReal;
    return cert;
  }
  if (q == 2) {
    std::vector<Matrix<T>> span = rad_mats;
    span.push_back(Matrix<T>::identity(m));
    const std::size_t base = rank_of(span);
    std::optional<Matrix<T>> u;
    for (const auto& x : e) {
      auto trial = span;
      trial.push_back(x);
      if (rank_of(trial) == base + 1) {
        u = x;
        break;
      }
    }
    if (!u) fail(ErrorKind::kInternalError, "endomorphism algebra: no element outside span(1, rad)");
    std::vector<Matrix<T>> basis{*u, Matrix<T>::identity(m)};
    for (const auto& x : rad_mats) basis.push_back(x);
    const auto coeffs = express_in_span(basis, Matrix<T>(*u * *u));
    if (!coeffs) fail(ErrorKind::kInternalError, "endomorphism algebra not closed modulo radical");
    const T alpha = (*coeffs)[0];
    const T beta = (*coeffs)[1];
    // (u - α/2)^2 = s modulo the radical.
    const T s = alpha * alpha / T(4) + beta;
    const double scale = std::max(1.0, std::abs(FieldTraits<T>::to_double(alpha * alpha)) +
                                           std::abs(FieldTraits<T>::to_double(beta)));
    if (negative(s, scale)) {
      cert.type = FieldType::kComplex;
      return cert;
    }
    if (positive(s, scale)) {
      cert.indecomposable = false;
      if constexpr (FieldTraits<T>::kExact) cert.rational_irreducible = !is_rational_square(s);
      return cert;
    }
    fail(ErrorKind::kInternalError, "nilpotent element outside the trace-form radical");
  }
  if (q == 4) {
    // Center modulo the radical: c with [Σ c_i E_i, E_j] ∈ rad for all j.
    const std::size_t nr = rad_mats.size();
    const std::size_t unknowns = r + r * nr;
    Matrix<T> sys(0, unknowns);
    for (std::size_t j = 0; j < r; ++j) {
      std::vector<Matrix<T>> comm;
      for (std::size_t i = 0; i < r; ++i) comm.push_back(e[i] * e[j] - e[j] * e[i]);
      for (std::size_t entry = 0; entry < m * m; ++entry) {
        std::vector<T> row(unknowns, T(0));
        for (std::size_t i = 0; i < r; ++i) row[i] = comm[i].data()[entry];
        for (std::size_t k = 0; k < nr; ++k) row[r + j * nr + k] = -rad_mats[k].data()[entry];
        sys.append_row(row);
      }
    }
    const Matrix<T> null = nullspace(sys);
    Matrix<T> cpart(0, r);
    for (std::size_t i = 0; i < null.rows(); ++i) {
      auto row = null.row(i);
      row.resize(r);
      cpart.append_row(row);
    }
    const std::size_t center_dim = rank(cpart) - nr;
    if (center_dim >= 2) {
      cert.indecomposable = false;
      if constexpr (FieldTraits<T>::kExact) cert.rational_irreducible = endomorphisms_form_field(e, q);
      return cert;
    }
    // Reduced trace-zero part, 3-dimensional modulo the radical.
    Matrix<T> traces(1, r);
    for (std::size_t i = 0; i < r; ++i) traces(0, i) = trace(e[i]);
    const Matrix<T> tz = nullspace(traces);
    std::vector<Matrix<T>> picked;
    std::vector<Matrix<T>> span = rad_mats;
    std::size_t current = rank_of(span);
    for (std::size_t i = 0; i < tz.rows() && picked.size() < 3; ++i) {
      auto x = combine(e, tz.row(i));
      auto trial = span;
      trial.push_back(x);
      const std::size_t rk = rank_of(trial);
      if (rk > current) {
        current = rk;
        span = std::move(trial);
        picked.push_back(std::move(x));
      }
    }
    if (picked.size() != 3) fail(ErrorKind::kInternalError, "trace-zero part has wrong dimension");
    Matrix<T> h(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) h(i, j) = -trace_product(picked[i], picked[j]);
    const double scale = h.scale();
    bool definite = true;
    for (std::size_t k = 1; k <= 3; ++k) {
      Matrix<T> minor(k, k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) minor(i, j) = h(i, j);
      double s = 1.0;
      for (std::size_t i = 0; i < k; ++i) s *= scale;
      if (!positive(determinant(minor), s)) definite = false;
    }
    if (definite) {
      cert.type = FieldType::kQuaternionic;
      return cert;
    }
    cert.indecomposable = false;
    return cert;
  }
  cert.indecomposable = false;
  if constexpr (FieldTraits<T>::kExact) cert.rational_irreducible = endomorphisms_form_field(e, q);
  return cert;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Decomposer {
 public:
  Decomposer(const RegularRep& rep, DecomposeMode mode) : rep_(rep), mode_(mode) {}

  void run(const Subspace& w, std::uint64_t seed, std::vector<Summand>& out) {
    if (w.dim() == 0) return;
    const auto action = restricted_action(rep_, w);
    const auto e = intertwiners(action, action);
    if (e.size() == 1) {
      out.push_back({w, certify_action(action)});
      return;
    }
    std::mt19937_64 rng(splitmix(seed));
    std::uniform_int_distribution<int> coeff(-9, 9);
    // Best non-splitting candidate for float refinement: an irreducible
    // charpoly factor with as many real roots as possible.
    QMatrix best;
    QPoly best_p;
    int best_real = -1;
    auto try_split = [&](QMatrix b) {
      auto factors = factor(charpoly(b));
      if (factors.size() >= 2) {
        std::uint64_t child = 0;
        for (const auto& [p, mult] : factors) {
          QMatrix k = evaluate(p, b);
          QMatrix kp = k;
          for (int i = 1; i < mult; ++i) kp = kp * k;
          const Subspace piece = lift_coordinates(w, nullspace(kp));
          run(piece, splitmix(seed ^ (++child * 0x632be59bd9b4e019ULL)), out);
        }
        return true;
      }
      const QPoly& p = factors.at(0).first;
      if (p.degree() >= 2) {
        int real = 0;
        for (const auto& r : roots(p))
          if (std::abs(r.imag()) <= 1e-9 * std::max(1.0, std::abs(r))) ++real;
        if (real > best_real) {
          best_real = real;
          best = std::move(b);
          best_p = p;
        }
      }
      return false;
    };
    auto random_draw = [&]() {
      std::vector<Rational> c(e.size());
      for (auto& x : c) x = coeff(rng);
      return combine(e, c);
    };
    // Basis elements first: for repeated summands (cell_dim > 1) they are
    // often rank deficient and split over Q where random draws do not.
    for (const auto& basis_element : e)
      if (try_split(basis_element)) return;
    for (int attempt = 0; attempt < 8; ++attempt)
      if (try_split(random_draw())) return;
    Certificate cert = certify_action(action);
    if (!cert.indecomposable && !cert.rational_irreducible) {
      // Splits over Q (e.g. a matrix-algebra quotient); keep looking.
      for (int attempt = 0; attempt < 64; ++attempt)
        if (try_split(random_draw())) return;
    }
    if (cert.indecomposable || mode_ == DecomposeMode::kExact || best_real < 0) {
      out.push_back({w, cert});
      return;
    }
    refine_float(w, best, best_p, out);
  }

 private:
  Subspace lift_coordinates(const Subspace& w, const QMatrix& coords) const {
    return Subspace::span(w.ambient_dim(), coords * w.basis());
  }

  // Splits w by the real irreducible factors of p over the generalized
  // eigenspaces of b; p is irreducible over Q and charpoly(b) = p^E.
  void refine_float(const Subspace& w, const QMatrix& b, const QPoly& p,
                    std::vector<Summand>& out) const {
    const std::size_t m = w.dim();
    const std::size_t mult = m / static_cast<std::size_t>(p.degree());
    const DMatrix bd = to_double(b);
    const DMatrix ud = to_double(w.basis());
    const auto rs = roots(p);
    std::vector<char> used(rs.size(), 0);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (used[i]) continue;
      used[i] = 1;
      std::vector<double> q;
      if (std::abs(rs[i].imag()) <= 1e-9 * std::max(1.0, std::abs(rs[i]))) {
        q = {-rs[i].real(), 1.0};
      } else {
        std::size_t best = i;
        double best_d = 1e300;
        for (std::size_t j = 0; j < rs.size(); ++j)
          if (!used[j] && std::abs(rs[j] - std::conj(rs[i])) < best_d) {
            best_d = std::abs(rs[j] - std::conj(rs[i]));
            best = j;
          }
        used[best] = 1;
        q = {std::norm(rs[i]), -2.0 * rs[i].real(), 1.0};
      }
      const std::size_t piece_dim = (q.size() - 1) * mult;
      DMatrix k = evaluate(q, bd);
      DMatrix kp = k;
      for (std::size_t t = 1; t < mult; ++t) kp = kp * k;
      Eigen::MatrixXd ek(m, m);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) ek(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = kp(r, c);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(ek, Eigen::ComputeFullV);
      DMatrix coords(piece_dim, m);
      for (std::size_t r = 0; r < piece_dim; ++r)
        for (std::size_t c = 0; c < m; ++c)
          coords(r, c) = svd.matrixV()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(m - piece_dim + r));
      Subspace piece = Subspace::from_float(w.ambient_dim(), coords * ud, 0.0);
      const double defect = rep_.invariance_defect(piece);
      piece.set_defect(defect);
      if (defect > 1e-8 || piece.dim() != piece_dim) {
        std::ostringstream msg;
        msg << "float refinement failed: piece of expected dimension " << piece_dim
            << " has dimension " << piece.dim() << " and invariance defect " << defect;
        fail(ErrorKind::kNumericFailure, msg.str());
      }
      Certificate cert = certify_action(restricted_action_float(rep_, piece));
      if (!cert.indecomposable)
        fail(ErrorKind::kNumericFailure, "float-refined summand is still decomposable");
      out.push_back({std::move(piece), cert});
    }
  }

  const RegularRep& rep_;
  DecomposeMode mode_;
};

}  // namespace

Certificate certify_indecomposable(const RegularRep& rep, const Subspace& w) {
  if (w.is_exact()) return certify_action(restricted_action(rep, w));
  return certify_action(restricted_action_float(rep, w));
}

Decomposition decompose(const RegularRep& rep, const Subspace& w, std::uint64_t seed,
                        DecomposeMode mode) {
  require(w.is_exact(), "decompose expects an exact subspace");
  require(rep.is_invariant(w), "subspace is not invariant under the action");
  Decomposition dec;
  dec.ambient_dim = w.ambient_dim();
  Decomposer(rep, mode).run(w, seed, dec.summands);
  return dec;
}

bool iso_test(const RegularRep& rep, const Subspace& w1, const Subspace& w2, std::uint64_t seed) {
  if (w1.dim() != w2.dim()) return false;
  if (w1.dim() == 0) return true;
  std::mt19937_64 rng(splitmix(seed ^ 0x5bd1e995ULL));
  std::uniform_int_distribution<int> coeff(-9, 9);
  const std::size_t m = w1.dim();
  if (w1.is_exact() && w2.is_exact()) {
    const auto h = hom_basis(rep, w1, w2);
    const auto k = hom_basis(rep, w2, w1);
    if (h.empty() || k.empty()) return false;
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<Rational> ch(h.size()), ck(k.size());
      for (auto& x : ch) x = coeff(rng);
      for (auto& x : ck) x = coeff(rng);
      if (rank(combine(k, ck) * combine(h, ch)) == m) return true;
    }
    // End(w1) is local when w1 is indecomposable: an iso exists iff some
    // K_j H_i lies outside the radical, i.e. is not nilpotent.
    for (const auto& hi : h)
      for (const auto& kj : k) {
        QMatrix p = kj * hi;
        QMatrix pw = p;
        for (std::size_t t = 1; t < m; ++t) pw = pw * p;
        if (!pw.is_zero()) return true;
      }
    return false;
  }
  const auto a1 = restricted_action_float(rep, w1);
  const auto a2 = restricted_action_float(rep, w2);
  const auto h = intertwiners(a1, a2);
  const auto k = intertwiners(a2, a1);
  if (h.empty() || k.empty()) return false;
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  auto invertible = [&](const DMatrix& p) {
    Eigen::MatrixXd e(m, m);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p(r, c);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    const auto& sv = svd.singularValues();
    return sv(0) > 0 && sv(sv.size() - 1) > 1e-7 * sv(0);
  };
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> ch(h.size()), ck(k.size());
    for (auto& x : ch) x = real(rng);
    for (auto& x : ck) x = real(rng);
    if (invertible(combine(k, ck) * combine(h, ch))) return true;
  }
  return false;
}

Decomposition intersect_with_synchrony(const RegularRep& rep, const Decomposition& dec,
                                       const Subspace& syn) {
  Decomposition out;
  out.ambient_dim = dec.ambient_dim;
  std::vector<Subspace> parts;
  for (const auto& s : dec.summands) {
    Subspace inter = intersect(s.space, syn);
    if (inter.dim() == 0) continue;
    if (!inter.is_exact()) inter.set_defect(rep.invariance_defect(inter));
    if (!rep.is_invariant(inter))
      fail(ErrorKind::kInternalError, "summand intersection is not invariant");
    parts.push_back(inter);
    out.summands.push_back({std::move(inter), s.certificate});
  }
  std::size_t total = 0;
  for (const auto& p : parts) total += p.dim();
  if (total != syn.dim() || !independent(parts, syn.ambient_dim()))
    fail(ErrorKind::kInternalError, "summand intersections do not decompose the synchrony space");
  return out;
}

// ---------------------------------------------------------------------------
// Projection-block identities

bool ProjectionBlockReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.holds; });
}

QMatrix embed_quotient_rows(const std::vector<ElementIndex>& projection, std::size_t d,
                            const QMatrix& small) {
  const std::size_t n = projection.size() * d;
  QMatrix out(small.rows(), n);
  for (std::size_t r = 0; r < small.rows(); ++r)
    for (std::size_t s = 0; s < projection.size(); ++s)
      for (std::size_t c = 0; c < d; ++c) out(r, s * d + c) = small(r, projection[s] * d + c);
  return out;
}

ProjectionBlockReport verify_projection_block_theorem(const NetworkSpec& net, const Monoid& m,
                                                      const Block& b, CellIndex p_cell,
                                                      std::size_t d) {
  const auto pb = is_projection_block(net, m, b);
  require(pb.has_value(), "the given block is not a projection block");
  require(p_cell < net.cell_count(), "cell index out of range");
  ProjectionBlockReport report;
  report.block = b.members;
  report.cell = p_cell;
  report.cell_dim = d;
  report.idempotent = *pb->idempotent;

  const RegularRep rep(m, d);
  const std::size_t n = rep.dim();
  const auto proj = projection_from_idempotent(rep, *pb->idempotent);
  const Subspace& w = proj.kernel;
  const Subspace& wp = proj.image;
  report.kernel_dim = w.dim();
  report.image_dim = wp.dim();

  const Partition cells_p = block_partition(net, b);
  const QuotientResult qr = quotient_network(net, m, cells_p);
  const Monoid& qm = qr.quotient_monoid;
  const CellIndex p_class = cells_p.class_of(p_cell);

  const Subspace syn_np = syn_Np(rep, p_cell);

  std::vector<std::uint32_t> small_labels(qm.size());
  for (std::size_t t = 0; t < qm.size(); ++t) small_labels[t] = qm.element(static_cast<ElementIndex>(t))[p_class];
  const Subspace small_syn = synchrony_subspace(d, Partition(small_labels));
  const Subspace syn_npp = Subspace::span(n, embed_quotient_rows(qr.projection, d, small_syn.basis()));

  const Subspace syn_pi = synchrony_subspace(d, Partition(std::vector<std::uint32_t>(
                                                    qr.projection.begin(), qr.projection.end())));
  const Subspace syn_0 = synchrony_subspace(d, Partition::synchronous(m.size()));

  // Cell-space Syn_P carried into V^{|Σ|} by x ↦ (x_{σ(p)})_σ.
  const Subspace cell_syn = synchrony_subspace(d, cells_p);
  QMatrix embedded(cell_syn.dim(), n);
  for (std::size_t r = 0; r < cell_syn.dim(); ++r)
    for (std::size_t s = 0; s < m.size(); ++s) {
      const CellIndex q = m.element(static_cast<ElementIndex>(s))[p_cell];
      for (std::size_t c = 0; c < d; ++c) embedded(r, s * d + c) = cell_syn.basis()(r, q * d + c);
    }
  const Subspace syn_p_np = Subspace::span(n, std::move(embedded));

  auto check = [&](std::string name, const Subspace& lhs, const Subspace& rhs) {
    report.checks.push_back({std::move(name), lhs == rhs, lhs.dim(), rhs.dim()});
  };
  check("kernel_network_synchrony", intersect(w, syn_np), intersect(w, syn_npp));
  check("image_quotient_synchrony", intersect(wp, syn_pi), syn_0);
  check("two_identifications", intersect(syn_npp, syn_pi), syn_p_np);
  return report;
}

// ---------------------------------------------------------------------------
// Lifting equivariant maps

QMatrix lift_linear_equivariant(const RegularRep& big, const RegularRep& small,
                                const std::vector<ElementIndex>& projection,
                                const QMatrix& map_small) {
  const std::size_t d = big.cell_dim();
  require(small.cell_dim() == d, "cell dimensions differ");
  require(projection.size() == big.monoid().size(), "projection does not cover the monoid");
  require(map_small.rows() == small.dim() && map_small.cols() == small.dim(),
          "map has the wrong shape");
  for (auto g : small.generator_elements()) {
    const QMatrix a = small.action_matrix(g);
    require(map_small * a == a * map_small, "map is not equivariant");
  }
  const std::size_t ns = small.monoid().size();
  std::vector<std::optional<ElementIndex>> rep_of(ns);
  for (std::size_t s = 0; s < projection.size(); ++s)
    if (!rep_of[projection[s]]) rep_of[projection[s]] = static_cast<ElementIndex>(s);
  for (std::size_t r = 0; r < ns; ++r) require(rep_of[r].has_value(), "projection is not surjective");

  const Monoid& bm = big.monoid();
  QMatrix out(big.dim(), big.dim());
  for (std::size_t tau = 0; tau < bm.size(); ++tau)
    for (std::size_t rho = 0; rho < ns; ++rho) {
      const std::size_t col = bm.product(*rep_of[rho], static_cast<ElementIndex>(tau));
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c) out(tau * d + a, col * d + c) += map_small(a, rho * d + c);
    }
  return out;
}

}  // namespace cellnet
