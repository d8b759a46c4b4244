#include "cellnet/linalg.hpp"

#include <Eigen/Dense>

#include <map>

namespace cellnet {

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(const std::string& text) {
  Rational q;
  if (q.set_str(text, 10) != 0) fail(ErrorKind::kInvalidInput, "not a rational: '" + text + "'");
  require(q.get_den() != 0, "rational with zero denominator: '" + text + "'");
  q.canonicalize();
  return q;
}

DMatrix to_double(const QMatrix& m) {
  DMatrix d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = m(i, j).get_d();
  return d;
}

DMatrix nullspace_svd(const DMatrix& m, double rel_tol) {
  if (m.cols() == 0) return DMatrix(0, 0);
  if (m.rows() == 0) return DMatrix::identity(m.cols());
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? std::max(sv(0), 1e-300) : 1.0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * std::max(top, 1.0)) ++rank;
  const auto& v = svd.matrixV();
  DMatrix out(m.cols() - rank, m.cols());
  for (std::size_t r = rank; r < m.cols(); ++r)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(r - rank, j) = v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(r));
  return out;
}

namespace {

// a - f*b
SparseRow sub_scaled(const SparseRow& a, const Rational& f, const SparseRow& b) {
  SparseRow out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, -f * b[j].second);
      ++j;
    } else {
      Rational v = a[i].second - f * b[j].second;
      if (sgn(v) != 0) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

QMatrix sparse_nullspace(const std::vector<SparseRow>& rows, std::size_t cols) {
  // echelon rows keyed by leading column, leading entry 1
  std::vector<SparseRow> piv(cols);
  std::vector<char> has(cols, 0);
  for (SparseRow r : rows) {
    while (!r.empty()) {
      const std::size_t c = r.front().first;
      require(c < cols, "sparse_nullspace: column out of range");
      if (!has[c]) {
        const Rational inv = 1 / r.front().second;
        for (auto& e : r) e.second *= inv;
        piv[c] = std::move(r);
        has[c] = 1;
        break;
      }
      const Rational f = r.front().second;
      r = sub_scaled(r, f, piv[c]);
    }
  }
  // back substitution, right to left; afterwards piv[c] holds c plus free columns only
  for (std::size_t c = cols; c-- > 0;) {
    if (!has[c]) continue;
    std::map<std::size_t, Rational> acc;
    for (std::size_t k = 1; k < piv[c].size(); ++k) {
      const auto& [j, v] = piv[c][k];
      if (!has[j]) {
        acc[j] += v;
        continue;
      }
      for (std::size_t t = 1; t < piv[j].size(); ++t) acc[piv[j][t].first] -= v * piv[j][t].second;
    }
    SparseRow reduced{{c, Rational(1)}};
    for (auto& [j, v] : acc)
      if (sgn(v) != 0) reduced.emplace_back(j, std::move(v));
    piv[c] = std::move(reduced);
  }
  std::vector<std::size_t> slot(cols, 0);
  std::size_t nfree = 0;
  for (std::size_t c = 0; c < cols; ++c)
    if (!has[c]) slot[c] = nfree++;
  QMatrix out(nfree, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    if (!has[c]) {
      out(slot[c], c) = 1;
      continue;
    }
    for (std::size_t t = 1; t < piv[c].size(); ++t) out(slot[piv[c][t].first], c) = -piv[c][t].second;
  }
  if (out.rows() > 0) rref(out);
  return out;
}

}  // namespace cellnet
