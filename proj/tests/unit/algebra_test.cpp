#include <doctest.h>

#include <random>

#include "cellnet/linalg.hpp"
#include "cellnet/polynomial.hpp"
#include "cellnet/subspace.hpp"

using namespace cellnet;

namespace {

QPoly poly(std::vector<long> c) {
  std::vector<Rational> q;
  for (long v : c) q.emplace_back(v);
  return QPoly(q);
}

QMatrix qmat(std::vector<std::vector<long>> rows) {
  QMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

QMatrix random_qmat(std::mt19937_64& rng, std::size_t r, std::size_t c, int density) {
  QMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (static_cast<int>(rng() % 10) < density) m(i, j) = static_cast<long>(rng() % 7) - 3;
  return m;
}

std::vector<QPoly> factors_only(const std::vector<std::pair<QPoly, int>>& f) {
  std::vector<QPoly> out;
  for (const auto& [p, e] : f)
    for (int i = 0; i < e; ++i) out.push_back(p);
  return out;
}

QPoly product(const std::vector<QPoly>& ps) {
  QPoly acc = QPoly::constant(1);
  for (const auto& p : ps) acc = acc * p;
  return acc;
}

}  // namespace

TEST_CASE("rational text") {
  CHECK(to_string(Rational(3, 4)) == "3/4");
  Rational q(-6, 3);
  q.canonicalize();
  CHECK(to_string(q) == "-2");
  CHECK(parse_rational("10/4") == Rational(5, 2));
  CHECK_THROWS(parse_rational("x"));
  CHECK_THROWS(parse_rational("1/0"));
}

TEST_CASE("rref and nullspace") {
  auto m = qmat({{1, 2, 3}, {2, 4, 6}, {1, 0, 1}});
  CHECK(rank(m) == 2);
  const auto n = nullspace(m);
  REQUIRE(n.rows() == 1);
  CHECK((m * n.row(0)) == std::vector<Rational>(3, Rational(0)));
  const auto inv = inverse(qmat({{2, 1}, {1, 1}}));
  REQUIRE(inv.has_value());
  CHECK(*inv == qmat({{1, -1}, {-1, 2}}));
  CHECK_FALSE(inverse(qmat({{1, 2}, {2, 4}})).has_value());
  CHECK(determinant(qmat({{1, 2}, {3, 4}})) == Rational(-2));
}

TEST_CASE("sparse nullspace reproduces the dense reduced basis") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t r = 1 + rng() % 12, c = 1 + rng() % 12;
    const auto m = random_qmat(rng, r, c, 1 + static_cast<int>(trial % 6));
    std::vector<SparseRow> rows;
    for (std::size_t i = 0; i < r; ++i) {
      SparseRow row;
      for (std::size_t j = 0; j < c; ++j)
        if (sgn(m(i, j)) != 0) row.emplace_back(j, m(i, j));
      rows.push_back(row);
    }
    CHECK(sparse_nullspace(rows, c) == nullspace(m));
  }
}

TEST_CASE("float nullspace is orthonormal") {
  DMatrix m(2, 3);
  m(0, 0) = 1; m(0, 1) = 1;
  m(1, 1) = 1; m(1, 2) = -1;
  const auto n = nullspace(m);
  REQUIRE(n.rows() == 1);
  double norm = 0;
  for (std::size_t j = 0; j < 3; ++j) norm += n(0, j) * n(0, j);
  CHECK(norm == doctest::Approx(1.0));
  CHECK(std::abs(n(0, 0) + n(0, 1)) < 1e-12);
}

TEST_CASE("polynomial arithmetic") {
  const auto a = poly({-1, 0, 1});  // x^2 - 1
  const auto b = poly({1, 1});      // x + 1
  const auto [q, r] = divmod(a, b);
  CHECK(q == poly({-1, 1}));
  CHECK(r.is_zero());
  CHECK(gcd(a, poly({1, 2, 1})) == b);
  CHECK(a.derivative() == poly({0, 2}));
  CHECK_THROWS(divmod(a, QPoly()));
}

TEST_CASE("square-free decomposition") {
  // (x-1)^2 (x+2)
  const auto f = poly({-1, 1}) * poly({-1, 1}) * poly({2, 1});
  const auto sf = squarefree_decomposition(f);
  REQUIRE(sf.size() == 2);
  CHECK(sf[0].first == poly({2, 1}));
  CHECK(sf[0].second == 1);
  CHECK(sf[1].first == poly({-1, 1}));
  CHECK(sf[1].second == 2);
}

TEST_CASE("factorization over Q") {
  SUBCASE("x^4 - 1") {
    const auto f = factor(poly({-1, 0, 0, 0, 1}));
    CHECK(f.size() == 3);
    CHECK(product(factors_only(f)) == poly({-1, 0, 0, 0, 1}));
  }
  SUBCASE("x^2 - 2 stays irreducible") { CHECK(factor(poly({-2, 0, 1})).size() == 1); }
  SUBCASE("x^4 + 4 splits into two quadratics") {
    const auto f = factor(poly({4, 0, 0, 0, 1}));
    REQUIRE(f.size() == 2);
    CHECK(f[0].first.degree() == 2);
    CHECK(f[1].first.degree() == 2);
  }
  SUBCASE("x^5 - 1 = (x - 1)(cyclotomic quartic)") {
    const auto f = factor(poly({-1, 0, 0, 0, 0, 1}));
    REQUIRE(f.size() == 2);
    CHECK(product(factors_only(f)) == poly({-1, 0, 0, 0, 0, 1}));
  }
  SUBCASE("random products of known factors") {
    std::mt19937_64 rng(17);
    const std::vector<QPoly> pool = {poly({-3, 1}), poly({1, 0, 1}), poly({-2, 0, 1}),
                                     poly({1, 1, 1}), poly({5, 2}), poly({-1, -1, 0, 1})};
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<QPoly> picked;
      for (const auto& p : pool)
        if (rng() % 2) picked.push_back(p.monic());
      if (picked.empty()) continue;
      const auto f = factor(product(picked));
      CHECK(factors_only(f).size() == picked.size());
      CHECK(product(factors_only(f)) == product(picked));
    }
  }
}

TEST_CASE("characteristic polynomial") {
  CHECK(charpoly(qmat({{0, 1}, {-1, 0}})) == poly({1, 0, 1}));
  CHECK(charpoly(qmat({{2, 0, 0}, {1, 3, 0}, {4, 5, 6}})) ==
        poly({-2, 1}) * poly({-3, 1}) * poly({-6, 1}));
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_qmat(rng, 5, 5, 6);
    CHECK(evaluate(charpoly(a), a).is_zero());  // Cayley-Hamilton
  }
}

TEST_CASE("subspaces") {
  const auto s = Subspace::span(3, qmat({{1, 1, 0}, {2, 2, 0}, {0, 0, 1}}));
  CHECK(s.dim() == 2);
  CHECK(s == Subspace::solutions(3, qmat({{1, -1, 0}})));
  CHECK(s.contains(std::vector<Rational>{3, 3, 7}));
  CHECK_FALSE(s.contains(std::vector<Rational>{1, 0, 0}));
  const auto line = Subspace::span(3, qmat({{1, 0, 0}}));
  CHECK(intersect(s, line).dim() == 0);
  CHECK(sum(s, line) == Subspace::full(3));
  CHECK(independent({s, line}, 3));
  CHECK_FALSE(independent({s, s}, 3));
  CHECK(Subspace::span(3, s.equations()).dim() == 1);
  const auto c = s.coordinates({3, 3, 7});
  CHECK(c == std::vector<Rational>{3, 7});
}

TEST_CASE("float subspaces compare by principal angle") {
  const auto exact = Subspace::span(2, qmat({{1, 1}}));
  DMatrix rows(1, 2);
  rows(0, 0) = 2.0;
  rows(0, 1) = 2.0 + 1e-12;
  const auto f = Subspace::from_float(2, rows, 0.0);
  CHECK_FALSE(f.is_exact());
  CHECK(max_principal_sine(exact, f) < Subspace::kAngleTol);
  CHECK(f == exact);
  rows(0, 1) = 2.1;
  CHECK_FALSE(Subspace::from_float(2, rows, 0.0) == exact);
  CHECK(max_principal_sine(exact, Subspace::full(2)) == 1.0);
}
