#include <doctest.h>

#include <algorithm>
#include <random>

#include "cellnet/acceptance.hpp"
#include "cellnet/error.hpp"
#include "cellnet/repspace.hpp"

using namespace cellnet;

namespace {

NetworkSpec cyclic(std::size_t n) {
  std::vector<std::string> cells;
  std::vector<CellIndex> t;
  for (std::size_t i = 0; i < n; ++i) {
    cells.push_back("z" + std::to_string(i));
    t.push_back(static_cast<CellIndex>((i + 1) % n));
  }
  return NetworkSpec(cells, {{"r", CellMap(t)}});
}

NetworkSpec trivial_net() { return NetworkSpec({"a"}, {{"e", CellMap::identity(1)}}); }

QMatrix row(std::vector<long> v) {
  QMatrix m(1, v.size());
  for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
  return m;
}

std::vector<std::size_t> dims(const Decomposition& d) {
  std::vector<std::size_t> out;
  for (const auto& s : d.summands) out.push_back(s.space.dim());
  std::sort(out.begin(), out.end());
  return out;
}

bool nilpotent(const QMatrix& a) {
  QMatrix p = a;
  for (std::size_t i = 0; i < a.rows(); ++i) p = p * a;
  return p.is_zero();
}

void check_decomposition(const RegularRep& rep, const Subspace& w, const Decomposition& dec) {
  std::vector<Subspace> parts;
  std::size_t total = 0;
  for (const auto& s : dec.summands) {
    parts.push_back(s.space);
    total += s.space.dim();
    CHECK(s.certificate.indecomposable);
    if (s.space.is_exact())
      CHECK(rep.is_invariant(s.space));
    else
      CHECK(rep.invariance_defect(s.space) <= 1e-8);
  }
  CHECK(total == w.dim());
  CHECK(independent(parts, rep.dim()));
}

// one-to-one matching by iso_test
bool krull_schmidt_match(const RegularRep& rep, const Decomposition& a, const Decomposition& b) {
  if (a.summands.size() != b.summands.size()) return false;
  std::vector<char> used(b.summands.size(), 0);
  for (const auto& s : a.summands) {
    bool found = false;
    for (std::size_t j = 0; j < b.summands.size() && !found; ++j)
      if (!used[j] && b.summands[j].space.dim() == s.space.dim() &&
          iso_test(rep, s.space, b.summands[j].space)) {
        used[j] = 1;
        found = true;
      }
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("action matrices form a representation") {
  const auto m = monoid_closure(acceptance::figure2_network());
  for (std::size_t d = 1; d <= 2; ++d) {
    const RegularRep rep(m, d);
    CHECK(rep.action_matrix(0) == QMatrix::identity(rep.dim()));
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) {
        const auto a = static_cast<ElementIndex>(i), b = static_cast<ElementIndex>(j);
        CHECK(rep.action_matrix(a) * rep.action_matrix(b) == rep.action_matrix(m.product(a, b)));
      }
  }
}

TEST_CASE("synchrony subspaces") {
  const auto net = make_ring_ff(2, 2);
  const auto m = monoid_closure(net);
  for (std::size_t d = 1; d <= 2; ++d) {
    const RegularRep rep(m, d);
    CHECK(synchrony_subspace(rep, Partition::discrete(m.size())) == Subspace::full(rep.dim()));
    CHECK(synchrony_subspace(rep, Partition::synchronous(m.size())).dim() == d);
    const auto q = quotient_network(net, m, block_partition(net, Block{{2, 3}, {}, {}}));
    CHECK(synchrony_subspace(rep, Partition(q.projection)).dim() == 3 * d);
  }
}

TEST_CASE("syn_Np") {
  for (std::size_t n = 1; n <= 3; ++n)
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto rep_m = monoid_closure(make_ring_ff(n, k));
      const RegularRep rep(rep_m);
      CHECK(syn_Np(rep, 0) == Subspace::full(rep.dim()));
    }
  const auto one_m = monoid_closure(trivial_net());
  const RegularRep one(one_m);
  CHECK(syn_Np(one, 0) == Subspace::full(1));
  const auto fig2_m = monoid_closure(acceptance::figure2_network());
  const RegularRep fig2(fig2_m, 2);
  CHECK(syn_Np(fig2, 0).dim() == 8);
}

TEST_CASE("robust synchrony subspaces are invariant") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = acceptance::random_network(rng, 4, 2);
    const auto m = monoid_closure(net, 200);
    const RegularRep rep(m);
    for (const auto& p : enumerate_balanced_partitions(net)) {
      const auto q = quotient_network(net, m, p);
      CHECK(rep.is_invariant(synchrony_subspace(rep, Partition(q.projection))));
    }
  }
}

TEST_CASE("commutants") {
  const auto one_m = monoid_closure(trivial_net());
  const RegularRep one(one_m);
  CHECK(commutant_basis(one, Subspace::full(1)).size() == 1);
  const auto z2_m = monoid_closure(cyclic(2));
  const RegularRep z2(z2_m);
  CHECK(commutant_basis(z2, Subspace::full(2)).size() == 2);
  const auto m22 = monoid_closure(make_ring_ff(2, 2));
  const RegularRep r22(m22);
  const auto ker = projection_from_idempotent(r22, 2).kernel;
  const auto end = commutant_basis(r22, ker);
  CHECK(std::any_of(end.begin(), end.end(), [](const QMatrix& x) { return !x.is_zero() && nilpotent(x); }));
  CHECK_THROWS_AS(commutant_basis(r22, Subspace::span(4, row({0, 0, 0, 1}))), Error);
}

TEST_CASE("projections from idempotents") {
  const auto m = monoid_closure(make_ring_ff(2, 2));
  const RegularRep rep(m);
  SUBCASE("identity") {
    const auto p = projection_from_idempotent(rep, 0);
    CHECK(p.matrix == QMatrix::identity(4));
    CHECK(p.image == Subspace::full(4));
    CHECK(p.kernel.dim() == 0);
  }
  SUBCASE("s^2 on R_{2,2}") {
    const auto p = projection_from_idempotent(rep, 2);
    // image: X_id = X_{s^2}, X_s = X_{s^3}; kernel: X_{s^2} = X_{s^3} = 0
    CHECK(p.image == Subspace::span(4, QMatrix::from_rows({{1, 0, 1, 0}, {0, 1, 0, 1}}, 4)));
    CHECK(p.kernel == Subspace::span(4, QMatrix::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}}, 4)));
    CHECK(p.matrix * p.matrix == p.matrix);
    for (std::size_t s = 0; s < m.size(); ++s) {
      const auto a = rep.action_matrix(static_cast<ElementIndex>(s));
      CHECK(a * p.matrix == p.matrix * a);
    }
  }
  SUBCASE("s^T on R_{n,k}") {
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t k = 1; k <= 3; ++k) {
        const auto mk = monoid_closure(make_ring_ff(n, k));
        const RegularRep r(mk);
        // the idempotent power of s is s^T with T the multiple of n in [k, k+n)
        const auto iota = idempotent_power(mk, 1);
        const auto p = projection_from_idempotent(r, iota);
        QMatrix ker_eq(0, n + k);
        for (std::size_t i = k; i < n + k; ++i) {
          std::vector<Rational> e(n + k, Rational(0));
          e[i] = 1;
          ker_eq.append_row(e);
        }
        CHECK(p.kernel == Subspace::solutions(n + k, ker_eq));
        QMatrix im_eq(0, n + k);
        for (std::size_t i = 0; i < n + k; ++i)
          for (std::size_t j = i + 1; j < n + k; ++j)
            if ((j - i) % n == 0) {
              std::vector<Rational> e(n + k, Rational(0));
              e[i] = 1;
              e[j] = -1;
              im_eq.append_row(e);
            }
        CHECK(p.image == Subspace::solutions(n + k, im_eq));
      }
  }
  SUBCASE("non-idempotent is rejected") { CHECK_THROWS_AS(projection_from_idempotent(rep, 1), Error); }
}

TEST_CASE("decompose: trivial monoid") {
  const auto rep_m = monoid_closure(trivial_net());
  const RegularRep rep(rep_m);
  const auto dec = decompose(rep, Subspace::full(1), 0);
  REQUIRE(dec.summands.size() == 1);
  CHECK(dec.summands[0].certificate.type == FieldType::kReal);
}

TEST_CASE("decompose: R_{2,2}") {
  const auto m = monoid_closure(make_ring_ff(2, 2));
  const RegularRep rep(m);
  const auto dec = decompose(rep, Subspace::full(4), 0, DecomposeMode::kExact);
  check_decomposition(rep, Subspace::full(4), dec);
  CHECK(dims(dec) == std::vector<std::size_t>{1, 1, 2});
  const auto ker = projection_from_idempotent(rep, 2).kernel;
  const auto ones = Subspace::span(4, row({1, 1, 1, 1}));
  const auto sign = Subspace::span(4, row({1, -1, 1, -1}));
  int matched = 0;
  for (const auto& s : dec.summands) {
    CHECK(s.certificate.type == FieldType::kReal);
    matched += (s.space == ker) + (s.space == ones) + (s.space == sign);
  }
  CHECK(matched == 3);
}

TEST_CASE("decompose: R_{5,1} against the discrete Fourier basis") {
  const auto m = monoid_closure(make_ring_ff(5, 1));
  const RegularRep rep(m);
  const auto dec = decompose(rep, Subspace::full(6), 0);
  check_decomposition(rep, Subspace::full(6), dec);
  CHECK(dims(dec) == std::vector<std::size_t>{1, 1, 2, 2});
  // ring elements s^1..s^5 act as Z/5; frequency-j plane spanned by cos and sin vectors on them
  for (int j = 1; j <= 2; ++j) {
    DMatrix basis(2, 6);
    for (int i = 1; i <= 5; ++i) {
      const double phase = 2.0 * 3.14159265358979323846 * j * i / 5.0;
      basis(0, static_cast<std::size_t>(i)) = std::cos(phase);
      basis(1, static_cast<std::size_t>(i)) = std::sin(phase);
    }
    // the plane lives in im B_ι with ι = s^5, so X_id = X_{s^5}
    basis(0, 0) = basis(0, 5);
    basis(1, 0) = basis(1, 5);
    const auto plane = Subspace::from_float(6, basis, 0.0);
    CHECK(rep.invariance_defect(plane) < 1e-12);
    int hits = 0;
    for (const auto& s : dec.summands) {
      if (s.space.dim() != 2) continue;
      CHECK_FALSE(s.space.is_exact());
      CHECK(s.certificate.type == FieldType::kComplex);
      if (max_principal_sine(s.space, plane) <= 1e-8) ++hits;
    }
    CHECK(hits == 1);
  }
}

TEST_CASE("certification") {
  SUBCASE("trivial line is real") {
    const auto rep_m = monoid_closure(cyclic(3));
    const RegularRep rep(rep_m);
    CHECK(certify_indecomposable(rep, Subspace::span(3, row({1, 1, 1}))).type == FieldType::kReal);
  }
  SUBCASE("rotation planes are complex") {
    for (std::size_t n = 3; n <= 5; ++n) {
      const auto rep_m = monoid_closure(cyclic(n));
      const RegularRep rep(rep_m);
      const auto dec = decompose(rep, Subspace::full(n), 0);
      for (const auto& s : dec.summands) {
        if (s.space.dim() != 2) continue;
        const auto c = certify_indecomposable(rep, s.space);
        CHECK(c.indecomposable);
        CHECK(c.type == FieldType::kComplex);
      }
    }
  }
  SUBCASE("Z/5 over Q: one 4-dim piece, irreducible over Q, split over R") {
    const auto rep_m = monoid_closure(cyclic(5));
    const RegularRep rep(rep_m);
    const auto dec = decompose(rep, Subspace::full(5), 0, DecomposeMode::kExact);
    CHECK(dims(dec) == std::vector<std::size_t>{1, 4});
    for (const auto& s : dec.summands)
      if (s.space.dim() == 4) CHECK(s.certificate.rational_irreducible);
  }
  SUBCASE("nilpotent kernel of a ring is real") {
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t k = 2; k <= 4; ++k) {
        const auto m = monoid_closure(make_ring_ff(n, k));
        const RegularRep rep(m);
        const auto ker = projection_from_idempotent(rep, idempotent_power(m, 1)).kernel;
        const auto c = certify_indecomposable(rep, ker);
        CHECK(c.indecomposable);
        CHECK(c.type == FieldType::kReal);
        CHECK(c.radical_dim + 1 == c.end_dim);
      }
  }
}

TEST_CASE("iso_test") {
  const auto z2_m = monoid_closure(cyclic(2));
  const RegularRep z2(z2_m);
  const auto triv = Subspace::span(2, row({1, 1}));
  const auto sign = Subspace::span(2, row({1, -1}));
  CHECK(iso_test(z2, triv, triv));
  CHECK_FALSE(iso_test(z2, triv, sign));
  const auto z5_m = monoid_closure(cyclic(5));
  const RegularRep z5(z5_m);
  const auto dec = decompose(z5, Subspace::full(5), 0);
  std::vector<Subspace> planes;
  for (const auto& s : dec.summands)
    if (s.space.dim() == 2) planes.push_back(s.space);
  REQUIRE(planes.size() == 2);
  CHECK(iso_test(z5, planes[0], planes[0]));
  CHECK_FALSE(iso_test(z5, planes[0], planes[1]));
}

TEST_CASE("kernel summands are never isomorphic to image summands") {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto m = monoid_closure(make_ring_ff(n, k));
      const RegularRep rep(m);
      const auto p = projection_from_idempotent(rep, idempotent_power(m, 1));
      const auto dk = decompose(rep, p.kernel, 1);
      const auto di = decompose(rep, p.image, 2);
      for (const auto& a : dk.summands)
        for (const auto& b : di.summands) CHECK_FALSE(iso_test(rep, a.space, b.space));
    }
}

TEST_CASE("Krull-Schmidt stability across seeds") {
  std::mt19937_64 rng(41);
  int done = 0;
  while (done < 12) {
    const auto net = acceptance::random_network(rng, 4, 2);
    const auto m = monoid_closure(net, 5000);
    if (m.size() > 20) continue;
    for (std::size_t d = 1; d <= 2; ++d) {
      const RegularRep rep(m, d);
      const auto full = Subspace::full(rep.dim());
      const auto a = decompose(rep, full, 0);
      const auto b = decompose(rep, full, 1);
      check_decomposition(rep, full, a);
      CHECK(krull_schmidt_match(rep, a, b));
    }
    ++done;
  }
}

TEST_CASE("intersection with synchrony") {
  const auto net = make_ring_ff(2, 2);
  const auto m = monoid_closure(net);
  const RegularRep rep(m);
  const auto dec = decompose(rep, Subspace::full(4), 0, DecomposeMode::kExact);
  SUBCASE("full synchrony space returns the decomposition") {
    const auto same = intersect_with_synchrony(rep, dec, Subspace::full(4));
    REQUIRE(same.summands.size() == dec.summands.size());
    for (std::size_t i = 0; i < dec.summands.size(); ++i)
      CHECK(same.summands[i].space == dec.summands[i].space);
  }
  SUBCASE("Syn_π of the block quotient reproduces R_{1,2}") {
    const auto q = quotient_network(net, m, block_partition(net, Block{{2, 3}, {}, {}}));
    const auto syn = synchrony_subspace(rep, Partition(q.projection));
    const auto cut = intersect_with_synchrony(rep, dec, syn);
    const RegularRep small(q.quotient_monoid);
    const auto ref = decompose(small, Subspace::full(small.dim()), 0, DecomposeMode::kExact);
    REQUIRE(cut.summands.size() == ref.summands.size());
    // pull the reference summands into the big space and match there
    Decomposition lifted;
    for (const auto& s : ref.summands)
      lifted.summands.push_back(
          {Subspace::span(rep.dim(), embed_quotient_rows(q.projection, 1, s.space.basis())), s.certificate});
    CHECK(krull_schmidt_match(rep, cut, lifted));
    for (const auto& s : cut.summands)
      CHECK(certify_indecomposable(rep, s.space).type == s.certificate.type);
  }
}

TEST_CASE("projection-block identities") {
  SUBCASE("R_{2,2}, B = {c2, c3}, p = c0") {
    const auto net = make_ring_ff(2, 2);
    const auto r = verify_projection_block_theorem(net, monoid_closure(net), Block{{2, 3}, {}, {}}, 0, 1);
    CHECK(r.checks.size() == 3);
    CHECK(r.all_hold());
  }
  SUBCASE("B = C gives W = 0") {
    const auto net = make_ring_ff(2, 2);
    const auto r =
        verify_projection_block_theorem(net, monoid_closure(net), Block{{0, 1, 2, 3}, {}, {}}, 0, 2);
    CHECK(r.kernel_dim == 0);
    CHECK(r.all_hold());
  }
  SUBCASE("random constructed projection blocks") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
      const auto s = acceptance::random_projection_block_network(rng, 40);
      CHECK(verify_projection_block_theorem(s.net, monoid_closure(s.net), s.block, s.cell, 1).all_hold());
    }
  }
  SUBCASE("non projection block is rejected") {
    const NetworkSpec net({"a", "b", "c"}, {{"g1", CellMap({0, 2, 1})}, {"g2", CellMap({1, 1, 1})}});
    CHECK_THROWS_AS(verify_projection_block_theorem(net, monoid_closure(net), Block{{1, 2}, {}, {}}, 0, 1),
                    Error);
  }
}

TEST_CASE("lifting equivariant maps from a quotient") {
  const auto net = make_ring_ff(2, 2);
  const auto m = monoid_closure(net);
  const RegularRep big(m);
  const auto q = quotient_network(net, m, block_partition(net, Block{{2, 3}, {}, {}}));
  const RegularRep small(q.quotient_monoid);
  const std::size_t ns = small.dim();

  auto check_lift = [&](const QMatrix& l) {
    const auto lifted = lift_linear_equivariant(big, small, q.projection, l);
    for (auto g : big.generator_elements()) {
      const auto a = big.action_matrix(g);
      CHECK(lifted * a == a * lifted);
    }
    // restriction to Syn_π is l itself
    for (std::size_t j = 0; j < ns; ++j) {
      QMatrix e(1, ns);
      e(0, j) = 1;
      const auto x = embed_quotient_rows(q.projection, 1, e).row(0);
      const auto ly = l * e.row(0);
      QMatrix lyr(1, ns);
      for (std::size_t i = 0; i < ns; ++i) lyr(0, i) = ly[i];
      CHECK(lifted * x == embed_quotient_rows(q.projection, 1, lyr).row(0));
    }
    return lifted;
  };

  SUBCASE("identity") { check_lift(QMatrix::identity(ns)); }
  SUBCASE("scaled projection onto two summands") {
    const auto dec = decompose(small, Subspace::full(ns), 0, DecomposeMode::kExact);
    REQUIRE(dec.summands.size() >= 2);
    // columns of u: summand basis vectors; l = u diag(1.., 2.., 0..) u^{-1}
    QMatrix u(ns, ns), diag(ns, ns);
    std::size_t col = 0;
    for (std::size_t s = 0; s < dec.summands.size(); ++s) {
      const auto& b = dec.summands[s].space.basis();
      for (std::size_t r = 0; r < b.rows(); ++r, ++col) {
        for (std::size_t i = 0; i < ns; ++i) u(i, col) = b(r, i);
        diag(col, col) = s == 0 ? 1 : (s == 1 ? 2 : 0);
      }
    }
    const auto uinv = inverse(u);
    REQUIRE(uinv.has_value());
    const auto lifted = check_lift(u * diag * *uinv);
    const auto cp = charpoly(lifted);
    CHECK(divmod(cp, QPoly({Rational(-1), Rational(1)})).second.is_zero());
    CHECK(divmod(cp, QPoly({Rational(-2), Rational(1)})).second.is_zero());
  }
  SUBCASE("non-equivariant map is rejected") {
    QMatrix bad(ns, ns);
    bad(0, 1) = 1;
    CHECK_THROWS_AS(lift_linear_equivariant(big, small, q.projection, bad), Error);
  }
}
