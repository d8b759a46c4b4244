#include <doctest.h>

#include <random>

#include "cellnet/acceptance.hpp"
#include "cellnet/error.hpp"
#include "cellnet/kernels.hpp"
#include "cellnet/netcore.hpp"

using namespace cellnet;

namespace {

CellMap map_of(std::vector<CellIndex> t) { return CellMap(std::move(t)); }

NetworkSpec identity_net(std::size_t cells) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cells; ++i) labels.push_back("c" + std::to_string(i));
  return NetworkSpec(labels, {{"e", CellMap::identity(cells)}});
}

}  // namespace

TEST_CASE("compose applies the right argument first") {
  const auto s = map_of({1, 2, 3, 2});
  CHECK(compose(CellMap::identity(4), s) == s);
  CHECK(compose(s, CellMap::identity(4)) == s);
  const auto s2 = compose(s, s);
  CHECK(s2 == map_of({2, 3, 2, 3}));
  CHECK(compose(s2, s2) == s2);
  // non-commuting pair pins down the order
  const auto a = map_of({1, 1, 2});
  const auto b = map_of({2, 0, 0});
  CHECK(compose(a, b) == map_of({2, 1, 1}));
  CHECK(compose(b, a) == map_of({0, 0, 0}));
}

TEST_CASE("compose rejects a size mismatch") {
  CHECK_THROWS_AS(compose(CellMap::identity(2), CellMap::identity(3)), Error);
}

TEST_CASE("network validation") {
  CHECK_THROWS_AS(NetworkSpec({"a", "a"}, {{"s", CellMap::identity(2)}}), Error);
  CHECK_THROWS_AS(NetworkSpec({"a", "b"}, {}), Error);
  CHECK_THROWS_AS(NetworkSpec({"a", "b"}, {{"s", CellMap::identity(3)}}), Error);
  CHECK_THROWS_AS(NetworkSpec({"a", "b"}, {{"s", CellMap::identity(2)}, {"s", CellMap::identity(2)}}),
                  Error);
  const NetworkSpec ok({"a", "b"}, {{"s", map_of({1, 1})}});
  CHECK(ok.cell("b") == 1);
  CHECK_THROWS_AS(ok.cell("zz"), Error);
}

TEST_CASE("closure sizes") {
  SUBCASE("R_{2,2} has four elements id, s, s^2, s^3") {
    const auto m = monoid_closure(make_ring_ff(2, 2));
    REQUIRE(m.size() == 4);
    CHECK(m.element(0).is_identity());
    CHECK(m.word_string(1) == "s");
    CHECK(m.word_string(2) == "s^2");
    CHECK(m.word_string(3) == "s^3");
  }
  SUBCASE("identity generator gives the trivial monoid") {
    CHECK(monoid_closure(identity_net(3)).size() == 1);
  }
  SUBCASE("figure-2 network: four elements with s^4 = s^2") {
    const auto m = monoid_closure(acceptance::figure2_network());
    REQUIRE(m.size() == 4);
    CHECK(m.product(2, 2) == 2);
  }
  SUBCASE("|Σ| = n + k and s^{n+k} = s^k for rings") {
    for (std::size_t n = 1; n <= 6; ++n)
      for (std::size_t k = 1; k <= 6; ++k) {
        const auto net = make_ring_ff(n, k);
        const auto m = monoid_closure(net);
        CHECK(m.size() == n + k);
        CellMap p = CellMap::identity(n + k), pk;
        for (std::size_t i = 1; i <= n + k; ++i) {
          p = compose(net.generators()[0].map, p);
          if (i == k) pk = p;
        }
        CHECK(p == pk);
      }
  }
}

TEST_CASE("closure cap reports the partial size") {
  // two generators of the full transformation monoid on 4 points plus a rank-3 map: 256 elements
  const NetworkSpec net({"a", "b", "c", "d"},
                        {{"cyc", map_of({1, 2, 3, 0})}, {"swap", map_of({1, 0, 2, 3})},
                         {"merge", map_of({0, 0, 2, 3})}});
  CHECK(monoid_closure(net).size() == 256);
  try {
    monoid_closure(net, 10);
    FAIL("expected CapacityExceeded");
  } catch (const CapacityExceeded& e) {
    CHECK(e.partial_size() >= 10);
  }
}

TEST_CASE("canonical order is BFS then shortlex") {
  const NetworkSpec net({"a", "b", "c"}, {{"f", map_of({1, 1, 2})}, {"g", map_of({2, 0, 0})}});
  const auto m = monoid_closure(net);
  for (std::size_t i = 1; i < m.size(); ++i) {
    const auto& a = m.word(static_cast<ElementIndex>(i - 1));
    const auto& b = m.word(static_cast<ElementIndex>(i));
    CHECK((a.size() < b.size() || (a.size() == b.size() && a < b)));
  }
  // words evaluate to their elements: word (w1..wm) is g_{w1}∘...∘g_{wm}
  for (std::size_t i = 0; i < m.size(); ++i) {
    CellMap acc = CellMap::identity(3);
    for (auto letter : m.word(static_cast<ElementIndex>(i)))
      acc = compose(acc, net.generators()[letter].map);
    CHECK(acc == m.element(static_cast<ElementIndex>(i)));
  }
}

TEST_CASE("Cayley table: convention, closure, associativity") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto net = acceptance::random_network(rng, 5, 3);
    Monoid m;
    try {
      m = monoid_closure(net, 60);
    } catch (const CapacityExceeded&) {
      continue;
    }
    const auto n = m.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto ij = m.product(static_cast<ElementIndex>(i), static_cast<ElementIndex>(j));
        REQUIRE(ij < n);
        CHECK(m.element(ij) == compose(m.element(static_cast<ElementIndex>(i)),
                                       m.element(static_cast<ElementIndex>(j))));
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const auto a = static_cast<ElementIndex>(i), b = static_cast<ElementIndex>(j),
                     c = static_cast<ElementIndex>(k);
          CHECK(m.product(m.product(a, b), c) == m.product(a, m.product(b, c)));
        }
  }
}

TEST_CASE("closure is deterministic") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = acceptance::random_network(rng, 5, 2);
    const auto a = monoid_closure(net, 5000);
    const auto b = monoid_closure(net, 5000);
    CHECK(a.elements() == b.elements());
    CHECK(a.cayley() == b.cayley());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a.word(static_cast<ElementIndex>(i)) == b.word(static_cast<ElementIndex>(i)));
  }
}

TEST_CASE("fully dependent cells") {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto net = make_ring_ff(n, k);
      const auto fd = fully_dependent_cells(net, monoid_closure(net));
      CHECK(std::find(fd.begin(), fd.end(), CellIndex{0}) != fd.end());
    }
  const auto id = identity_net(3);
  CHECK(fully_dependent_cells(id, monoid_closure(id)).empty());
  const auto fig2 = acceptance::figure2_network();
  CHECK(fully_dependent_cells(fig2, monoid_closure(fig2)) == std::vector<CellIndex>{0});
}

TEST_CASE("fundamental network") {
  SUBCASE("rings are their own fundamental networks") {
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t k = 1; k <= 4; ++k) {
        const auto net = make_ring_ff(n, k);
        CHECK(find_isomorphism(fundamental_network(monoid_closure(net)), net).has_value());
      }
  }
  SUBCASE("trivial monoid gives one cell with a self-loop") {
    const auto f = fundamental_network(monoid_closure(identity_net(3)));
    REQUIRE(f.cell_count() == 1);
    CHECK(f.generators()[0].map[0] == 0);
  }
  SUBCASE("figure-2 is isomorphic to its fundamental network") {
    const auto fig2 = acceptance::figure2_network();
    CHECK(find_isomorphism(fundamental_network(monoid_closure(fig2)), fig2).has_value());
  }
  SUBCASE("closure of the fundamental network reproduces the Cayley table") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const auto net = acceptance::random_network(rng, 4, 2);
      const auto m = monoid_closure(net, 3000);
      const auto f = fundamental_network(m);
      const auto mf = monoid_closure(f);
      REQUIRE(mf.size() == m.size());
      CHECK(mf.cayley() == m.cayley());
      const auto fd = fully_dependent_cells(f, mf);
      CHECK(std::find(fd.begin(), fd.end(), CellIndex{0}) != fd.end());
    }
  }
}

TEST_CASE("make_ring_ff shapes") {
  const auto r11 = make_ring_ff(1, 1);
  REQUIRE(r11.cell_count() == 2);
  CHECK(r11.generators()[0].map == map_of({1, 1}));
  CHECK(make_ring_ff(1, 3).generators()[0].map == map_of({1, 2, 3, 3}));
  CHECK(make_ring_ff(2, 2).generators()[0].map == map_of({1, 2, 3, 2}));
  CHECK(find_isomorphism(make_ring_ff(2, 2), acceptance::figure2_network()).has_value());
  CHECK_FALSE(find_isomorphism(make_ring_ff(1, 3), make_ring_ff(2, 2)).has_value());
}

TEST_CASE("Cayley kernels agree with each other and with composition") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 25; ++trial) {
    const auto net = acceptance::random_network(rng, 6, 3);
    Monoid m;
    try {
      m = monoid_closure(net, 3000);
    } catch (const CapacityExceeded&) {
      continue;
    }
    const auto ref = kernels::cayley_table_by_composition(m);
    CHECK(kernels::cayley_table_serial(m) == ref);
    CHECK(kernels::cayley_table_parallel(m) == ref);
    CHECK(m.cayley() == ref);
  }
}
