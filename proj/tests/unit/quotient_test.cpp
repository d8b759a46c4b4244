#include <doctest.h>

#include <algorithm>
#include <random>

#include "cellnet/acceptance.hpp"
#include "cellnet/error.hpp"
#include "cellnet/quotient.hpp"

using namespace cellnet;

namespace {

Partition classes(std::size_t n, std::vector<std::vector<CellIndex>> c) {
  return Partition::from_classes(n, c);
}

// three cells a, b, c; g1 swaps b and c, g2 is constant b
NetworkSpec negative_example() {
  return NetworkSpec({"a", "b", "c"},
                     {{"g1", CellMap({0, 2, 1})}, {"g2", CellMap({1, 1, 1})}});
}

bool contains(const std::vector<Partition>& ps, const Partition& p) {
  return std::find(ps.begin(), ps.end(), p) != ps.end();
}

}  // namespace

TEST_CASE("partition canonical labels") {
  const Partition a({3, 3, 1, 0});
  CHECK(a.labels() == std::vector<std::uint32_t>{0, 0, 1, 2});
  CHECK(a.class_count() == 3);
  CHECK(a == classes(4, {{2}, {0, 1}, {3}}));
  CHECK_THROWS_AS(classes(3, {{0, 1}}), Error);
  CHECK_THROWS_AS(classes(3, {{0, 1}, {1, 2}}), Error);
}

TEST_CASE("balance on figure-2") {
  const auto net = acceptance::figure2_network();
  CHECK(is_balanced(net, classes(4, {{0}, {1}, {2, 3}})));
  CHECK(is_balanced(net, Partition::discrete(4)));
  CHECK_FALSE(is_balanced(net, classes(4, {{0, 1}, {2}, {3}})));
  CHECK_THROWS_AS(is_balanced(net, Partition::discrete(3)), Error);
}

TEST_CASE("generator balance agrees with the all-elements oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const auto net = acceptance::random_network(rng, 5, 3);
    Monoid m;
    try {
      m = monoid_closure(net, 3000);
    } catch (const CapacityExceeded&) {
      continue;
    }
    std::vector<std::uint32_t> labels(net.cell_count());
    for (int draw = 0; draw < 20; ++draw) {
      for (auto& l : labels) l = static_cast<std::uint32_t>(rng() % 3);
      const Partition p(labels);
      CHECK(is_balanced(net, p) == is_balanced_all_elements(m, p));
    }
  }
}

TEST_CASE("balanced partition enumeration") {
  SUBCASE("R_{1,1}: discrete and synchronous only") {
    const auto ps = enumerate_balanced_partitions(make_ring_ff(1, 1));
    CHECK(ps.size() == 2);
    CHECK(contains(ps, Partition::discrete(2)));
    CHECK(contains(ps, Partition::synchronous(2)));
  }
  SUBCASE("figure-2 includes the block partition") {
    const auto net = acceptance::figure2_network();
    const auto ps = enumerate_balanced_partitions(net);
    CHECK(contains(ps, classes(4, {{0}, {1}, {2, 3}})));
    CHECK(contains(ps, Partition::discrete(4)));
    CHECK(contains(ps, Partition::synchronous(4)));
    for (const auto& p : ps) CHECK(is_balanced(net, p));
  }
  SUBCASE("capacity") {
    CHECK_THROWS_AS(enumerate_balanced_partitions(make_ring_ff(6, 6), 10), CapacityExceeded);
  }
}

TEST_CASE("quotient networks") {
  SUBCASE("figure-2 modulo {3,4} is R_{1,2}") {
    const auto net = acceptance::figure2_network();
    const auto q = quotient_network(net, monoid_closure(net), classes(4, {{0}, {1}, {2, 3}}));
    CHECK(find_isomorphism(q.quotient_net, make_ring_ff(1, 2)).has_value());
  }
  SUBCASE("discrete partition: a copy with bijective projection") {
    const auto net = acceptance::figure2_network();
    const auto m = monoid_closure(net);
    const auto q = quotient_network(net, m, Partition::discrete(4));
    CHECK(find_isomorphism(q.quotient_net, net).has_value());
    auto proj = q.projection;
    std::sort(proj.begin(), proj.end());
    CHECK(std::adjacent_find(proj.begin(), proj.end()) == proj.end());
    CHECK(q.quotient_monoid.size() == m.size());
  }
  SUBCASE("unbalanced partition is rejected") {
    const auto net = acceptance::figure2_network();
    CHECK_THROWS_AS(quotient_network(net, monoid_closure(net), classes(4, {{0, 1}, {2}, {3}})),
                    Error);
  }
  SUBCASE("R_{n,k} modulo its block is R_{1,k}") {
    for (std::size_t n = 1; n <= 5; ++n)
      for (std::size_t k = 1; k <= 5; ++k) {
        const auto net = make_ring_ff(n, k);
        std::vector<CellIndex> ring;
        for (std::size_t i = k; i < n + k; ++i) ring.push_back(static_cast<CellIndex>(i));
        const auto p = block_partition(net, Block{ring, {}, {}});
        const auto q = quotient_network(net, monoid_closure(net), p);
        CHECK(find_isomorphism(q.quotient_net, make_ring_ff(1, k)).has_value());
      }
  }
}

TEST_CASE("the projection is a surjective homomorphism") {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 25; ++trial) {
    const auto net = acceptance::random_network(rng, 5, 2);
    Monoid m;
    try {
      m = monoid_closure(net, 500);
    } catch (const CapacityExceeded&) {
      continue;
    }
    for (const auto& p : enumerate_balanced_partitions(net)) {
      const auto q = quotient_network(net, m, p);
      const auto& qm = q.quotient_monoid;
      CHECK(q.projection[0] == 0);
      std::vector<char> hit(qm.size(), 0);
      for (std::size_t i = 0; i < m.size(); ++i) {
        hit[q.projection[i]] = 1;
        for (std::size_t j = 0; j < m.size(); ++j)
          CHECK(q.projection[m.product(static_cast<ElementIndex>(i), static_cast<ElementIndex>(j))] ==
                qm.product(q.projection[i], q.projection[j]));
      }
      CHECK(std::all_of(hit.begin(), hit.end(), [](char h) { return h != 0; }));
    }
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("blocks") {
  SUBCASE("R_{1,3}: exactly the suffix chains") {
    const auto blocks = find_blocks(make_ring_ff(1, 3));
    std::vector<std::vector<CellIndex>> members;
    for (const auto& b : blocks) members.push_back(b.members);
    CHECK(members == std::vector<std::vector<CellIndex>>{{3}, {2, 3}, {1, 2, 3}, {0, 1, 2, 3}});
  }
  SUBCASE("rings contain their ring block and C") {
    const auto net = make_ring_ff(3, 2);
    const auto blocks = find_blocks(net);
    auto has = [&](std::vector<CellIndex> v) {
      return std::any_of(blocks.begin(), blocks.end(), [&](const Block& b) { return b.members == v; });
    };
    CHECK(has({2, 3, 4}));
    CHECK(has({0, 1, 2, 3, 4}));
    for (const auto& b : blocks) CHECK(is_block(net, b.members));
  }
}

TEST_CASE("projection blocks") {
  SUBCASE("R_{2,2} with B = {c2, c3}: ι = s^2") {
    const auto net = make_ring_ff(2, 2);
    const auto m = monoid_closure(net);
    const auto pb = is_projection_block(net, m, Block{{2, 3}, {}, {}});
    REQUIRE(pb.has_value());
    REQUIRE(pb->idempotent.has_value());
    CHECK(m.word_string(*pb->idempotent) == "s^2");
    CHECK(brute_force_projection_block(m, Block{{2, 3}, {}, {}}).has_value());
  }
  SUBCASE("B = C: κ = ι = id") {
    const auto net = acceptance::figure2_network();
    const auto m = monoid_closure(net);
    const Block all{{0, 1, 2, 3}, {}, {}};
    const auto pb = is_projection_block(net, m, all);
    REQUIRE(pb.has_value());
    CHECK(pb->idempotent == ElementIndex{0});
    CHECK(brute_force_projection_block(m, all) == ElementIndex{0});
  }
  SUBCASE("negative example") {
    const auto net = negative_example();
    const auto m = monoid_closure(net);
    const Block b{{1, 2}, {}, {}};
    REQUIRE(is_block(net, b.members));
    CHECK_FALSE(is_projection_block(net, m, b).has_value());
    CHECK_FALSE(brute_force_projection_block(m, b).has_value());
  }
  SUBCASE("non-block input is rejected") {
    const auto net = make_ring_ff(2, 2);
    CHECK_THROWS_AS(is_projection_block(net, monoid_closure(net), Block{{0}, {}, {}}), Error);
  }
  SUBCASE("agreement with brute force on random networks") {
    std::mt19937_64 rng(8);
    int networks = 0;
    while (networks < 200) {
      const auto net = acceptance::random_network(rng, 7, 3);
      Monoid m;
      try {
        m = monoid_closure(net, 5000);
      } catch (const CapacityExceeded&) {
        continue;
      }
      ++networks;
      for (const auto& b : find_blocks(net)) {
        const auto pb = is_projection_block(net, m, b);
        CHECK(pb.has_value() == brute_force_projection_block(m, b).has_value());
        if (!pb) continue;
        REQUIRE(pb->idempotent.has_value());
        const auto iota = *pb->idempotent;
        CHECK(m.product(iota, iota) == iota);
        CHECK(m.element(iota).image() == b.members);
        for (auto x : b.members) CHECK(m.element(iota)[x] == x);
        REQUIRE(pb->witness_kappa.has_value());
        CHECK(m.element(*pb->witness_kappa).image() == b.members);
      }
    }
  }
}

TEST_CASE("idempotent powers") {
  const auto m = monoid_closure(make_ring_ff(2, 3));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto e = idempotent_power(m, static_cast<ElementIndex>(i));
    CHECK(m.product(e, e) == e);
  }
}

TEST_CASE("block partitions") {
  CHECK(block_partition(make_ring_ff(2, 2), Block{{2, 3}, {}, {}}) == classes(4, {{0}, {1}, {2, 3}}));
  CHECK(block_partition(make_ring_ff(2, 2), Block{{0, 1, 2, 3}, {}, {}}) == Partition::synchronous(4));
  CHECK(block_partition(make_ring_ff(3, 2), Block{{2, 3, 4}, {}, {}}) ==
        classes(5, {{0}, {1}, {2, 3, 4}}));
  const auto net = make_ring_ff(3, 2);
  for (const auto& b : find_blocks(net)) CHECK(is_balanced(net, block_partition(net, b)));
}
