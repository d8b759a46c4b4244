#include "cellnet/quotient.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

#include "cellnet/error.hpp"

namespace cellnet {

Partition::Partition(std::vector<std::uint32_t> class_of) {
  std::unordered_map<std::uint32_t, std::uint32_t> renumber;
  class_of_.reserve(class_of.size());
  for (auto c : class_of) {
    auto [it, inserted] = renumber.emplace(c, static_cast<std::uint32_t>(renumber.size()));
    class_of_.push_back(it->second);
  }
  class_count_ = renumber.size();
}

Partition Partition::discrete(std::size_t n) {
  std::vector<std::uint32_t> c(n);
  for (std::size_t q = 0; q < n; ++q) c[q] = static_cast<std::uint32_t>(q);
  return Partition(std::move(c));
}

Partition Partition::synchronous(std::size_t n) {
  return Partition(std::vector<std::uint32_t>(n, 0));
}

Partition Partition::from_classes(std::size_t n,
                                  const std::vector<std::vector<CellIndex>>& classes) {
  constexpr auto kUnset = ~std::uint32_t{0};
  std::vector<std::uint32_t> c(n, kUnset);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    require(!classes[k].empty(), "partition has an empty class");
    for (CellIndex q : classes[k]) {
      require(q < n, "partition refers to cell " + std::to_string(q) + " out of range");
      require(c[q] == kUnset, "cell " + std::to_string(q) + " appears in two classes");
      c[q] = static_cast<std::uint32_t>(k);
    }
  }
  for (std::size_t q = 0; q < n; ++q)
    require(c[q] != kUnset, "partition does not cover cell " + std::to_string(q));
  return Partition(std::move(c));
}

std::vector<std::vector<CellIndex>> Partition::classes() const {
  std::vector<std::vector<CellIndex>> out(class_count_);
  for (std::size_t q = 0; q < class_of_.size(); ++q)
    out[class_of_[q]].push_back(static_cast<CellIndex>(q));
  return out;
}

namespace {

bool respects(const CellMap& map, const Partition& p) {
  // For each class, the image class of its first member must match all others.
  std::vector<std::uint32_t> image_class(p.class_count(), ~std::uint32_t{0});
  for (std::size_t q = 0; q < p.size(); ++q) {
    const auto cls = p.class_of(q);
    const auto target = p.class_of(map[q]);
    if (image_class[cls] == ~std::uint32_t{0}) {
      image_class[cls] = target;
    } else if (image_class[cls] != target) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool is_balanced(const NetworkSpec& net, const Partition& p) {
  require(p.size() == net.cell_count(), "partition covers " + std::to_string(p.size()) +
                                            " cells but network has " +
                                            std::to_string(net.cell_count()));
  for (const auto& g : net.generators())
    if (!respects(g.map, p)) return false;
  return true;
}

bool is_balanced_all_elements(const Monoid& m, const Partition& p) {
  require(p.size() == m.degree(), "partition/monoid size mismatch");
  for (const auto& e : m.elements())
    if (!respects(e, p)) return false;
  return true;
}

std::vector<Partition> enumerate_balanced_partitions(const NetworkSpec& net,
                                                     std::size_t max_cells) {
  const std::size_t n = net.cell_count();
  if (n > max_cells) {
    throw CapacityExceeded("partition enumeration limited to " + std::to_string(max_cells) +
                               " cells, network has " + std::to_string(n),
                           0);
  }
  std::vector<Partition> out;
  // Restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1]).
  std::vector<std::uint32_t> a(n, 0), prefix_max(n, 0);
  while (true) {
    Partition p(a);
    if (is_balanced(net, p)) out.push_back(std::move(p));
    std::size_t i = n;
    while (i-- > 1) {
      if (a[i] <= prefix_max[i - 1]) {
        ++a[i];
        prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
          a[j] = 0;
          prefix_max[j] = prefix_max[j - 1];
        }
        break;
      }
    }
    if (i == 0 || i > n) break;
  }
  return out;
}

namespace {

CellMap induced_class_map(const CellMap& map, const Partition& p,
                          const std::vector<CellIndex>& representative) {
  std::vector<CellIndex> t(p.class_count());
  for (std::size_t c = 0; c < p.class_count(); ++c)
    t[c] = p.class_of(map[representative[c]]);
  return CellMap(std::move(t));
}

}  // namespace

QuotientResult quotient_network(const NetworkSpec& net, const Monoid& m, const Partition& p) {
  require(is_balanced(net, p), "quotient_network: partition is not balanced");
  require(m.degree() == net.cell_count(), "monoid does not act on this network's cells");

  const auto classes = p.classes();
  std::vector<CellIndex> representative;
  std::vector<std::string> labels;
  for (const auto& cls : classes) {
    representative.push_back(cls.front());
    if (cls.size() == 1) {
      labels.push_back(net.label(cls.front()));
    } else {
      std::string l = "{";
      for (std::size_t i = 0; i < cls.size(); ++i) {
        if (i) l += ',';
        l += net.label(cls[i]);
      }
      labels.push_back(l + "}");
    }
  }
  std::vector<Generator> gens;
  for (const auto& g : net.generators())
    gens.push_back({g.name, induced_class_map(g.map, p, representative)});

  NetworkSpec qnet(std::move(labels), std::move(gens));
  Monoid qm = monoid_closure(qnet);

  std::vector<ElementIndex> projection(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto found = qm.find(induced_class_map(m.element(static_cast<ElementIndex>(i)), p,
                                           representative));
    if (!found) fail(ErrorKind::kInternalError, "induced class map missing from quotient monoid");
    projection[i] = *found;
  }
  // π(i∘g) = π(i)∘[g] for every element and generator implies the full
  // homomorphism property by induction on word length.
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t g = 0; g < m.generator_count(); ++g) {
      const auto lhs = projection[m.right_multiply(static_cast<ElementIndex>(i), g)];
      const auto rhs = qm.right_multiply(projection[i], g);
      if (lhs != rhs) fail(ErrorKind::kInternalError, "π_P is not a monoid homomorphism");
    }
  }
  if (projection[0] != 0) fail(ErrorKind::kInternalError, "π_P does not fix the identity");

  return QuotientResult{p, std::move(qnet), std::move(projection), std::move(qm)};
}

bool is_block(const NetworkSpec& net, const std::vector<CellIndex>& members) {
  if (members.empty()) return false;
  std::vector<char> in(net.cell_count(), 0);
  for (CellIndex b : members) {
    if (b >= net.cell_count()) return false;
    in[b] = 1;
  }
  for (const auto& g : net.generators())
    for (CellIndex b : members)
      if (!in[g.map[b]]) return false;
  return true;
}

std::vector<Block> find_blocks(const NetworkSpec& net) {
  const std::size_t n = net.cell_count();
  if (n > 20) throw CapacityExceeded("block enumeration limited to 20 cells", 0);
  using Mask = std::uint32_t;

  std::vector<Mask> orbit_mask(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    Mask seen = Mask{1} << c;
    std::vector<CellIndex> stack{static_cast<CellIndex>(c)};
    while (!stack.empty()) {
      CellIndex q = stack.back();
      stack.pop_back();
      for (const auto& g : net.generators()) {
        CellIndex r = g.map[q];
        if (!(seen & (Mask{1} << r))) {
          seen |= Mask{1} << r;
          stack.push_back(r);
        }
      }
    }
    orbit_mask[c] = seen;
  }

  std::set<Mask> found(orbit_mask.begin(), orbit_mask.end());
  std::deque<Mask> frontier(found.begin(), found.end());
  while (!frontier.empty()) {
    Mask x = frontier.front();
    frontier.pop_front();
    for (std::size_t c = 0; c < n; ++c) {
      if (x & (Mask{1} << c)) continue;
      Mask y = x | orbit_mask[c];
      if (found.insert(y).second) frontier.push_back(y);
    }
  }

  std::vector<Block> out;
  for (Mask mask : found) {
    Block b;
    for (std::size_t c = 0; c < n; ++c)
      if (mask & (Mask{1} << c)) b.members.push_back(static_cast<CellIndex>(c));
    out.push_back(std::move(b));
  }
  std::sort(out.begin(), out.end(), [](const Block& a, const Block& b) {
    if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
    return a.members < b.members;
  });
  return out;
}

ElementIndex idempotent_power(const Monoid& m, ElementIndex element) {
  // Powers κ^1, κ^2, ... enter their cycle κ^M = κ^{M+N} within |Σ| steps;
  // κ^{sN} with sN >= M is then idempotent.
  std::vector<ElementIndex> powers{0, element};  // powers[e] = κ^e
  std::unordered_map<ElementIndex, std::size_t> first_seen{{element, 1}};
  std::size_t cycle_start = 0, period = 0;
  for (std::size_t e = 2; e <= m.size() + 1; ++e) {
    const ElementIndex next = m.product(powers.back(), element);
    powers.push_back(next);
    auto [it, inserted] = first_seen.emplace(next, e);
    if (!inserted) {
      cycle_start = it->second;
      period = e - it->second;
      break;
    }
  }
  if (period == 0) fail(ErrorKind::kInternalError, "power sequence did not cycle within |Σ| steps");
  const std::size_t s = (cycle_start + period - 1) / period;
  const ElementIndex iota = powers[s * period];
  if (m.product(iota, iota) != iota) fail(ErrorKind::kInternalError, "power is not idempotent");
  return iota;
}

std::optional<Block> is_projection_block(const NetworkSpec& net, const Monoid& m,
                                         const Block& b) {
  require(is_block(net, b.members), "is_projection_block: cell set is not a block");
  const std::size_t n = net.cell_count();
  std::vector<char> in_b(n, 0);
  for (CellIndex q : b.members) in_b[q] = 1;

  if (b.members.size() == n) {
    Block out = b;
    out.witness_kappa = 0;
    out.idempotent = 0;
    return out;
  }

  // Θ: generators restricting to a bijection of B.
  std::vector<std::size_t> theta;
  for (std::size_t g = 0; g < net.generators().size(); ++g) {
    const auto& map = net.generators()[g].map;
    std::vector<char> hit(n, 0);
    std::size_t image_size = 0;
    for (CellIndex q : b.members)
      if (!hit[map[q]]++) ++image_size;
    if (image_size == b.members.size()) theta.push_back(g);
  }
  if (theta.empty()) return std::nullopt;

  // Shortest Θ-word pushing each cell into B, by backward breadth-first search:
  // next_letter[q] is the generator to apply first from q.
  constexpr std::size_t kNone = ~std::size_t{0};
  std::vector<std::size_t> next_letter(n, kNone);
  std::vector<char> reaches(in_b);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t q = 0; q < n; ++q) {
      if (reaches[q]) continue;
      for (std::size_t g : theta) {
        if (reaches[net.generators()[g].map[q]]) {
          reaches[q] = 1;
          next_letter[q] = g;
          changed = true;
          break;
        }
      }
    }
  }
  for (std::size_t q = 0; q < n; ++q)
    if (!reaches[q]) return std::nullopt;

  auto word_into_block = [&](CellIndex q) {
    // Returns the cell map of the Θ-word that sends q into B.
    CellMap w = CellMap::identity(n);
    CellIndex cur = q;
    while (!in_b[cur]) {
      const auto& map = net.generators()[next_letter[cur]].map;
      w = compose(map, w);
      cur = map[cur];
    }
    return w;
  };

  CellMap kappa = CellMap::identity(n);
  while (true) {
    std::optional<CellIndex> outside;
    for (CellIndex q : kappa.image()) {
      if (!in_b[q]) {
        outside = q;
        break;
      }
    }
    if (!outside) break;
    kappa = compose(word_into_block(*outside), kappa);
  }

  auto kappa_index = m.find(kappa);
  if (!kappa_index) fail(ErrorKind::kInternalError, "constructed κ is not a monoid element");
  const ElementIndex iota = idempotent_power(m, *kappa_index);

  const CellMap& iota_map = m.element(iota);
  if (iota_map.image() != b.members)
    fail(ErrorKind::kInternalError, "idempotent image differs from the block");
  for (CellIndex q : b.members)
    if (iota_map[q] != q) fail(ErrorKind::kInternalError, "idempotent does not fix the block");

  Block out = b;
  out.witness_kappa = *kappa_index;
  out.idempotent = iota;
  return out;
}

std::optional<ElementIndex> brute_force_projection_block(const Monoid& m, const Block& b) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    const CellMap& k = m.element(static_cast<ElementIndex>(i));
    if (k.image() != b.members) continue;
    std::vector<CellIndex> on_b;
    for (CellIndex q : b.members) on_b.push_back(k[q]);
    std::sort(on_b.begin(), on_b.end());
    on_b.erase(std::unique(on_b.begin(), on_b.end()), on_b.end());
    if (on_b == b.members) return static_cast<ElementIndex>(i);
  }
  return std::nullopt;
}

Partition block_partition(const NetworkSpec& net, const Block& b) {
  require(is_block(net, b.members), "block_partition: cell set is not a block");
  const std::size_t n = net.cell_count();
  std::vector<std::uint32_t> c(n);
  const auto block_label = static_cast<std::uint32_t>(n);
  for (std::size_t q = 0; q < n; ++q) c[q] = static_cast<std::uint32_t>(q);
  for (CellIndex q : b.members) c[q] = block_label;
  return Partition(std::move(c));
}

}  // namespace cellnet
