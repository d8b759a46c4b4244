#include "cellnet/netcore.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "cellnet/error.hpp"
#include "cellnet/kernels.hpp"

namespace cellnet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kCapacityExceeded: return "capacity-exceeded";
    case ErrorKind::kNumericFailure: return "numeric-failure";
    case ErrorKind::kInternalError: return "internal-error";
    case ErrorKind::kTheoremViolation: return "theorem-violation";
    case ErrorKind::kParseError: return "parse-error";
    case ErrorKind::kEvalError: return "eval-error";
  }
  return "unknown";
}

CellMap::CellMap(std::vector<CellIndex> table) : table_(std::move(table)) {
  for (CellIndex v : table_) {
    require(v < table_.size(), "cell map entry " + std::to_string(v) +
                                   " out of range for " +
                                   std::to_string(table_.size()) + " cells");
  }
}

CellMap CellMap::identity(std::size_t n) {
  std::vector<CellIndex> t(n);
  std::iota(t.begin(), t.end(), CellIndex{0});
  return CellMap(std::move(t));
}

std::vector<CellIndex> CellMap::image() const {
  std::vector<CellIndex> out(table_.begin(), table_.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool CellMap::is_identity() const {
  for (std::size_t q = 0; q < table_.size(); ++q)
    if (table_[q] != q) return false;
  return true;
}

std::size_t CellMapHash::operator()(const CellMap& m) const noexcept {
  // FNV-1a over the entries.
  std::uint64_t h = 1469598103934665603ull;
  for (CellIndex v : m.table()) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

CellMap compose(const CellMap& a, const CellMap& b) {
  require(a.size() == b.size(), "compose: cell maps of different size (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
  std::vector<CellIndex> t(b.size());
  for (std::size_t q = 0; q < b.size(); ++q) t[q] = a[b[q]];
  return CellMap(std::move(t));
}

NetworkSpec::NetworkSpec(std::vector<std::string> cells, std::vector<Generator> generators)
    : cells_(std::move(cells)), generators_(std::move(generators)) {
  require(!cells_.empty(), "network needs at least one cell");
  require(!generators_.empty(), "network needs at least one generator");
  std::set<std::string> seen;
  for (const auto& c : cells_) {
    require(!c.empty(), "empty cell label");
    require(seen.insert(c).second, "duplicate cell label '" + c + "'");
  }
  seen.clear();
  for (const auto& g : generators_) {
    require(!g.name.empty(), "empty generator name");
    require(seen.insert(g.name).second, "duplicate generator name '" + g.name + "'");
    require(g.map.size() == cells_.size(),
            "generator '" + g.name + "' is not total on the cell set");
  }
}

std::optional<CellIndex> NetworkSpec::find_cell(std::string_view label) const {
  for (std::size_t q = 0; q < cells_.size(); ++q)
    if (cells_[q] == label) return static_cast<CellIndex>(q);
  return std::nullopt;
}

CellIndex NetworkSpec::cell(std::string_view label) const {
  auto q = find_cell(label);
  require(q.has_value(), "unknown cell '" + std::string(label) + "'");
  return *q;
}

std::string Monoid::word_string(ElementIndex i) const {
  const Word& w = word(i);
  if (w.empty()) return "id";
  std::ostringstream os;
  std::size_t pos = 0;
  bool first = true;
  while (pos < w.size()) {
    std::size_t run = 1;
    while (pos + run < w.size() && w[pos + run] == w[pos]) ++run;
    if (!first) os << '.';
    os << generator_names_[w[pos]];
    if (run > 1) os << '^' << run;
    first = false;
    pos += run;
  }
  return os.str();
}

ElementIndex Monoid::product(ElementIndex i, ElementIndex j) const {
  if (has_cayley()) return cayley_.at(i, j);
  auto found = find(compose(element(i), element(j)));
  if (!found) fail(ErrorKind::kInternalError, "monoid not closed under composition");
  return *found;
}

std::optional<ElementIndex> Monoid::find(const CellMap& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const CayleyTable& Monoid::cayley() const {
  require(has_cayley(), "Cayley table not materialized for monoid of size " +
                            std::to_string(size()));
  return cayley_;
}

Monoid monoid_closure(const NetworkSpec& net, std::size_t cap) {
  require(cap >= 1, "closure cap must be positive");
  const std::size_t n_cells = net.cell_count();
  const std::size_t n_gen = net.generators().size();

  Monoid m;
  m.degree_ = n_cells;
  for (const auto& g : net.generators()) m.generator_names_.push_back(g.name);

  auto add = [&](CellMap map, Word w, ElementIndex parent, std::uint32_t letter) {
    const auto idx = static_cast<ElementIndex>(m.elements_.size());
    m.index_.emplace(map, idx);
    m.elements_.push_back(std::move(map));
    m.words_.push_back(std::move(w));
    m.parent_.push_back(parent);
    m.last_letter_.push_back(letter);
    return idx;
  };
  add(CellMap::identity(n_cells), {}, 0, 0);

  // Breadth-first over right multiplication; queue order equals canonical order.
  for (std::size_t x = 0; x < m.elements_.size(); ++x) {
    for (std::size_t g = 0; g < n_gen; ++g) {
      CellMap y = compose(m.elements_[x], net.generators()[g].map);
      auto it = m.index_.find(y);
      ElementIndex yi;
      if (it != m.index_.end()) {
        yi = it->second;
      } else {
        if (m.elements_.size() >= cap) {
          throw CapacityExceeded("monoid closure exceeded cap of " + std::to_string(cap) +
                                     " elements",
                                 m.elements_.size());
        }
        Word w = m.words_[x];
        w.push_back(static_cast<std::uint32_t>(g));
        yi = add(std::move(y), std::move(w), static_cast<ElementIndex>(x),
                 static_cast<std::uint32_t>(g));
      }
      m.right_.push_back(yi);
    }
  }
  for (std::size_t g = 0; g < n_gen; ++g) m.generator_elements_.push_back(m.right_[g]);

  if (m.size() <= kEagerCayleyLimit) m.cayley_ = kernels::cayley_table_parallel(m);
  return m;
}

std::vector<CellIndex> orbit(const Monoid& m, CellIndex p) {
  std::vector<char> hit(m.degree(), 0);
  for (const auto& e : m.elements()) hit[e[p]] = 1;
  std::vector<CellIndex> out;
  for (std::size_t q = 0; q < hit.size(); ++q)
    if (hit[q]) out.push_back(static_cast<CellIndex>(q));
  return out;
}

std::vector<CellIndex> fully_dependent_cells(const NetworkSpec& net, const Monoid& m) {
  require(net.cell_count() == m.degree(), "monoid does not act on this network's cells");
  std::vector<CellIndex> out;
  for (std::size_t p = 0; p < net.cell_count(); ++p)
    if (orbit(m, static_cast<CellIndex>(p)).size() == net.cell_count())
      out.push_back(static_cast<CellIndex>(p));
  return out;
}

NetworkSpec fundamental_network(const Monoid& m) {
  std::vector<std::string> cells;
  cells.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    cells.push_back(m.word_string(static_cast<ElementIndex>(i)));
  std::vector<Generator> gens;
  for (std::size_t g = 0; g < m.generator_count(); ++g) {
    const ElementIndex ge = m.generator_element(g);
    std::vector<CellIndex> t(m.size());
    for (std::size_t tau = 0; tau < m.size(); ++tau)
      t[tau] = m.product(ge, static_cast<ElementIndex>(tau));
    gens.push_back({m.generator_names()[g], CellMap(std::move(t))});
  }
  return NetworkSpec(std::move(cells), std::move(gens));
}

NetworkSpec make_ring_ff(std::size_t n, std::size_t k) {
  require(n >= 1 && k >= 1, "ring feed-forward network needs n >= 1 and k >= 1");
  const std::size_t total = n + k;
  std::vector<std::string> cells;
  std::vector<CellIndex> t(total);
  for (std::size_t i = 0; i < total; ++i) {
    cells.push_back("c" + std::to_string(i));
    t[i] = static_cast<CellIndex>(i + 1 < total ? i + 1 : k);
  }
  return NetworkSpec(std::move(cells), {{"s", CellMap(std::move(t))}});
}

namespace {

constexpr CellIndex kUnset = ~CellIndex{0};

bool assign(const NetworkSpec& a, const NetworkSpec& b, std::vector<CellIndex>& phi,
            std::vector<CellIndex>& inverse, CellIndex q, CellIndex r) {
  std::vector<std::pair<CellIndex, CellIndex>> work{{q, r}};
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    if (phi[x] != kUnset || inverse[y] != kUnset) {
      if (phi[x] != y || inverse[y] != x) return false;
      continue;
    }
    phi[x] = y;
    inverse[y] = x;
    for (std::size_t g = 0; g < a.generators().size(); ++g)
      work.emplace_back(a.generators()[g].map[x], b.generators()[g].map[y]);
  }
  return true;
}

bool search(const NetworkSpec& a, const NetworkSpec& b, std::vector<CellIndex>& phi,
            std::vector<CellIndex>& inverse) {
  auto next = std::find(phi.begin(), phi.end(), kUnset);
  if (next == phi.end()) return true;
  const auto q = static_cast<CellIndex>(next - phi.begin());
  for (std::size_t r = 0; r < b.cell_count(); ++r) {
    if (inverse[r] != kUnset) continue;
    auto phi_saved = phi;
    auto inv_saved = inverse;
    if (assign(a, b, phi, inverse, q, static_cast<CellIndex>(r)) && search(a, b, phi, inverse))
      return true;
    phi = std::move(phi_saved);
    inverse = std::move(inv_saved);
  }
  return false;
}

}  // namespace

std::optional<std::vector<CellIndex>> find_isomorphism(const NetworkSpec& a,
                                                       const NetworkSpec& b) {
  if (a.cell_count() != b.cell_count()) return std::nullopt;
  if (a.generators().size() != b.generators().size()) return std::nullopt;
  std::vector<CellIndex> phi(a.cell_count(), kUnset);
  std::vector<CellIndex> inverse(b.cell_count(), kUnset);
  if (!search(a, b, phi, inverse)) return std::nullopt;
  return phi;
}

}  // namespace cellnet
