#pragma once

// Homogeneous coupled cell networks: cell maps, network specifications, the
// interaction monoid generated by the wiring maps, and fundamental networks.
//
// Composition convention, used everywhere in the library:
//   compose(a, b) = a∘b, i.e. b is applied first: (a∘b)(q) = a(b(q)).
//   Monoid::product(i, j) = element(i)∘element(j).
// A generator word (w_1, ..., w_m) denotes g_{w_1}∘g_{w_2}∘...∘g_{w_m}.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cellnet {

using CellIndex = std::uint32_t;
using ElementIndex = std::uint32_t;
using Word = std::vector<std::uint32_t>;

inline constexpr std::size_t kDefaultClosureCap = 100000;

/// Monoids up to this size get their full Cayley table at closure time.
/// Larger monoids answer product() by composing and looking the result up.
inline constexpr std::size_t kEagerCayleyLimit = 4096;

/// A total function on the cell set {0, ..., N-1}; entry q is the image of q.
class CellMap {
 public:
  CellMap() = default;
  explicit CellMap(std::vector<CellIndex> table);

  static CellMap identity(std::size_t n);

  std::size_t size() const noexcept { return table_.size(); }
  CellIndex operator[](std::size_t q) const { return table_[q]; }
  std::span<const CellIndex> table() const noexcept { return table_; }

  /// Sorted distinct images.
  std::vector<CellIndex> image() const;
  bool is_identity() const;

  friend bool operator==(const CellMap&, const CellMap&) = default;
  friend auto operator<=>(const CellMap&, const CellMap&) = default;

 private:
  std::vector<CellIndex> table_;
};

struct CellMapHash {
  std::size_t operator()(const CellMap& m) const noexcept;
};

/// a∘b (b first). Throws invalid-input on size mismatch.
CellMap compose(const CellMap& a, const CellMap& b);

struct Generator {
  std::string name;
  CellMap map;
};

/// Cells plus named generator maps. Validated on construction: at least one
/// generator, unique labels and names, every map total on the cell set.
class NetworkSpec {
 public:
  NetworkSpec(std::vector<std::string> cells, std::vector<Generator> generators);

  std::size_t cell_count() const noexcept { return cells_.size(); }
  const std::vector<std::string>& cells() const noexcept { return cells_; }
  const std::vector<Generator>& generators() const noexcept { return generators_; }
  const std::string& label(CellIndex q) const { return cells_.at(q); }

  std::optional<CellIndex> find_cell(std::string_view label) const;
  /// Throws invalid-input for unknown labels.
  CellIndex cell(std::string_view label) const;

 private:
  std::vector<std::string> cells_;
  std::vector<Generator> generators_;
};

/// Dense element-by-element product table, row-major: at(i, j) = i∘j.
struct CayleyTable {
  std::size_t n = 0;
  std::vector<ElementIndex> data;

  ElementIndex at(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  ElementIndex& at(std::size_t i, std::size_t j) { return data[i * n + j]; }
  friend bool operator==(const CayleyTable&, const CayleyTable&) = default;
};

/// The composition closure of a network's generators together with the
/// identity. Elements are in canonical order: identity first, then
/// breadth-first by word length, ties broken by shortlex order of words
/// (letters ordered by generator declaration). Immutable once built.
class Monoid {
 public:
  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t degree() const noexcept { return degree_; }
  std::size_t generator_count() const noexcept { return generator_names_.size(); }
  const std::vector<std::string>& generator_names() const noexcept {
    return generator_names_;
  }

  const CellMap& element(ElementIndex i) const { return elements_.at(i); }
  const std::vector<CellMap>& elements() const noexcept { return elements_; }
  const Word& word(ElementIndex i) const { return words_.at(i); }
  std::string word_string(ElementIndex i) const;

  /// Element index of generator g.
  ElementIndex generator_element(std::size_t g) const { return generator_elements_.at(g); }
  /// element(i)∘generator g.
  ElementIndex right_multiply(ElementIndex i, std::size_t g) const {
    return right_[i * generator_count() + g];
  }
  /// Parent in the breadth-first tree: element(i) = element(parent(i))∘g_{last_letter(i)}.
  ElementIndex parent(ElementIndex i) const { return parent_.at(i); }
  std::uint32_t last_letter(ElementIndex i) const { return last_letter_.at(i); }

  ElementIndex product(ElementIndex i, ElementIndex j) const;
  std::optional<ElementIndex> find(const CellMap& m) const;

  bool has_cayley() const noexcept { return cayley_.n != 0; }
  /// Throws invalid-input when the table was not materialized.
  const CayleyTable& cayley() const;

 private:
  friend Monoid monoid_closure(const NetworkSpec&, std::size_t);

  std::size_t degree_ = 0;
  std::vector<std::string> generator_names_;
  std::vector<CellMap> elements_;
  std::vector<Word> words_;
  std::vector<ElementIndex> parent_;
  std::vector<std::uint32_t> last_letter_;
  std::vector<ElementIndex> generator_elements_;
  std::vector<ElementIndex> right_;
  std::unordered_map<CellMap, ElementIndex, CellMapHash> index_;
  CayleyTable cayley_;
};

/// Throws CapacityExceeded (reporting the partial size) when the closure
/// grows beyond cap elements.
Monoid monoid_closure(const NetworkSpec& net, std::size_t cap = kDefaultClosureCap);

/// All p with {σ(p) : σ ∈ Σ} = C.
std::vector<CellIndex> fully_dependent_cells(const NetworkSpec& net, const Monoid& m);

/// Orbit {σ(p) : σ ∈ Σ}, sorted.
std::vector<CellIndex> orbit(const Monoid& m, CellIndex p);

/// Cells are the monoid elements (labelled by their words); generator g sends
/// τ to g∘τ.
NetworkSpec fundamental_network(const Monoid& m);

/// R_{n,k}: cells c_0..c_{n+k-1}, one generator "s" with s(c_i) = c_{i+1} and
/// s(c_{n+k-1}) = c_k.
NetworkSpec make_ring_ff(std::size_t n, std::size_t k);

/// A bijection phi on cells with phi(g_a(q)) = g_b(phi(q)) for every
/// generator position g, or nullopt. Generators are matched by position.
std::optional<std::vector<CellIndex>> find_isomorphism(const NetworkSpec& a,
                                                       const NetworkSpec& b);

}  // namespace cellnet
