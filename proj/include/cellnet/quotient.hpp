#pragma once

// Balanced partitions, quotient networks with their monoid projection, blocks
// and projection blocks.

#include <cstdint>
#include <optional>
#include <vector>

#include "cellnet/netcore.hpp"

namespace cellnet {

/// A partition of {0, ..., N-1}. Class indices are canonical: classes are
/// numbered in order of their smallest member, so equal partitions compare
/// equal.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<std::uint32_t> class_of);

  static Partition discrete(std::size_t n);
  static Partition synchronous(std::size_t n);
  /// Throws invalid-input unless the classes cover 0..n-1 exactly once.
  static Partition from_classes(std::size_t n, const std::vector<std::vector<CellIndex>>& classes);

  std::size_t size() const noexcept { return class_of_.size(); }
  std::size_t class_count() const noexcept { return class_count_; }
  std::uint32_t class_of(std::size_t q) const { return class_of_.at(q); }
  const std::vector<std::uint32_t>& labels() const noexcept { return class_of_; }
  std::vector<std::vector<CellIndex>> classes() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::uint32_t> class_of_;
  std::size_t class_count_ = 0;
};

/// Checks [q] = [r] ⇒ [σ(q)] = [σ(r)] for the generators only: balance under
/// σ and τ gives balance under σ∘τ, so the closure adds nothing.
bool is_balanced(const NetworkSpec& net, const Partition& p);

/// The same property checked against every monoid element (test oracle).
bool is_balanced_all_elements(const Monoid& m, const Partition& p);

/// Every balanced partition by exhaustive set-partition enumeration.
/// Throws CapacityExceeded when the network has more than max_cells cells.
std::vector<Partition> enumerate_balanced_partitions(const NetworkSpec& net,
                                                     std::size_t max_cells = 10);

struct QuotientResult {
  Partition partition;
  NetworkSpec quotient_net;
  /// π_P: source element index -> quotient monoid element index.
  std::vector<ElementIndex> projection;
  Monoid quotient_monoid;
};

/// Quotient by a balanced partition. quotient_net has one cell per class and
/// generator [σ]([q]) = [σ(q)]. Throws invalid-input for unbalanced p.
QuotientResult quotient_network(const NetworkSpec& net, const Monoid& m, const Partition& p);

struct Block {
  std::vector<CellIndex> members;  // sorted
  std::optional<ElementIndex> idempotent;
  std::optional<ElementIndex> witness_kappa;

  friend bool operator==(const Block&, const Block&) = default;
};

bool is_block(const NetworkSpec& net, const std::vector<CellIndex>& members);

/// All nonempty generator-closed cell subsets, ordered by size then by member
/// list. Every such set is a union of forward orbits. Limited to 20 cells.
std::vector<Block> find_blocks(const NetworkSpec& net);

/// Generator criterion: Θ = generators restricting to a bijection of B; B is a
/// projection block iff every cell reaches B along Θ-words. On success κ is
/// built greedily (each step composes a Θ-word that pushes one remaining
/// outside image point into B) and ι is the idempotent power of κ. Returns
/// nullopt when B is not a projection block; throws invalid-input when B is
/// not a block.
std::optional<Block> is_projection_block(const NetworkSpec& net, const Monoid& m,
                                         const Block& b);

/// Oracle: first element κ (canonical order) with κ(C) = B and κ(B) = B.
std::optional<ElementIndex> brute_force_projection_block(const Monoid& m, const Block& b);

/// The idempotent in the cyclic sub-semigroup generated by `element`.
ElementIndex idempotent_power(const Monoid& m, ElementIndex element);

/// One class equal to B, singletons elsewhere.
Partition block_partition(const NetworkSpec& net, const Block& b);

}  // namespace cellnet
