#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial reference that the
// unit tests compare against and bench/ times side by side.

#include "cellnet/netcore.hpp"

namespace cellnet::kernels {

/// Fills the Cayley table column by column in canonical order using
///   (i∘j) = right_multiply(i∘parent(j), last_letter(j)),
/// which only needs the right-multiplication graph. Rows are independent.
CayleyTable cayley_table_serial(const Monoid& m);
CayleyTable cayley_table_parallel(const Monoid& m);

/// Reference used by tests: every entry by explicit composition and lookup.
CayleyTable cayley_table_by_composition(const Monoid& m);

}  // namespace cellnet::kernels
