#pragma once

// The regular representation of an interaction monoid on V^{|Σ|}, V = R^d:
//   (A_σ X)_τ = X_{τ∘σ},
// coordinates indexed as element * d + component. Synchrony subspaces,
// equivariant maps, and decomposition into indecomposable summands with a
// real/complex/quaternionic type.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cellnet/netcore.hpp"
#include "cellnet/polynomial.hpp"
#include "cellnet/quotient.hpp"
#include "cellnet/subspace.hpp"

namespace cellnet {

class RegularRep {
 public:
  RegularRep(const Monoid& m, std::size_t cell_dim = 1);
  // holds a pointer; a temporary monoid would dangle
  RegularRep(Monoid&&, std::size_t = 1) = delete;

  const Monoid& monoid() const noexcept { return *monoid_; }
  std::size_t cell_dim() const noexcept { return d_; }
  std::size_t dim() const noexcept { return monoid_->size() * d_; }

  /// (A_σ v)[τ d + c] = v[(τ∘σ) d + c].
  template <class T>
  std::vector<T> apply(ElementIndex sigma, const std::vector<T>& v) const {
    std::vector<T> out(v.size());
    const std::size_t n = monoid_->size();
    for (std::size_t tau = 0; tau < n; ++tau) {
      const std::size_t src = monoid_->product(static_cast<ElementIndex>(tau), sigma);
      for (std::size_t c = 0; c < d_; ++c) out[tau * d_ + c] = v[src * d_ + c];
    }
    return out;
  }

  QMatrix action_matrix(ElementIndex sigma) const;

  /// Element indices of the generators; their matrices generate the action.
  std::vector<ElementIndex> generator_elements() const;

  bool is_invariant(const Subspace& w) const;
  /// max over generators of ||(I - P_w) A_g U_w||, U_w orthonormal.
  double invariance_defect(const Subspace& w) const;

 private:
  const Monoid* monoid_;
  std::size_t d_;
};

/// {X_σ = X_τ whenever labels[σ] = labels[τ]} in V^{labels.size()}; the
/// classes are inflated by the cell dimension d.
Subspace synchrony_subspace(std::size_t d, const Partition& p);
Subspace synchrony_subspace(const RegularRep& rep, const Partition& p);

/// Elements partitioned by their value at p_cell.
Partition element_partition_at_cell(const Monoid& m, CellIndex p_cell);
Subspace syn_Np(const RegularRep& rep, CellIndex p_cell);

/// Matrices of the generators restricted to an invariant subspace, acting on
/// coordinate columns: a_g[:, j] = coords(A_g u_j).
std::vector<QMatrix> restricted_action(const RegularRep& rep, const Subspace& w);
std::vector<DMatrix> restricted_action_float(const RegularRep& rep, const Subspace& w);

/// Basis of {X : X a1_g = a2_g X for every g}; X has shape dim2 x dim1.
template <class T>
std::vector<Matrix<T>> intertwiners(const std::vector<Matrix<T>>& a1,
                                    const std::vector<Matrix<T>>& a2);

std::vector<QMatrix> commutant_basis(const RegularRep& rep, const Subspace& w);
/// Hom(w1, w2) as dim w2 x dim w1 matrices in the bases of w1 and w2.
std::vector<QMatrix> hom_basis(const RegularRep& rep, const Subspace& w1, const Subspace& w2);

struct IdempotentProjection {
  QMatrix matrix;  // (B X)_σ = X_{ι∘σ}
  Subspace image;
  Subspace kernel;
};

IdempotentProjection projection_from_idempotent(const RegularRep& rep, ElementIndex iota);

enum class FieldType { kReal, kComplex, kQuaternionic };
const char* to_string(FieldType t);

struct Certificate {
  bool indecomposable = true;
  /// Decomposable over R although no rational splitting exists.
  bool rational_irreducible = false;
  FieldType type = FieldType::kReal;
  bool exact = true;
  std::size_t end_dim = 0;
  std::size_t radical_dim = 0;
};

struct Summand {
  Subspace space;
  Certificate certificate;
};

struct Decomposition {
  std::size_t ambient_dim = 0;
  std::vector<Summand> summands;
};

enum class DecomposeMode { kExact, kHybrid };

/// Splitting by generalized eigenspaces of random commutant elements, with
/// certification of the leaves. In hybrid mode, summands that split over R
/// but not over Q are refined numerically and tagged float.
Decomposition decompose(const RegularRep& rep, const Subspace& w, std::uint64_t seed,
                        DecomposeMode mode = DecomposeMode::kHybrid);

/// Type classification via End(w) modulo its trace-form radical.
Certificate certify_indecomposable(const RegularRep& rep, const Subspace& w);

/// Works for exact and float subspaces.
bool iso_test(const RegularRep& rep, const Subspace& w1, const Subspace& w2,
              std::uint64_t seed = 0);

/// {W_i ∩ syn} for the nonzero intersections; checks they decompose syn.
Decomposition intersect_with_synchrony(const RegularRep& rep, const Decomposition& dec,
                                       const Subspace& syn);

struct IdentityCheck {
  std::string name;
  bool holds = false;
  std::size_t lhs_dim = 0;
  std::size_t rhs_dim = 0;
};

struct ProjectionBlockReport {
  std::vector<CellIndex> block;
  CellIndex cell = 0;
  std::size_t cell_dim = 1;
  ElementIndex idempotent = 0;
  std::size_t kernel_dim = 0;
  std::size_t image_dim = 0;
  std::vector<IdentityCheck> checks;
  bool all_hold() const;
};

/// Exact check of the splitting identities for a projection block:
///   W ∩ Syn_{N,p} = W ∩ Syn_{N_P,[p]},   W' ∩ Syn_{π_P} = Syn_0,
///   Syn_{N_P,[p]} ∩ Syn_{π_P} = Syn_P ∩ Syn_{N,p},
/// with W = ker B_ι, W' = im B_ι and P the block partition.
/// Throws invalid-input when B is not a projection block.
ProjectionBlockReport verify_projection_block_theorem(const NetworkSpec& net, const Monoid& m,
                                                      const Block& b, CellIndex p_cell,
                                                      std::size_t d);

/// Vectors on Σ_P pulled into V^{|Σ|} by X_σ = Y_{π(σ)}; rows of the result
/// are the images of the rows of `small`.
QMatrix embed_quotient_rows(const std::vector<ElementIndex>& projection, std::size_t d,
                            const QMatrix& small);

/// Lifts a linear equivariant map L of the quotient regular representation to
/// one of the big representation: with c_ρ the blocks of L's identity row and
/// σ_ρ the lowest element over ρ,
///   (L~ X)_τ = Σ_ρ c_ρ X_{σ_ρ∘τ}.
/// Throws invalid-input when L is not equivariant.
QMatrix lift_linear_equivariant(const RegularRep& big, const RegularRep& small,
                                const std::vector<ElementIndex>& projection,
                                const QMatrix& map_small);

}  // namespace cellnet
