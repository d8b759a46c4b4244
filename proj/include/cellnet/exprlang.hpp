#pragma once

// Response-function expressions f(x1, ..., xn, lambda):
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := atom ('^' uint)?
//   atom   := number | 'lambda' | 'x' uint | '(' expr ')' | '-' atom
//
// Note that '-' is an atom prefix, so "-x1^2" is (-x1)^2. Variables start
// at x1; x_j is bound to the j-th monoid element in canonical order.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellnet/error.hpp"

namespace cellnet::expr {

enum class Op : std::uint8_t { kNumber, kLambda, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::kNumber;
  double value = 0.0;      // kNumber
  std::uint32_t index = 0;  // kVar: j >= 1; kPow: exponent
  NodePtr lhs;              // unary operand / left operand / power base
  NodePtr rhs;
  SourceSpan span;
};

NodePtr number(double v, SourceSpan span = {});
NodePtr lambda(SourceSpan span = {});
NodePtr var(std::uint32_t j, SourceSpan span = {});
NodePtr neg(NodePtr a, SourceSpan span = {});
NodePtr binary(Op op, NodePtr a, NodePtr b, SourceSpan span = {});
NodePtr power(NodePtr base, std::uint32_t exponent, SourceSpan span = {});

/// Structural equality ignoring spans.
bool equal(const NodePtr& a, const NodePtr& b);

class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root);

  const NodePtr& root() const noexcept { return root_; }
  /// Highest referenced variable index (0 when none).
  std::uint32_t arity() const noexcept { return arity_; }
  bool uses_lambda() const noexcept { return uses_lambda_; }

  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b) { return equal(a.root_, b.root_); }

 private:
  NodePtr root_;
  std::uint32_t arity_ = 0;
  bool uses_lambda_ = false;
};

/// Throws ParseError with the offending span.
Expr parse(std::string_view text);

std::string print(const NodePtr& n);

/// Tree-walking evaluation; throws EvalError on division by zero or when x
/// is shorter than the arity.
double evaluate(const Expr& e, std::span<const double> x, double lambda);

/// Symbolic ∂e/∂x_j, simplified.
Expr partial(const Expr& e, std::uint32_t j);
/// ∂e/∂lambda, simplified.
Expr partial_lambda(const Expr& e);

/// Constant folding plus 0/1 elimination.
Expr simplify(const Expr& e);

/// Replaces x_j by x_{mapping[j-1]} (1-based targets).
Expr rename_variables(const Expr& e, const std::vector<std::uint32_t>& mapping);

/// Flat stack program for fast repeated evaluation.
class Compiled {
 public:
  Compiled() = default;
  explicit Compiled(const Expr& e);

  std::uint32_t arity() const noexcept { return arity_; }
  /// x[j-1] is x_j. Throws EvalError on division by zero.
  double operator()(std::span<const double> x, double lambda) const;
  /// Variant reading x_j from values[inputs[j-1]].
  double eval_indirect(const double* values, const std::uint32_t* inputs, double lambda) const;

 private:
  struct Instr {
    Op op;
    std::uint32_t index;
    double value;
    SourceSpan span;
  };
  std::vector<Instr> code_;
  std::uint32_t arity_ = 0;
  std::size_t max_stack_ = 0;
};

}  // namespace cellnet::expr
