#include "cellnet/exprlang.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace cellnet::expr {

namespace {

NodePtr make(Op op, double value, std::uint32_t index, NodePtr lhs, NodePtr rhs, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->index = index;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->span = span;
  return n;
}

void scan(const NodePtr& n, std::uint32_t& arity, bool& uses_lambda) {
  if (!n) return;
  if (n->op == Op::kVar) arity = std::max(arity, n->index);
  if (n->op == Op::kLambda) uses_lambda = true;
  scan(n->lhs, arity, uses_lambda);
  scan(n->rhs, arity, uses_lambda);
}

}  // namespace

NodePtr number(double v, SourceSpan span) { return make(Op::kNumber, v, 0, nullptr, nullptr, span); }
NodePtr lambda(SourceSpan span) { return make(Op::kLambda, 0.0, 0, nullptr, nullptr, span); }
NodePtr var(std::uint32_t j, SourceSpan span) {
  require(j >= 1, "variables are numbered from x1");
  return make(Op::kVar, 0.0, j, nullptr, nullptr, span);
}
NodePtr neg(NodePtr a, SourceSpan span) { return make(Op::kNeg, 0.0, 0, std::move(a), nullptr, span); }
NodePtr binary(Op op, NodePtr a, NodePtr b, SourceSpan span) {
  return make(op, 0.0, 0, std::move(a), std::move(b), span);
}
NodePtr power(NodePtr base, std::uint32_t exponent, SourceSpan span) {
  return make(Op::kPow, 0.0, exponent, std::move(base), nullptr, span);
}

bool equal(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::kNumber: return a->value == b->value;
    case Op::kLambda: return true;
    case Op::kVar: return a->index == b->index;
    case Op::kNeg: return equal(a->lhs, b->lhs);
    case Op::kPow: return a->index == b->index && equal(a->lhs, b->lhs);
    default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
}

Expr::Expr(NodePtr root) : root_(std::move(root)) {
  require(root_ != nullptr, "empty expression");
  scan(root_, arity_, uses_lambda_);
}

std::string Expr::to_string() const { return print(root_); }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'", pos_, pos_ + 1);
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& msg, std::size_t b, std::size_t e) const {
    throw ParseError("parse error at " + std::to_string(b) + ": " + msg, {b, e});
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    const std::size_t start = (skip(), pos_);
    NodePtr lhs = term();
    while (true) {
      skip();
      if (pos_ >= s_.size() || (s_[pos_] != '+' && s_[pos_] != '-')) return lhs;
      const Op op = s_[pos_] == '+' ? Op::kAdd : Op::kSub;
      ++pos_;
      NodePtr rhs = term();
      lhs = binary(op, lhs, rhs, {start, pos_});
    }
  }

  NodePtr term() {
    const std::size_t start = (skip(), pos_);
    NodePtr lhs = factor();
    while (true) {
      skip();
      if (pos_ >= s_.size() || (s_[pos_] != '*' && s_[pos_] != '/')) return lhs;
      const Op op = s_[pos_] == '*' ? Op::kMul : Op::kDiv;
      ++pos_;
      NodePtr rhs = factor();
      lhs = binary(op, lhs, rhs, {start, pos_});
    }
  }

  NodePtr factor() {
    const std::size_t start = (skip(), pos_);
    NodePtr base = atom();
    if (!accept('^')) return base;
    skip();
    const std::size_t ebeg = pos_;
    if (pos_ < s_.size() && s_[pos_] == '-') error("negative exponents are not allowed", ebeg, ebeg + 1);
    const std::uint32_t e = uint_literal("exponent");
    return power(base, e, {start, pos_ > ebeg ? pos_ : ebeg});
  }

  std::uint32_t uint_literal(const char* what) {
    const std::size_t b = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == b) error(std::string("expected an unsigned integer ") + what, b, b + 1);
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(s_.data() + b, s_.data() + pos_, v);
    if (ec != std::errc() || p != s_.data() + pos_) error(std::string(what) + " out of range", b, pos_);
    return v;
  }

  NodePtr atom() {
    skip();
    const std::size_t b = pos_;
    if (pos_ >= s_.size()) error("unexpected end of input", b, b);
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      NodePtr a = atom();
      return neg(a, {b, pos_});
    }
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) error("expected ')'", pos_, pos_ + 1);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number_literal();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t e = pos_;
      while (e < s_.size() && std::isalpha(static_cast<unsigned char>(s_[e]))) ++e;
      const std::string_view word = s_.substr(pos_, e - pos_);
      if (word == "lambda") {
        pos_ = e;
        return lambda({b, pos_});
      }
      if (word == "x") {
        pos_ = e;
        const std::uint32_t j = uint_literal("variable index");
        if (j == 0) error("variables are numbered from x1", b, pos_);
        return var(j, {b, pos_});
      }
      error("unknown identifier '" + std::string(word) + "'", b, e);
    }
    error("unexpected '" + std::string(1, c) + "'", b, b + 1);
  }

  NodePtr number_literal() {
    const std::size_t b = pos_;
    std::size_t e = pos_;
    auto digits = [&] {
      const std::size_t d0 = e;
      while (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) ++e;
      return e - d0;
    };
    std::size_t n = digits();
    if (e < s_.size() && s_[e] == '.') {
      ++e;
      n += digits();
    }
    if (n == 0) error("malformed number", b, e);
    if (e < s_.size() && (s_[e] == 'e' || s_[e] == 'E')) {
      std::size_t save = e++;
      if (e < s_.size() && (s_[e] == '+' || s_[e] == '-')) ++e;
      if (digits() == 0) e = save;  // "2e" is 2 followed by junk
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(s_.data() + b, s_.data() + e, v);
    if (ec != std::errc() || p != s_.data() + e || !std::isfinite(v)) error("malformed number", b, e);
    pos_ = e;
    return number(v, {b, e});
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

int level(const NodePtr& n) {
  switch (n->op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kPow: return 3;
    default: return 4;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), p);
}

std::string wrap(const NodePtr& n, int min_level) {
  std::string s = print(n);
  return level(n) >= min_level ? s : "(" + s + ")";
}

}  // namespace

Expr parse(std::string_view text) { return Expr(Parser(text).parse_all()); }

std::string print(const NodePtr& n) {
  switch (n->op) {
    case Op::kNumber: return format_number(n->value);
    case Op::kLambda: return "lambda";
    case Op::kVar: return "x" + std::to_string(n->index);
    case Op::kNeg: return "-" + wrap(n->lhs, 4);
    case Op::kPow: return wrap(n->lhs, 4) + "^" + std::to_string(n->index);
    case Op::kAdd: return wrap(n->lhs, 1) + " + " + wrap(n->rhs, 2);
    case Op::kSub: return wrap(n->lhs, 1) + " - " + wrap(n->rhs, 2);
    case Op::kMul: return wrap(n->lhs, 2) + "*" + wrap(n->rhs, 3);
    case Op::kDiv: return wrap(n->lhs, 2) + "/" + wrap(n->rhs, 3);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const Node& n, std::span<const double> x, double lam) {
  switch (n.op) {
    case Op::kNumber: return n.value;
    case Op::kLambda: return lam;
    case Op::kVar:
      if (n.index > x.size())
        throw EvalError("x" + std::to_string(n.index) + " is not bound", n.span);
      return x[n.index - 1];
    case Op::kNeg: return -eval_node(*n.lhs, x, lam);
    case Op::kAdd: return eval_node(*n.lhs, x, lam) + eval_node(*n.rhs, x, lam);
    case Op::kSub: return eval_node(*n.lhs, x, lam) - eval_node(*n.rhs, x, lam);
    case Op::kMul: return eval_node(*n.lhs, x, lam) * eval_node(*n.rhs, x, lam);
    case Op::kDiv: {
      const double num = eval_node(*n.lhs, x, lam);
      const double den = eval_node(*n.rhs, x, lam);
      if (den == 0.0) throw EvalError("division by zero", n.span);
      return num / den;
    }
    case Op::kPow: {
      const double b = eval_node(*n.lhs, x, lam);
      double r = 1.0;
      for (std::uint32_t i = 0; i < n.index; ++i) r *= b;
      return r;
    }
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> x, double lambda) {
  return eval_node(*e.root(), x, lambda);
}

// ---------------------------------------------------------------------------
// Simplification and differentiation

namespace {

bool as_constant(const NodePtr& n, double& v) {
  if (n->op == Op::kNumber) {
    v = n->value;
    return true;
  }
  if (n->op == Op::kNeg && n->lhs->op == Op::kNumber) {
    v = -n->lhs->value;
    return true;
  }
  return false;
}

NodePtr constant(double v) {
  if (v < 0) return neg(number(-v));
  return number(v == 0.0 ? 0.0 : v);  // no signed zeros
}

NodePtr simp(const NodePtr& n) {
  switch (n->op) {
    case Op::kNumber:
      return n->value < 0 ? constant(n->value) : n;
    case Op::kLambda:
    case Op::kVar: return n;
    case Op::kNeg: {
      NodePtr a = simp(n->lhs);
      double v;
      if (as_constant(a, v)) return constant(-v);
      if (a->op == Op::kNeg) return a->lhs;
      return neg(a, n->span);
    }
    case Op::kPow: {
      NodePtr b = simp(n->lhs);
      if (n->index == 0) return number(1.0);
      if (n->index == 1) return b;
      double v;
      if (as_constant(b, v)) {
        double r = 1.0;
        for (std::uint32_t i = 0; i < n->index; ++i) r *= v;
        return constant(r);
      }
      return power(b, n->index, n->span);
    }
    default: break;
  }
  NodePtr a = simp(n->lhs);
  NodePtr b = simp(n->rhs);
  double va = 0.0, vb = 0.0;
  const bool ca = as_constant(a, va);
  const bool cb = as_constant(b, vb);
  switch (n->op) {
    case Op::kAdd:
      if (ca && cb) return constant(va + vb);
      if (ca && va == 0.0) return b;
      if (cb && vb == 0.0) return a;
      break;
    case Op::kSub:
      if (ca && cb) return constant(va - vb);
      if (cb && vb == 0.0) return a;
      if (ca && va == 0.0) return simp(neg(b));
      break;
    case Op::kMul:
      if (ca && cb) return constant(va * vb);
      if ((ca && va == 0.0) || (cb && vb == 0.0)) return number(0.0);
      if (ca && va == 1.0) return b;
      if (cb && vb == 1.0) return a;
      break;
    case Op::kDiv:
      if (ca && cb && vb != 0.0) return constant(va / vb);
      if (ca && va == 0.0 && !(cb && vb == 0.0)) return number(0.0);
      if (cb && vb == 1.0) return a;
      break;
    default: break;
  }
  return binary(n->op, a, b, n->span);
}

NodePtr diff(const NodePtr& n, std::uint32_t j, bool wrt_lambda) {
  switch (n->op) {
    case Op::kNumber: return number(0.0);
    case Op::kLambda: return number(wrt_lambda ? 1.0 : 0.0);
    case Op::kVar: return number(!wrt_lambda && n->index == j ? 1.0 : 0.0);
    case Op::kNeg: return neg(diff(n->lhs, j, wrt_lambda));
    case Op::kAdd:
    case Op::kSub: return binary(n->op, diff(n->lhs, j, wrt_lambda), diff(n->rhs, j, wrt_lambda));
    case Op::kMul:
      return binary(Op::kAdd, binary(Op::kMul, diff(n->lhs, j, wrt_lambda), n->rhs),
                    binary(Op::kMul, n->lhs, diff(n->rhs, j, wrt_lambda)));
    case Op::kDiv:
      return binary(Op::kDiv,
                    binary(Op::kSub, binary(Op::kMul, diff(n->lhs, j, wrt_lambda), n->rhs),
                           binary(Op::kMul, n->lhs, diff(n->rhs, j, wrt_lambda))),
                    power(n->rhs, 2));
    case Op::kPow:
      if (n->index == 0) return number(0.0);
      return binary(Op::kMul,
                    binary(Op::kMul, number(static_cast<double>(n->index)), power(n->lhs, n->index - 1)),
                    diff(n->lhs, j, wrt_lambda));
  }
  return number(0.0);
}

NodePtr rename(const NodePtr& n, const std::vector<std::uint32_t>& mapping) {
  switch (n->op) {
    case Op::kNumber:
    case Op::kLambda: return n;
    case Op::kVar:
      require(n->index <= mapping.size(), "rename_variables: mapping too short");
      return var(mapping[n->index - 1], n->span);
    case Op::kNeg: return neg(rename(n->lhs, mapping), n->span);
    case Op::kPow: return power(rename(n->lhs, mapping), n->index, n->span);
    default: return binary(n->op, rename(n->lhs, mapping), rename(n->rhs, mapping), n->span);
  }
}

}  // namespace

Expr simplify(const Expr& e) { return Expr(simp(e.root())); }

Expr partial(const Expr& e, std::uint32_t j) {
  require(j >= 1, "variables are numbered from x1");
  return Expr(simp(diff(e.root(), j, false)));
}

Expr partial_lambda(const Expr& e) { return Expr(simp(diff(e.root(), 0, true))); }

Expr rename_variables(const Expr& e, const std::vector<std::uint32_t>& mapping) {
  return Expr(rename(e.root(), mapping));
}

// ---------------------------------------------------------------------------
// Compiled form

namespace {

template <class Emit>
void emit_postfix(const NodePtr& n, Emit&& emit) {
  if (n->lhs) emit_postfix(n->lhs, emit);
  if (n->rhs) emit_postfix(n->rhs, emit);
  emit(*n);
}

}  // namespace

Compiled::Compiled(const Expr& e) : arity_(e.arity()) {
  std::size_t depth = 0;
  emit_postfix(e.root(), [&](const Node& n) {
    code_.push_back({n.op, n.index, n.value, n.span});
    switch (n.op) {
      case Op::kNumber:
      case Op::kLambda:
      case Op::kVar: ++depth; break;
      case Op::kNeg:
      case Op::kPow: break;
      default: --depth; break;
    }
    max_stack_ = std::max(max_stack_, depth);
  });
}

namespace {

template <class Load>
double run(const auto& code, std::size_t max_stack, double lam, Load&& load) {
  std::array<double, 64> small{};
  std::vector<double> big;
  double* st = small.data();
  if (max_stack > small.size()) {
    big.resize(max_stack);
    st = big.data();
  }
  std::size_t sp = 0;
  for (const auto& in : code) {
    switch (in.op) {
      case Op::kNumber: st[sp++] = in.value; break;
      case Op::kLambda: st[sp++] = lam; break;
      case Op::kVar: st[sp++] = load(in.index); break;
      case Op::kNeg: st[sp - 1] = -st[sp - 1]; break;
      case Op::kPow: {
        const double b = st[sp - 1];
        double r = 1.0;
        for (std::uint32_t i = 0; i < in.index; ++i) r *= b;
        st[sp - 1] = r;
        break;
      }
      case Op::kAdd: --sp; st[sp - 1] += st[sp]; break;
      case Op::kSub: --sp; st[sp - 1] -= st[sp]; break;
      case Op::kMul: --sp; st[sp - 1] *= st[sp]; break;
      case Op::kDiv:
        --sp;
        if (st[sp] == 0.0) throw EvalError("division by zero", in.span);
        st[sp - 1] /= st[sp];
        break;
    }
  }
  return st[0];
}

}  // namespace

double Compiled::operator()(std::span<const double> x, double lambda) const {
  if (x.size() < arity_) throw EvalError("too few inputs for the expression arity", {});
  return run(code_, max_stack_, lambda, [&](std::uint32_t j) { return x[j - 1]; });
}

double Compiled::eval_indirect(const double* values, const std::uint32_t* inputs,
                               double lambda) const {
  return run(code_, max_stack_, lambda, [&](std::uint32_t j) { return values[inputs[j - 1]]; });
}

}  // namespace cellnet::expr
