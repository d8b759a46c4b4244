#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cellnet/exprlang.hpp"

using namespace cellnet;
using namespace cellnet::expr;

namespace {

double eval(const std::string& text, std::vector<double> x, double lambda) {
  return evaluate(parse(text), x, lambda);
}

// random AST over x1..x3 and lambda, shaped like parser output: literals are
// nonnegative (a minus sign is always a node). Divisions only by 2 + y^2.
NodePtr random_ast(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 7);
  switch (pick(rng)) {
    case 0: return number(std::round(std::uniform_real_distribution<double>(0, 3)(rng) * 4) / 4);
    case 1: return lambda();
    case 2: return var(1 + static_cast<std::uint32_t>(rng() % 3));
    case 3: return neg(random_ast(rng, depth - 1));
    case 4: return binary(Op::kAdd, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 5: return binary(Op::kMul, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 6: return power(random_ast(rng, depth - 1), 1 + static_cast<std::uint32_t>(rng() % 3));
    default: {
      auto den = binary(Op::kAdd, number(2), power(random_ast(rng, depth - 1), 2));
      return binary(Op::kDiv, random_ast(rng, depth - 1), den);
    }
  }
}

}  // namespace

TEST_CASE("parse: arity and lambda") {
  const auto e = parse("lambda*x1 - x2 + x1^2");
  CHECK(e.arity() == 2);
  CHECK(e.uses_lambda());
  const auto id = parse("x1");
  CHECK(id.arity() == 1);
  CHECK_FALSE(id.uses_lambda());
  CHECK(parse("3").arity() == 0);
}

TEST_CASE("evaluation examples") {
  CHECK(eval("lambda*x1 - x2 + x1^2", {2, 3}, 1) == 3.0);
  CHECK(eval("3", {}, 7) == 3.0);
  CHECK(eval("x1^2", {-2}, 0) == 4.0);
  CHECK(eval("(x1-x2)/(1+lambda)", {5, 3}, 1) == 1.0);
  CHECK(eval("1 - 2 - 3", {}, 0) == -4.0);
  CHECK(eval("8 / 4 / 2", {}, 0) == 1.0);
  CHECK(eval("-x1^2", {3}, 0) == 9.0);  // '-' binds to the atom
  CHECK(eval("1.5e1 + .5", {}, 0) == 15.5);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval("1/(x1-x1)", {2}, 0), EvalError);
  CHECK_THROWS_AS(eval("x3", {1, 2}, 0), EvalError);
  try {
    eval("x1 + 1/(lambda)", {1}, 0);
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.span().begin == 5);
    CHECK(e.span().end == 15);
  }
  const Compiled c(parse("1/x1"));
  std::vector<double> zero{0.0};
  CHECK_THROWS_AS(c(zero, 0.0), EvalError);
}

TEST_CASE("parse errors carry spans") {
  for (const char* bad : {"x0", "x1 +", "x1^-2", "(x1", "x1 x2", "lambda*", "", "x", "2^x1", "y1", "2^3^1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse(bad), ParseError);
  }
  try {
    parse("x1 + x0");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.span().begin == 5);
  }
}

TEST_CASE("print and parse round-trip") {
  for (const char* text : {"lambda*x1 - x2 + x1^2", "-(x1 + 2)^3", "x1/(x2*x3) - -lambda",
                           "1 - (2 - 3)", "(x1^2)^3", "0.125*x4"}) {
    const auto e = parse(text);
    CHECK(parse(e.to_string()) == e);
  }
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Expr e(random_ast(rng, 4));
    CAPTURE(e.to_string());
    CHECK(parse(e.to_string()) == e);
  }
}

TEST_CASE("symbolic partials") {
  const auto f = parse("lambda*x1 - x2 + x1^2");
  CHECK(partial(f, 1).to_string() == "lambda + 2*x1");
  CHECK(partial(parse("x1"), 2).to_string() == "0");
  CHECK(partial(f, 2).to_string() == "-1");
  CHECK(partial_lambda(f).to_string() == "x1");
}

TEST_CASE("partials match central differences on random ASTs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int asts = 0;
  while (asts < 20) {
    const Expr e(random_ast(rng, 4));
    if (e.arity() == 0) continue;
    ++asts;
    for (std::uint32_t j = 1; j <= e.arity(); ++j) {
      const auto d = partial(e, j);
      for (int pt = 0; pt < 100; ++pt) {
        std::vector<double> x{u(rng), u(rng), u(rng)};
        const double lam = u(rng);
        const double h = 1e-6;
        auto xp = x, xm = x;
        xp[j - 1] += h;
        xm[j - 1] -= h;
        const double fd = (evaluate(e, xp, lam) - evaluate(e, xm, lam)) / (2 * h);
        const double sym = evaluate(d, x, lam);
        CAPTURE(e.to_string());
        CHECK(std::abs(fd - sym) <= 1e-6 * std::max(1.0, std::abs(sym)));
      }
    }
  }
}

TEST_CASE("simplify and rename") {
  CHECK(simplify(parse("0*x1 + 1*x2 + (2+3)")).to_string() == "x2 + 5");
  const auto r = rename_variables(parse("x1 - x2 + x3"), {1, 1, 2});
  CHECK(r == parse("x1 - x1 + x2"));
}

TEST_CASE("compiled evaluation matches the tree walker") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    const Expr e(random_ast(rng, 5));
    const Compiled c(e);
    std::vector<double> x{u(rng), u(rng), u(rng)};
    const double lam = u(rng);
    CHECK(c(x, lam) == evaluate(e, x, lam));
    const std::uint32_t inputs[3] = {2, 0, 1};
    std::vector<double> perm{x[1], x[2], x[0]};
    CHECK(c.eval_indirect(perm.data(), inputs, lam) == evaluate(e, x, lam));
  }
}
