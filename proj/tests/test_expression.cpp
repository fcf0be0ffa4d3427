#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "reshom/errors.hpp"
#include "reshom/expression.hpp"

using namespace reshom;

namespace {

double eval(const Expression& e, std::initializer_list<double> pt) {
  std::vector<double> x(pt);
  return e.evaluate(x);
}

double eval(const std::string& src, std::initializer_list<double> pt) {
  return eval(Expression::parse(src), pt);
}

}  // namespace

TEST_CASE("grammar and precedence") {
  CHECK(eval("2 + sin(2*pi*x1)", {0.25}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(eval("1", {0.3}) == 1.0);
  CHECK(eval("2 + sin(2*pi*x1)*cos(2*pi*x2)", {0.25, 0.0}) == doctest::Approx(3.0).epsilon(1e-15));
  // min with right-associative power: 0.5^2 = 0.25, min(1, 0.25) = 0.25
  CHECK(eval("min(1, x2^2)", {0.0, 0.5}) == 0.25);
  CHECK(eval("2^3^2", {}) == 512.0);    // right associative
  CHECK(eval("-2^2", {}) == -4.0);      // ^ binds tighter than unary minus
  CHECK(eval("2^-2", {}) == 0.25);
  CHECK(eval("2*3 + 4/2 - 1", {}) == 7.0);
  CHECK(eval("max(1, 2)", {}) == 2.0);
  CHECK(eval("abs(-3.5)", {}) == 3.5);
  CHECK(eval("exp(0)", {}) == 1.0);
  CHECK(eval("1e2 + 1.5e-2", {}) == doctest::Approx(100.015).epsilon(1e-15));
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK_THROWS_AS(Expression::parse(""), ParseError);
  try {
    Expression::parse("x1 +");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  try {
    Expression::parse("x1 @ 2");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(Expression::parse("foo(1)"), ParseError);   // unknown identifier
  CHECK_THROWS_AS(Expression::parse("x4"), ParseError);       // variables are x1..x3
  CHECK_THROWS_AS(Expression::parse("sin(1, 2)"), ParseError);  // arity
  CHECK_THROWS_AS(Expression::parse("min(1)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("(1 + 2"), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 2"), ParseError);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval("1/0", {}), EvalError);
  CHECK_THROWS_AS(eval("x1/x2", {1.0, 0.0}), EvalError);
  CHECK_THROWS_AS(eval("exp(1000)", {}), EvalError);
  CHECK_THROWS_AS(eval("x2", {1.0}), EvalError);  // point too short
  CHECK(Expression::parse("x3").arity() == 3);
  CHECK(Expression::parse("2 + sin(x1)").arity() == 1);
  CHECK(Expression::parse("1.5").arity() == 0);
}

TEST_CASE("print/parse round trip evaluates identically") {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 9);

  // Random AST builder; depth-limited.
  std::function<Expression(int)> build = [&](int depth) -> Expression {
    if (depth <= 0) {
      switch (pick(rng) % 4) {
        case 0: return Expression::literal(unif(rng));
        case 1: return Expression::variable(pick(rng) % 3);
        case 2: return Expression::pi();
        default: return Expression::literal(0.25 * (1 + pick(rng)));
      }
    }
    switch (pick(rng)) {
      case 0: return Expression::binary(BinaryOp::Add, build(depth - 1), build(depth - 1));
      case 1: return Expression::binary(BinaryOp::Sub, build(depth - 1), build(depth - 1));
      case 2: return Expression::binary(BinaryOp::Mul, build(depth - 1), build(depth - 1));
      case 3: return Expression::binary(BinaryOp::Div, build(depth - 1), build(depth - 1));
      case 4:
        // keep powers tame: small integer exponents
        return Expression::binary(BinaryOp::Pow, build(depth - 1),
                                  Expression::literal(1 + pick(rng) % 3));
      case 5: return Expression::negate(build(depth - 1));
      case 6: return Expression::call(FuncKind::Sin, {build(depth - 1)});
      case 7: return Expression::call(FuncKind::Cos, {build(depth - 1)});
      case 8: return Expression::call(FuncKind::Min, {build(depth - 1), build(depth - 1)});
      default: return Expression::call(FuncKind::Abs, {build(depth - 1)});
    }
  };

  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Expression e = build(3);
    const std::string text = e.print();
    const Expression reparsed = Expression::parse(text);
    CHECK(reparsed.print() == text);  // printing is a fixed point
    for (int pt = 0; pt < 5; ++pt) {
      std::vector<double> x{unif(rng), unif(rng), unif(rng)};
      double a = 0.0, b = 0.0;
      bool a_err = false, b_err = false;
      try {
        a = e.evaluate(x);
      } catch (const EvalError&) {
        a_err = true;
      }
      try {
        b = reparsed.evaluate(x);
      } catch (const EvalError&) {
        b_err = true;
      }
      REQUIRE(a_err == b_err);
      if (!a_err) {
        CHECK(a == b);  // bit-exact: literals survive the round trip
        ++compared;
      }
    }
  }
  CHECK(compared > 500);
}

TEST_CASE("literal printing is shortest round-trip") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-13, 1234567.875, 6.0}) {
    const Expression e = Expression::literal(v);
    CHECK(Expression::parse(e.print()).evaluate(std::vector<double>{}) == v);
  }
}

TEST_CASE("parser totality under fuzzing") {
  std::mt19937_64 rng(424242);
  const std::string alphabet = "x123+-*/^()., abcsinmoexp";
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
  int parsed_ok = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[ch(rng)];
    try {
      Expression e = Expression::parse(s);
      ++parsed_ok;
      // anything that parses must also print and reparse
      (void)Expression::parse(e.print());
    } catch (const ParseError&) {
      // diagnostic path: fine
    }
  }
  CHECK(parsed_ok > 0);  // the alphabet does produce some valid inputs
}
