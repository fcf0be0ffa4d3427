#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace reshom {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class FuncKind { Sin, Cos, Exp, Abs, Min, Max };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// One node of an immutable arithmetic syntax tree. Trees are freely shared
/// across threads; evaluation never mutates them.
struct ExprNode {
  struct Literal {
    double value;
  };
  struct Variable {
    int index;  // 0-based; prints as x1, x2, x3
  };
  struct Pi {};
  struct Negate {
    ExprPtr operand;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };
  struct Call {
    FuncKind func;
    std::vector<ExprPtr> args;
  };

  std::variant<Literal, Variable, Pi, Negate, Binary, Call> data;
};

/// Arithmetic expression over x1..x3 with sin, cos, exp, abs, min, max.
///
/// Grammar (highest binding first): ^ (right-assoc), unary -, * /, + -.
/// Literals survive print/parse round trips bit-exactly; evaluation is
/// IEEE double and raises EvalError on any non-finite intermediate.
class Expression {
public:
  /// Parses UTF-8 source; throws ParseError with the byte offset of the
  /// first offending token on malformed input.
  static Expression parse(std::string_view source);

  static Expression literal(double v);
  static Expression variable(int index);  // 0-based, 0..2
  static Expression pi();
  static Expression negate(Expression e);
  static Expression binary(BinaryOp op, Expression lhs, Expression rhs);
  static Expression call(FuncKind f, std::vector<Expression> args);

  /// IEEE double evaluation at the given point; `point` must cover every
  /// variable used. Throws EvalError on non-finite results.
  double evaluate(std::span<const double> point) const;

  /// Number of coordinates the expression reads (max variable index + 1).
  int arity() const;

  /// Round-trippable text form; literals printed in shortest exact form.
  std::string print() const;

  const ExprPtr& root() const { return root_; }

private:
  explicit Expression(ExprPtr root) : root_(std::move(root)) {}
  ExprPtr root_;
};

}  // namespace reshom
