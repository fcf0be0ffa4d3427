#include "reshom/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <utility>

#include "reshom/errors.hpp"

namespace reshom {

namespace {

ExprPtr make_node(ExprNode::Literal n) { return std::make_shared<const ExprNode>(ExprNode{n}); }
ExprPtr make_node(ExprNode::Variable n) { return std::make_shared<const ExprNode>(ExprNode{n}); }
ExprPtr make_node(ExprNode::Pi n) { return std::make_shared<const ExprNode>(ExprNode{n}); }
ExprPtr make_node(ExprNode::Negate n) { return std::make_shared<const ExprNode>(ExprNode{std::move(n)}); }
ExprPtr make_node(ExprNode::Binary n) { return std::make_shared<const ExprNode>(ExprNode{std::move(n)}); }
ExprPtr make_node(ExprNode::Call n) { return std::make_shared<const ExprNode>(ExprNode{std::move(n)}); }

struct Token {
  enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End } kind;
  std::size_t offset;
  double value = 0.0;        // Number
  std::string_view text{};   // Ident
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ >= src_.size()) return {Token::End, pos_};
    const std::size_t start = pos_;
    const char c = src_[pos_];
    switch (c) {
      case '+': ++pos_; return {Token::Plus, start};
      case '-': ++pos_; return {Token::Minus, start};
      case '*': ++pos_; return {Token::Star, start};
      case '/': ++pos_; return {Token::Slash, start};
      case '^': ++pos_; return {Token::Caret, start};
      case '(': ++pos_; return {Token::LParen, start};
      case ')': ++pos_; return {Token::RParen, start};
      case ',': ++pos_; return {Token::Comma, start};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number(start);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      return {Token::Ident, start, 0.0, src_.substr(start, pos_ - start)};
    }
    throw ParseError(start, "unexpected character '" + std::string(1, c) + "'");
  }

private:
  Token lex_number(std::size_t start) {
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        pos_ = mark;  // 'e' belongs to the next token
      } else {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw ParseError(start, "malformed number");
    return {Token::Number, start, value};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

struct FuncInfo {
  std::string_view name;
  FuncKind kind;
  int arity;
};

constexpr std::array<FuncInfo, 6> kFuncs = {{
    {"sin", FuncKind::Sin, 1},
    {"cos", FuncKind::Cos, 1},
    {"exp", FuncKind::Exp, 1},
    {"abs", FuncKind::Abs, 1},
    {"min", FuncKind::Min, 2},
    {"max", FuncKind::Max, 2},
}};

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  ExprPtr parse() {
    ExprPtr e = parse_sum();
    expect(Token::End, "unexpected trailing input");
    return e;
  }

private:
  void advance() { tok_ = lex_.next(); }

  void expect(Token::Kind k, const char* msg) {
    if (tok_.kind != k) throw ParseError(tok_.offset, msg);
  }

  ExprPtr parse_sum() {
    ExprPtr lhs = parse_product();
    while (tok_.kind == Token::Plus || tok_.kind == Token::Minus) {
      const BinaryOp op = tok_.kind == Token::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      lhs = make_node(ExprNode::Binary{op, std::move(lhs), parse_product()});
    }
    return lhs;
  }

  ExprPtr parse_product() {
    ExprPtr lhs = parse_unary();
    while (tok_.kind == Token::Star || tok_.kind == Token::Slash) {
      const BinaryOp op = tok_.kind == Token::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      lhs = make_node(ExprNode::Binary{op, std::move(lhs), parse_unary()});
    }
    return lhs;
  }

  // '^' binds tighter than unary minus: -x^2 == -(x^2).
  ExprPtr parse_unary() {
    if (tok_.kind == Token::Minus) {
      advance();
      return make_node(ExprNode::Negate{parse_unary()});
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (tok_.kind == Token::Caret) {
      advance();
      return make_node(ExprNode::Binary{BinaryOp::Pow, std::move(base), parse_unary()});
    }
    return base;
  }

  ExprPtr parse_primary() {
    switch (tok_.kind) {
      case Token::Number: {
        const double v = tok_.value;
        advance();
        return make_node(ExprNode::Literal{v});
      }
      case Token::LParen: {
        advance();
        ExprPtr e = parse_sum();
        expect(Token::RParen, "expected ')'");
        advance();
        return e;
      }
      case Token::Ident:
        return parse_ident();
      case Token::End:
        throw ParseError(tok_.offset, "unexpected end of input");
      default:
        throw ParseError(tok_.offset, "unexpected token");
    }
  }

  ExprPtr parse_ident() {
    const std::string_view name = tok_.text;
    const std::size_t off = tok_.offset;
    advance();
    if (name == "pi") return make_node(ExprNode::Pi{});
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3')
      return make_node(ExprNode::Variable{name[1] - '1'});
    for (const FuncInfo& f : kFuncs) {
      if (name != f.name) continue;
      expect(Token::LParen, "expected '(' after function name");
      advance();
      std::vector<ExprPtr> args;
      args.push_back(parse_sum());
      while (tok_.kind == Token::Comma) {
        advance();
        args.push_back(parse_sum());
      }
      expect(Token::RParen, "expected ')'");
      advance();
      if (static_cast<int>(args.size()) != f.arity)
        throw ParseError(off, std::string(f.name) + " takes " + std::to_string(f.arity) +
                                  " argument(s), got " + std::to_string(args.size()));
      return make_node(ExprNode::Call{f.kind, std::move(args)});
    }
    throw ParseError(off, "unknown identifier '" + std::string(name) + "'");
  }

  Lexer lex_;
  Token tok_{Token::End, 0};
};

double eval_node(const ExprNode& node, std::span<const double> point);

double checked(double v) {
  if (!std::isfinite(v)) throw EvalError("non-finite value in expression evaluation");
  return v;
}

double eval_node(const ExprNode& node, std::span<const double> point) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Literal>) {
          return checked(n.value);
        } else if constexpr (std::is_same_v<T, ExprNode::Variable>) {
          if (n.index < 0 || static_cast<std::size_t>(n.index) >= point.size())
            throw EvalError("variable x" + std::to_string(n.index + 1) +
                            " out of range for a " + std::to_string(point.size()) +
                            "-dimensional point");
          return checked(point[static_cast<std::size_t>(n.index)]);
        } else if constexpr (std::is_same_v<T, ExprNode::Pi>) {
          return M_PI;
        } else if constexpr (std::is_same_v<T, ExprNode::Negate>) {
          return -eval_node(*n.operand, point);
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          const double a = eval_node(*n.lhs, point);
          const double b = eval_node(*n.rhs, point);
          switch (n.op) {
            case BinaryOp::Add: return checked(a + b);
            case BinaryOp::Sub: return checked(a - b);
            case BinaryOp::Mul: return checked(a * b);
            case BinaryOp::Div: return checked(a / b);
            case BinaryOp::Pow: return checked(std::pow(a, b));
          }
          throw EvalError("invalid binary op");
        } else {
          static_assert(std::is_same_v<T, ExprNode::Call>);
          const double a = eval_node(*n.args[0], point);
          switch (n.func) {
            case FuncKind::Sin: return checked(std::sin(a));
            case FuncKind::Cos: return checked(std::cos(a));
            case FuncKind::Exp: return checked(std::exp(a));
            case FuncKind::Abs: return std::fabs(a);
            case FuncKind::Min: return std::fmin(a, eval_node(*n.args[1], point));
            case FuncKind::Max: return std::fmax(a, eval_node(*n.args[1], point));
          }
          throw EvalError("invalid function");
        }
      },
      node.data);
}

int max_var(const ExprNode& node) {
  return std::visit(
      [&](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Variable>) {
          return n.index + 1;
        } else if constexpr (std::is_same_v<T, ExprNode::Negate>) {
          return max_var(*n.operand);
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          return std::max(max_var(*n.lhs), max_var(*n.rhs));
        } else if constexpr (std::is_same_v<T, ExprNode::Call>) {
          int m = 0;
          for (const auto& a : n.args) m = std::max(m, max_var(*a));
          return m;
        } else {
          return 0;
        }
      },
      node.data);
}

// Precedence levels used both when parsing and when deciding parentheses.
enum Prec { kSum = 1, kProd = 2, kUnary = 3, kPow = 4, kAtom = 5 };

int node_prec(const ExprNode& node) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Literal>) {
          return n.value < 0 ? kUnary : kAtom;  // "-3" re-lexes as unary minus
        } else if constexpr (std::is_same_v<T, ExprNode::Negate>) {
          return kUnary;
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          switch (n.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub: return kSum;
            case BinaryOp::Mul:
            case BinaryOp::Div: return kProd;
            case BinaryOp::Pow: return kPow;
          }
          return kAtom;
        } else {
          return kAtom;
        }
      },
      node.data);
}

void print_literal(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void print_node(std::string& out, const ExprNode& node);

void print_child(std::string& out, const ExprNode& child, int min_prec) {
  if (node_prec(child) < min_prec) {
    out += '(';
    print_node(out, child);
    out += ')';
  } else {
    print_node(out, child);
  }
}

void print_node(std::string& out, const ExprNode& node) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Literal>) {
          print_literal(out, n.value);
        } else if constexpr (std::is_same_v<T, ExprNode::Variable>) {
          out += 'x';
          out += static_cast<char>('1' + n.index);
        } else if constexpr (std::is_same_v<T, ExprNode::Pi>) {
          out += "pi";
        } else if constexpr (std::is_same_v<T, ExprNode::Negate>) {
          out += '-';
          print_child(out, *n.operand, kUnary);
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          const int p = node_prec(node);
          switch (n.op) {
            case BinaryOp::Add:
              print_child(out, *n.lhs, p);
              out += " + ";
              print_child(out, *n.rhs, p + 1);
              break;
            case BinaryOp::Sub:
              print_child(out, *n.lhs, p);
              out += " - ";
              print_child(out, *n.rhs, p + 1);
              break;
            case BinaryOp::Mul:
              print_child(out, *n.lhs, p);
              out += '*';
              print_child(out, *n.rhs, p + 1);
              break;
            case BinaryOp::Div:
              print_child(out, *n.lhs, p);
              out += '/';
              print_child(out, *n.rhs, p + 1);
              break;
            case BinaryOp::Pow:
              print_child(out, *n.lhs, p + 1);  // right-associative
              out += '^';
              print_child(out, *n.rhs, p);
              break;
          }
        } else {
          static_assert(std::is_same_v<T, ExprNode::Call>);
          switch (n.func) {
            case FuncKind::Sin: out += "sin"; break;
            case FuncKind::Cos: out += "cos"; break;
            case FuncKind::Exp: out += "exp"; break;
            case FuncKind::Abs: out += "abs"; break;
            case FuncKind::Min: out += "min"; break;
            case FuncKind::Max: out += "max"; break;
          }
          out += '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print_node(out, *n.args[i]);
          }
          out += ')';
        }
      },
      node.data);
}

}  // namespace

Expression Expression::parse(std::string_view source) {
  return Expression(Parser(source).parse());
}

Expression Expression::literal(double v) { return Expression(make_node(ExprNode::Literal{v})); }

Expression Expression::variable(int index) {
  if (index < 0 || index > 2) throw ConfigError("variable index must be 0..2");
  return Expression(make_node(ExprNode::Variable{index}));
}

Expression Expression::pi() { return Expression(make_node(ExprNode::Pi{})); }

Expression Expression::negate(Expression e) {
  return Expression(make_node(ExprNode::Negate{std::move(e.root_)}));
}

Expression Expression::binary(BinaryOp op, Expression lhs, Expression rhs) {
  return Expression(make_node(ExprNode::Binary{op, std::move(lhs.root_), std::move(rhs.root_)}));
}

Expression Expression::call(FuncKind f, std::vector<Expression> args) {
  const int want = (f == FuncKind::Min || f == FuncKind::Max) ? 2 : 1;
  if (static_cast<int>(args.size()) != want) throw ConfigError("wrong function arity");
  std::vector<ExprPtr> roots;
  roots.reserve(args.size());
  for (auto& a : args) roots.push_back(std::move(a.root_));
  return Expression(make_node(ExprNode::Call{f, std::move(roots)}));
}

double Expression::evaluate(std::span<const double> point) const {
  return eval_node(*root_, point);
}

int Expression::arity() const { return max_var(*root_); }

std::string Expression::print() const {
  std::string out;
  print_node(out, *root_);
  return out;
}

}  // namespace reshom
