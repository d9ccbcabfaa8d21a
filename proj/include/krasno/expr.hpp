#pragma once

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "krasno/errors.hpp"
#include "krasno/format.hpp"
#include "krasno/function_model.hpp"

/// Single-variable arithmetic expressions over x: parsing, evaluation and
/// symbolic differentiation.
///
/// Grammar (whitespace between tokens is ignored):
///
///     expr   := term (('+'|'-') term)*
///     term   := factor (('*'|'/') factor)*
///     factor := '-' factor | power
///     power  := atom ('^' factor)?
///     atom   := NUMBER | 'x' | IDENT '(' expr ')' | '(' expr ')'
///     IDENT  := sin | cos | tan | exp | log | sqrt | abs
///
/// A minus sign applied directly to a numeric literal is folded into a
/// negative Number node, so "-2" and the printed form of Number(-2) agree.
namespace krasno::expr {

enum class BinaryOp { add, sub, mul, div, pow };
enum class Func { sin, cos, tan, exp, log, sqrt, abs };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct Variable {};
struct Negate {
  Expr child;
};
struct Binary {
  BinaryOp op;
  Expr left;
  Expr right;
};
struct Call {
  Func fn;
  Expr arg;
};

struct Node {
  std::variant<Number, Variable, Negate, Binary, Call> v;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& what, std::size_t offset, std::string name)
      : ParseError(what, offset, {}), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// log of a non-positive value, division by zero and similar.
class EvalDomainError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

class NonDifferentiableError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Construction

inline Expr number(double v) { return std::make_shared<const Node>(Node{Number{v}}); }
inline Expr variable() { return std::make_shared<const Node>(Node{Variable{}}); }
inline Expr negate(Expr e) { return std::make_shared<const Node>(Node{Negate{std::move(e)}}); }
inline Expr binary(BinaryOp op, Expr l, Expr r) {
  return std::make_shared<const Node>(Node{Binary{op, std::move(l), std::move(r)}});
}
inline Expr call(Func fn, Expr arg) {
  return std::make_shared<const Node>(Node{Call{fn, std::move(arg)}});
}

inline const char* func_name(Func f) {
  static constexpr const char* names[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs"};
  return names[static_cast<int>(f)];
}

inline std::optional<Func> func_from_name(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Func::abs); ++i) {
    if (s == func_name(static_cast<Func>(i))) return static_cast<Func>(i);
  }
  return std::nullopt;
}

inline bool equal(const Expr& a, const Expr& b) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      [&b](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b->v);
        if constexpr (std::is_same_v<T, Number>) {
          return std::bit_cast<std::uint64_t>(na.value) == std::bit_cast<std::uint64_t>(nb.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          return true;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return equal(na.child, nb.child);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return na.op == nb.op && equal(na.left, nb.left) && equal(na.right, nb.right);
        } else {
          return na.fn == nb.fn && equal(na.arg, nb.arg);
        }
      },
      a->v);
}

inline bool depends_on_x(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) return false;
        else if constexpr (std::is_same_v<T, Variable>) return true;
        else if constexpr (std::is_same_v<T, Negate>) return depends_on_x(n.child);
        else if constexpr (std::is_same_v<T, Binary>) return depends_on_x(n.left) || depends_on_x(n.right);
        else return depends_on_x(n.arg);
      },
      e->v);
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

// Binding strength of the grammar rule a node prints as.
enum Level { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

inline int level_of(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) return n.value < 0 || std::signbit(n.value) ? kUnary : kAtom;
        else if constexpr (std::is_same_v<T, Negate>) return kUnary;
        else if constexpr (std::is_same_v<T, Binary>) {
          switch (n.op) {
            case BinaryOp::add:
            case BinaryOp::sub: return kSum;
            case BinaryOp::mul:
            case BinaryOp::div: return kProduct;
            case BinaryOp::pow: return kPower;
          }
          return kSum;
        } else return kAtom;
      },
      e->v);
}

inline void print(const Expr& e, std::string& out);

inline void print_at(const Expr& e, int min_level, std::string& out) {
  if (level_of(e) < min_level) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

inline void print(const Expr& e, std::string& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          out += format_double(n.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += 'x';
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          // Bare "-2" would re-parse as the literal -2, not as a negation.
          const auto* lit = std::get_if<Number>(&n.child->v);
          print_at(n.child, lit && !std::signbit(lit->value) ? kAtom + 1 : kUnary, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          switch (n.op) {
            case BinaryOp::add:
            case BinaryOp::sub:
              print_at(n.left, kSum, out);
              out += n.op == BinaryOp::add ? " + " : " - ";
              print_at(n.right, kProduct, out);
              break;
            case BinaryOp::mul:
            case BinaryOp::div:
              print_at(n.left, kProduct, out);
              out += n.op == BinaryOp::mul ? '*' : '/';
              print_at(n.right, kUnary, out);
              break;
            case BinaryOp::pow:
              print_at(n.left, kAtom, out);
              out += '^';
              print_at(n.right, kUnary, out);
              break;
          }
        } else {
          out += func_name(n.fn);
          out += '(';
          print(n.arg, out);
          out += ')';
        }
      },
      e->v);
}

}  // namespace detail

/// Canonical text; parse(to_string(e)) is structurally identical to e.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double value = 0.0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  Expr parse_all() {
    Expr e = parse_expr();
    if (cur_.kind != Tok::end) fail({"+", "-", "*", "/", "^", "end of input"});
    return e;
  }

 private:
  static bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) {
      cur_ = {Tok::end, start, {}};
      return;
    }
    const char c = src_[pos_];
    if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      lex_number(start);
      return;
    }
    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
      cur_ = {Tok::ident, start, src_.substr(start, pos_ - start)};
      return;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::plus; break;
      case '-': kind = Tok::minus; break;
      case '*': kind = Tok::star; break;
      case '/': kind = Tok::slash; break;
      case '^': kind = Tok::caret; break;
      case '(': kind = Tok::lparen; break;
      case ')': kind = Tok::rparen; break;
      default:
        throw ParseError("unexpected character '" + std::string(1, c) + "' at offset " +
                             std::to_string(start),
                         start, {"number", "x", "function", "(", "operator"});
    }
    ++pos_;
    cur_ = {kind, start, src_.substr(start, 1)};
  }

  void lex_number(std::size_t start) {
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && is_digit(src_[p])) {
        while (p < src_.size() && is_digit(src_[p])) ++p;
        pos_ = p;
      }
    }
    const std::string_view text = src_.substr(start, pos_ - start);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ParseError("invalid number '" + std::string(text) + "' at offset " + std::to_string(start),
                       start, {"number"});
    }
    cur_ = {Tok::number, start, text, v};
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string msg = "syntax error at offset " + std::to_string(cur_.offset) + ": found ";
    msg += cur_.kind == Tok::end ? std::string("end of input") : "'" + std::string(cur_.text) + "'";
    msg += ", expected one of:";
    for (const auto& e : expected) msg += " " + e;
    throw ParseError(msg, cur_.offset, std::move(expected));
  }

  void expect(Tok kind, const char* spelled) {
    if (cur_.kind != kind) fail({spelled});
    advance();
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
      const BinaryOp op = cur_.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
      advance();
      e = binary(op, e, parse_term());
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_factor();
    while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
      const BinaryOp op = cur_.kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
      advance();
      e = binary(op, e, parse_factor());
    }
    return e;
  }

  Expr parse_factor() {
    if (cur_.kind == Tok::minus) {
      advance();
      const bool literal_next = cur_.kind == Tok::number;
      Expr child = parse_factor();
      if (const auto* n = std::get_if<Number>(&child->v); literal_next && n) {
        return number(-n->value);
      }
      return negate(std::move(child));
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (cur_.kind == Tok::caret) {
      advance();
      return binary(BinaryOp::pow, std::move(base), parse_factor());
    }
    return base;
  }

  Expr parse_atom() {
    switch (cur_.kind) {
      case Tok::number: {
        Expr e = number(cur_.value);
        advance();
        return e;
      }
      case Tok::ident: {
        const Token tok = cur_;
        if (tok.text == "x") {
          advance();
          return variable();
        }
        const auto fn = func_from_name(tok.text);
        if (!fn) {
          throw UnknownIdentifierError("unknown identifier '" + std::string(tok.text) +
                                           "' at offset " + std::to_string(tok.offset),
                                       tok.offset, std::string(tok.text));
        }
        advance();
        expect(Tok::lparen, "(");
        Expr arg = parse_expr();
        expect(Tok::rparen, ")");
        return call(*fn, std::move(arg));
      }
      case Tok::lparen: {
        advance();
        Expr e = parse_expr();
        expect(Tok::rparen, ")");
        return e;
      }
      default:
        fail({"number", "x", "function", "("});
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token cur_{Tok::end, 0, {}};
};

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

inline double eval(const Expr& e, double x) {
  auto fail = [&](const std::string& why) -> double {
    throw EvalDomainError(why + " in '" + to_string(e) + "' at x = " + format_double(x));
  };
  const double v = std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval(n.child, x);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double a = eval(n.left, x);
          const double b = eval(n.right, x);
          switch (n.op) {
            case BinaryOp::add: return a + b;
            case BinaryOp::sub: return a - b;
            case BinaryOp::mul: return a * b;
            case BinaryOp::div:
              if (b == 0.0) return fail("division by zero");
              return a / b;
            case BinaryOp::pow:
              if (a < 0.0 && b != std::trunc(b)) return fail("negative base with non-integer exponent");
              if (a == 0.0 && b < 0.0) return fail("zero raised to a negative power");
              return std::pow(a, b);
          }
          return 0.0;
        } else {
          const double a = eval(n.arg, x);
          switch (n.fn) {
            case Func::sin: return std::sin(a);
            case Func::cos: return std::cos(a);
            case Func::tan: return std::tan(a);
            case Func::exp: return std::exp(a);
            case Func::log:
              if (!(a > 0.0)) return fail("log of non-positive value");
              return std::log(a);
            case Func::sqrt:
              if (a < 0.0) return fail("sqrt of negative value");
              return std::sqrt(a);
            case Func::abs: return std::abs(a);
          }
          return 0.0;
        }
      },
      e->v);
  if (!std::isfinite(v)) return fail("non-finite result " + format_double(v));
  return v;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace simplify {

inline const Number* as_number(const Expr& e) { return std::get_if<Number>(&e->v); }
inline bool is_value(const Expr& e, double v) {
  const auto* n = as_number(e);
  return n && n->value == v;
}

// Folds a constant result only when it is finite.
inline std::optional<Expr> fold(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  return number(v);
}

inline Expr neg(Expr e) {
  if (const auto* n = as_number(e)) return number(-n->value);
  if (const auto* m = std::get_if<Negate>(&e->v)) return m->child;
  return negate(std::move(e));
}

inline Expr add(Expr a, Expr b) {
  const auto *na = as_number(a), *nb = as_number(b);
  if (na && nb) {
    if (auto f = fold(na->value + nb->value)) return *f;
  }
  if (is_value(a, 0.0)) return b;
  if (is_value(b, 0.0)) return a;
  return binary(BinaryOp::add, std::move(a), std::move(b));
}

inline Expr sub(Expr a, Expr b) {
  const auto *na = as_number(a), *nb = as_number(b);
  if (na && nb) {
    if (auto f = fold(na->value - nb->value)) return *f;
  }
  if (is_value(b, 0.0)) return a;
  if (is_value(a, 0.0)) return neg(std::move(b));
  return binary(BinaryOp::sub, std::move(a), std::move(b));
}

inline Expr mul(Expr a, Expr b) {
  const auto *na = as_number(a), *nb = as_number(b);
  if (na && nb) {
    if (auto f = fold(na->value * nb->value)) return *f;
  }
  if (is_value(a, 0.0) || is_value(b, 0.0)) return number(0.0);
  if (is_value(a, 1.0)) return b;
  if (is_value(b, 1.0)) return a;
  if (is_value(a, -1.0)) return neg(std::move(b));
  if (is_value(b, -1.0)) return neg(std::move(a));
  // c1 * (c2 * e) and (e * c1) * c2 fold their constants.
  if (na) {
    if (const auto* bb = std::get_if<Binary>(&b->v); bb && bb->op == BinaryOp::mul) {
      if (const auto* inner = as_number(bb->left)) {
        if (auto f = fold(na->value * inner->value)) return mul(*f, bb->right);
      }
    }
  }
  if (nb) {
    if (const auto* ba = std::get_if<Binary>(&a->v); ba && ba->op == BinaryOp::mul) {
      if (const auto* inner = as_number(ba->right)) {
        if (auto f = fold(inner->value * nb->value)) return mul(ba->left, *f);
      }
    }
  }
  return binary(BinaryOp::mul, std::move(a), std::move(b));
}

inline Expr div(Expr a, Expr b) {
  const auto *na = as_number(a), *nb = as_number(b);
  if (na && nb && nb->value != 0.0) {
    if (auto f = fold(na->value / nb->value)) return *f;
  }
  if (is_value(b, 1.0)) return a;
  if (is_value(a, 0.0) && nb && nb->value != 0.0) return number(0.0);
  return binary(BinaryOp::div, std::move(a), std::move(b));
}

inline Expr pow(Expr a, Expr b) {
  const auto *na = as_number(a), *nb = as_number(b);
  if (na && nb && !(na->value < 0 && nb->value != std::trunc(nb->value)) &&
      !(na->value == 0 && nb->value < 0)) {
    if (auto f = fold(std::pow(na->value, nb->value))) return *f;
  }
  if (is_value(b, 1.0)) return a;
  if (is_value(b, 0.0)) return number(1.0);
  return binary(BinaryOp::pow, std::move(a), std::move(b));
}

inline Expr fn(Func f, Expr a) {
  Expr e = call(f, a);
  if (as_number(a)) {
    try {
      return number(eval(e, 0.0));
    } catch (const EvalDomainError&) {
    }
  }
  return e;
}

}  // namespace simplify

/// Symbolic d/dx. The result is simplified only by constant folding and
/// identity elimination (0*e, 1*e, e+0, e^1, double negation).
///
/// A power with an x-dependent exponent is rewritten as exp(b*log(a)) first,
/// which narrows its domain to a > 0; the rewrite is recorded in `notes`.
/// abs is rejected with NonDifferentiableError.
inline Expr differentiate(const Expr& e, std::vector<std::string>* notes = nullptr) {
  namespace s = simplify;
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          return number(0.0);
        } else if constexpr (std::is_same_v<T, Variable>) {
          return number(1.0);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return s::neg(differentiate(n.child, notes));
        } else if constexpr (std::is_same_v<T, Binary>) {
          const Expr& u = n.left;
          const Expr& v = n.right;
          switch (n.op) {
            case BinaryOp::add: return s::add(differentiate(u, notes), differentiate(v, notes));
            case BinaryOp::sub: return s::sub(differentiate(u, notes), differentiate(v, notes));
            case BinaryOp::mul:
              return s::add(s::mul(differentiate(u, notes), v), s::mul(u, differentiate(v, notes)));
            case BinaryOp::div:
              return s::div(
                  s::sub(s::mul(differentiate(u, notes), v), s::mul(u, differentiate(v, notes))),
                  s::pow(v, number(2.0)));
            case BinaryOp::pow: {
              if (!depends_on_x(v)) {
                const double c = eval(v, 0.0);
                return s::mul(s::mul(number(c), s::pow(u, number(c - 1.0))), differentiate(u, notes));
              }
              const Expr rewritten = call(Func::exp, s::mul(v, call(Func::log, u)));
              if (notes) {
                notes->push_back("rewrote " + to_string(e) + " as " + to_string(rewritten) +
                                 "; valid only where the base is positive");
              }
              return differentiate(rewritten, notes);
            }
          }
          return number(0.0);
        } else {
          const Expr& u = n.arg;
          switch (n.fn) {
            case Func::sin: return s::mul(s::fn(Func::cos, u), differentiate(u, notes));
            case Func::cos: return s::neg(s::mul(s::fn(Func::sin, u), differentiate(u, notes)));
            case Func::tan:
              return s::div(differentiate(u, notes), s::pow(s::fn(Func::cos, u), number(2.0)));
            case Func::exp: return s::mul(s::fn(Func::exp, u), differentiate(u, notes));
            case Func::log: return s::div(differentiate(u, notes), u);
            case Func::sqrt:
              return s::div(differentiate(u, notes), s::mul(number(2.0), s::fn(Func::sqrt, u)));
            case Func::abs:
              throw NonDifferentiableError("abs is not differentiable at 0; supply derivatives by hand");
          }
          return number(0.0);
        }
      },
      e->v);
}

// ---------------------------------------------------------------------------
// Bridging to RealFunction

/// A parsed function with its symbolic derivatives, when they exist.
struct CompiledFunction {
  Expr ast;
  std::optional<Expr> d1;
  std::optional<Expr> d2;
  /// Why d1/d2 are missing, if they are.
  std::string derivative_error;
  std::vector<std::string> notes;

  RealFunction as_function(Interval domain) const {
    Evaluator f1, f2;
    if (d1) f1 = [e = *d1](double x) { return eval(e, x); };
    if (d2) f2 = [e = *d2](double x) { return eval(e, x); };
    return RealFunction([e = ast](double x) { return eval(e, x); }, domain, std::move(f1),
                        std::move(f2));
  }
};

inline CompiledFunction compile(std::string_view text) {
  CompiledFunction out{parse(text), std::nullopt, std::nullopt, {}, {}};
  try {
    out.d1 = differentiate(out.ast, &out.notes);
    out.d2 = differentiate(*out.d1, &out.notes);
  } catch (const NonDifferentiableError& e) {
    out.d1.reset();
    out.d2.reset();
    out.derivative_error = e.what();
  }
  return out;
}

}  // namespace krasno::expr
