#pragma once

// Closed-form expression DSL over a single variable t.
//
// Grammar (standard precedence, ^ right-associative and binding tighter
// than unary minus):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := NUMBER | 't' | FUNC '(' expr [',' expr] ')' | FUNC power
//           | '(' expr ')'
//   FUNC   := log | exp | sqrt | max | min      (max/min binary)
//
// Unary functions also accept an unparenthesized power argument, so
// "t/(log t)^2" parses the way it reads.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ultra {

enum class ExprOp { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Log, Exp, Sqrt, Max, Min };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op;
  double value = 0.0;  // Num only
  Expr a, b;

  static Expr num(double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Num;
    n->value = v;
    return n;
  }
  static Expr var() {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Var;
    return n;
  }
  static Expr make(ExprOp op, Expr a, Expr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t offset, std::string expected)
      : std::runtime_error("syntax error at offset " + std::to_string(offset) +
                           ": expected " + expected),
        offset_(offset),
        expected_(std::move(expected)) {}
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

inline double eval(const Expr& e, double t) {
  switch (e->op) {
    case ExprOp::Num: return e->value;
    case ExprOp::Var: return t;
    case ExprOp::Neg: return -eval(e->a, t);
    case ExprOp::Add: return eval(e->a, t) + eval(e->b, t);
    case ExprOp::Sub: return eval(e->a, t) - eval(e->b, t);
    case ExprOp::Mul: return eval(e->a, t) * eval(e->b, t);
    case ExprOp::Div: return eval(e->a, t) / eval(e->b, t);
    case ExprOp::Pow: return std::pow(eval(e->a, t), eval(e->b, t));
    case ExprOp::Log: return std::log(eval(e->a, t));
    case ExprOp::Exp: return std::exp(eval(e->a, t));
    case ExprOp::Sqrt: return std::sqrt(eval(e->a, t));
    case ExprOp::Max: return std::fmax(eval(e->a, t), eval(e->b, t));
    case ExprOp::Min: return std::fmin(eval(e->a, t), eval(e->b, t));
  }
  return std::nan("");
}

inline bool identical(const Expr& x, const Expr& y) {
  if (x == y) return true;
  if (!x || !y || x->op != y->op) return false;
  if (x->op == ExprOp::Num)
    return x->value == y->value ||
           (std::isnan(x->value) && std::isnan(y->value));
  if (x->op == ExprOp::Var) return true;
  if ((x->a == nullptr) != (y->a == nullptr)) return false;
  if ((x->b == nullptr) != (y->b == nullptr)) return false;
  if (x->a && !identical(x->a, y->a)) return false;
  if (x->b && !identical(x->b, y->b)) return false;
  return true;
}

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(const std::string& text) : s_(text) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "expression");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) throw SyntaxError(pos_, "end of input or operator");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = ExprNode::make(ExprOp::Add, e, parse_term());
      else if (accept('-'))
        e = ExprNode::make(ExprOp::Sub, e, parse_term());
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = ExprNode::make(ExprOp::Mul, e, parse_unary());
      else if (accept('/'))
        e = ExprNode::make(ExprOp::Div, e, parse_unary());
      else
        return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return ExprNode::make(ExprOp::Neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return ExprNode::make(ExprOp::Pow, base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "number, 't', function, or '('");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      if (!accept(')')) throw SyntaxError(pos_, "')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw SyntaxError(pos_, "number, 't', function, or '('");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // bare 'e' after digits is not an exponent
      }
    }
    if (pos_ == start) throw SyntaxError(pos_, "number");
    try {
      return ExprNode::num(std::stod(s_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      throw SyntaxError(start, "valid numeric literal");
    }
  }

  Expr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string id = s_.substr(start, pos_ - start);
    if (id == "t") return ExprNode::var();
    ExprOp op;
    int arity = 1;
    if (id == "log")
      op = ExprOp::Log;
    else if (id == "exp")
      op = ExprOp::Exp;
    else if (id == "sqrt")
      op = ExprOp::Sqrt;
    else if (id == "max") {
      op = ExprOp::Max;
      arity = 2;
    } else if (id == "min") {
      op = ExprOp::Min;
      arity = 2;
    } else {
      throw SyntaxError(start, "'t' or one of log, exp, sqrt, max, min");
    }
    if (arity == 2) {
      if (!accept('(')) throw SyntaxError(pos_, "'('");
      Expr a = parse_expr();
      if (!accept(',')) throw SyntaxError(pos_, "','");
      Expr b = parse_expr();
      if (!accept(')')) throw SyntaxError(pos_, "')'");
      return ExprNode::make(op, a, b);
    }
    if (accept('(')) {
      Expr a = parse_expr();
      if (!accept(')')) throw SyntaxError(pos_, "')'");
      return ExprNode::make(op, a);
    }
    // unparenthesized argument: log t, sqrt t^3
    return ExprNode::make(op, parse_power());
  }
};

inline int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    case ExprOp::Pow: return 4;
    default: return 5;  // atoms and function calls
  }
}

inline void print_expr(const Expr& e, std::string& out);

inline void print_child(const Expr& child, int parent_prec, bool needs_paren_on_tie,
                        std::string& out) {
  bool paren = precedence(child->op) < parent_prec ||
               (needs_paren_on_tie && precedence(child->op) == parent_prec);
  if (paren) out += '(';
  print_expr(child, out);
  if (paren) out += ')';
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void print_expr(const Expr& e, std::string& out) {
  switch (e->op) {
    case ExprOp::Num: out += format_number(e->value); return;
    case ExprOp::Var: out += 't'; return;
    case ExprOp::Neg:
      out += '-';
      print_child(e->a, precedence(ExprOp::Neg), false, out);
      return;
    case ExprOp::Add:
      print_child(e->a, 1, false, out);
      out += " + ";
      print_child(e->b, 1, true, out);
      return;
    case ExprOp::Sub:
      print_child(e->a, 1, false, out);
      out += " - ";
      print_child(e->b, 1, true, out);
      return;
    case ExprOp::Mul:
      print_child(e->a, 2, false, out);
      out += "*";
      print_child(e->b, 2, true, out);
      return;
    case ExprOp::Div:
      print_child(e->a, 2, false, out);
      out += "/";
      print_child(e->b, 2, true, out);
      return;
    case ExprOp::Pow:
      // '^' takes an atom on the left, a unary on the right
      print_child(e->a, 5, false, out);
      out += '^';
      if (precedence(e->b->op) < 3) {
        out += '(';
        print_expr(e->b, out);
        out += ')';
      } else {
        print_expr(e->b, out);
      }
      return;
    case ExprOp::Log:
    case ExprOp::Exp:
    case ExprOp::Sqrt: {
      out += e->op == ExprOp::Log ? "log" : e->op == ExprOp::Exp ? "exp" : "sqrt";
      out += '(';
      print_expr(e->a, out);
      out += ')';
      return;
    }
    case ExprOp::Max:
    case ExprOp::Min: {
      out += e->op == ExprOp::Max ? "max(" : "min(";
      print_expr(e->a, out);
      out += ", ";
      print_expr(e->b, out);
      out += ')';
      return;
    }
  }
}

}  // namespace detail

inline Expr parse_expression(const std::string& text) {
  if (text.empty()) throw SyntaxError(0, "non-empty expression");
  return detail::ExprParser(text).parse();
}

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_expr(e, out);
  return out;
}

}  // namespace ultra
