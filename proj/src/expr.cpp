#include "liouville/expr.hpp"

#include <cctype>
#include <cmath>

#include "liouville/report.hpp"

namespace liouville {

struct Expression::Node {
  enum class Op { constant, var, add, sub, mul, div, pow, neg };
  Op op;
  double value = 0.0;  // constant
  int var = 0;         // var index
  NodePtr a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = Expression::NodePtr;
using Op = Node::Op;

NodePtr constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

NodePtr variable(int k) {
  auto n = std::make_shared<Node>();
  n->op = Op::var;
  n->var = k;
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->op == Op::constant && n->value == v;
}

NodePtr make(Op op, NodePtr a, NodePtr b) {
  // constant folding and the obvious identities
  if (a->op == Op::constant && b->op == Op::constant) {
    switch (op) {
      case Op::add: return constant(a->value + b->value);
      case Op::sub: return constant(a->value - b->value);
      case Op::mul: return constant(a->value * b->value);
      case Op::div: return constant(a->value / b->value);
      case Op::pow: return constant(std::pow(a->value, b->value));
      default: break;
    }
  }
  if (op == Op::add && is_const(a, 0.0)) return b;
  if (op == Op::add && is_const(b, 0.0)) return a;
  if (op == Op::sub && is_const(b, 0.0)) return a;
  if (op == Op::mul && (is_const(a, 0.0) || is_const(b, 0.0)))
    return constant(0.0);
  if (op == Op::mul && is_const(a, 1.0)) return b;
  if (op == Op::mul && is_const(b, 1.0)) return a;
  if (op == Op::div && is_const(a, 0.0)) return constant(0.0);
  if (op == Op::div && is_const(b, 1.0)) return a;
  if (op == Op::pow && is_const(b, 1.0)) return a;
  if (op == Op::pow && is_const(b, 0.0)) return constant(1.0);
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr negate(NodePtr a) {
  if (a->op == Op::constant) return constant(-a->value);
  auto n = std::make_shared<Node>();
  n->op = Op::neg;
  n->a = std::move(a);
  return n;
}

struct Parser {
  const std::string& text;
  size_t pos = 0;
  int m;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprError("expression parse error at position " +
                    std::to_string(pos) + ": " + msg + " in '" + text + "'");
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make(Op::add, lhs, parse_term());
      else if (eat('-'))
        lhs = make(Op::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (eat('*'))
        lhs = make(Op::mul, lhs, parse_factor());
      else if (eat('/'))
        lhs = make(Op::div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    if (eat('-')) return negate(parse_factor());
    if (eat('+')) return parse_factor();
    NodePtr base = parse_atom();
    if (eat('^')) return make(Op::pow, base, parse_factor());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("expected operand");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
    if (std::isalpha((unsigned char)c)) return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit((unsigned char)text[pos]) || text[pos] == '.'))
      ++pos;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      while (pos < text.size() && std::isdigit((unsigned char)text[pos])) ++pos;
    }
    try {
      size_t used = 0;
      const double v = std::stod(text.substr(start, pos - start), &used);
      if (used != pos - start) fail("malformed number");
      return constant(v);
    } catch (const std::exception&) {
      fail("malformed number");
    }
  }

  NodePtr parse_ident() {
    const size_t start = pos;
    while (pos < text.size() && std::isalnum((unsigned char)text[pos])) ++pos;
    const std::string name = text.substr(start, pos - start);
    if (name.size() >= 2 && name[0] == 'I') {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit((unsigned char)name[i])) digits = false;
      if (digits) {
        const int k = std::stoi(name.substr(1));
        if (k < 1 || k > m)
          fail("action index out of range in '" + name + "' (have I1..I" +
               std::to_string(m) + ")");
        return variable(k - 1);
      }
    }
    fail("unknown identifier '" + name + "' (expected I1..I" +
         std::to_string(m) + ")");
  }
};

double eval_node(const NodePtr& n, const VectorXd& I) {
  switch (n->op) {
    case Op::constant: return n->value;
    case Op::var: return I[n->var];
    case Op::add: return eval_node(n->a, I) + eval_node(n->b, I);
    case Op::sub: return eval_node(n->a, I) - eval_node(n->b, I);
    case Op::mul: return eval_node(n->a, I) * eval_node(n->b, I);
    case Op::div: return eval_node(n->a, I) / eval_node(n->b, I);
    case Op::pow: return std::pow(eval_node(n->a, I), eval_node(n->b, I));
    case Op::neg: return -eval_node(n->a, I);
  }
  return 0.0;
}

NodePtr diff_node(const NodePtr& n, int var) {
  switch (n->op) {
    case Op::constant: return constant(0.0);
    case Op::var: return constant(n->var == var ? 1.0 : 0.0);
    case Op::add: return make(Op::add, diff_node(n->a, var), diff_node(n->b, var));
    case Op::sub: return make(Op::sub, diff_node(n->a, var), diff_node(n->b, var));
    case Op::mul:
      return make(Op::add, make(Op::mul, diff_node(n->a, var), n->b),
                  make(Op::mul, n->a, diff_node(n->b, var)));
    case Op::div:
      return make(Op::div,
                  make(Op::sub, make(Op::mul, diff_node(n->a, var), n->b),
                       make(Op::mul, n->a, diff_node(n->b, var))),
                  make(Op::pow, n->b, constant(2.0)));
    case Op::pow: {
      if (n->b->op == Op::constant) {
        // d(a^c) = c a^(c-1) a'
        const double c = n->b->value;
        return make(Op::mul, constant(c),
                    make(Op::mul, make(Op::pow, n->a, constant(c - 1.0)),
                         diff_node(n->a, var)));
      }
      // General exponent: defined for positive bases only. Expressed via
      // a^b (b' ln a + b a'/a); leave the ill-posed domain to evaluation.
      throw ExprError(
          "derivative of '^' with a non-constant exponent is not supported");
    }
    case Op::neg: return negate(diff_node(n->a, var));
  }
  return constant(0.0);
}

std::string str_node(const NodePtr& n) {
  switch (n->op) {
    case Op::constant: return format_double(n->value);
    case Op::var: return "I" + std::to_string(n->var + 1);
    case Op::add: return "(" + str_node(n->a) + "+" + str_node(n->b) + ")";
    case Op::sub: return "(" + str_node(n->a) + "-" + str_node(n->b) + ")";
    case Op::mul: return "(" + str_node(n->a) + "*" + str_node(n->b) + ")";
    case Op::div: return "(" + str_node(n->a) + "/" + str_node(n->b) + ")";
    case Op::pow: return "(" + str_node(n->a) + "^" + str_node(n->b) + ")";
    case Op::neg: return "(-" + str_node(n->a) + ")";
  }
  return "?";
}

}  // namespace

Expression Expression::parse(const std::string& text, int m) {
  if (m < 1) throw ExprError("expression needs at least one action variable");
  Parser p{text, 0, m};
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("unexpected trailing input");
  return Expression(std::move(root), m);
}

double Expression::eval(const VectorXd& I) const {
  if (I.size() != m_)
    throw DimensionError("Expression::eval: wrong action count");
  return eval_node(root_, I);
}

Expression Expression::derivative(int var) const {
  if (var < 0 || var >= m_)
    throw DimensionError("Expression::derivative: variable out of range");
  return Expression(diff_node(root_, var), m_);
}

std::string Expression::str() const { return str_node(root_); }

ActionFunction compile_action_function(const std::string& text, int m) {
  const Expression e = Expression::parse(text, m);
  std::vector<Expression> derivs;
  derivs.reserve(m);
  for (int k = 0; k < m; ++k) derivs.push_back(e.derivative(k));
  ActionFunction f;
  f.m = m;
  f.value = [e](const VectorXd& I) { return e.eval(I); };
  f.grad = [derivs, m](const VectorXd& I) {
    VectorXd g(m);
    for (int k = 0; k < m; ++k) g[k] = derivs[k].eval(I);
    return g;
  };
  return f;
}

}  // namespace liouville
