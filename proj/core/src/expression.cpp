#include "momentkit/expression.hpp"

#include <cctype>
#include <cmath>
#include <utility>
#include <vector>

namespace momentkit {

struct ExprNode {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Norm2, Tuple };
  Kind kind;
  double value = 0.0;  // Const payload; Pow exponent
  char var = 0;        // 'x' or 'y'
  int comp = -1;       // -1 = whole variable
  bool vec = false;
  std::shared_ptr<const ExprNode> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Const;
  n->value = v;
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->kind == ExprNode::Kind::Const && n->value == v;
}

NodePtr make_var(char var, int comp, int dim) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Var;
  n->var = var;
  n->comp = comp;
  n->vec = comp < 0 && dim > 1;
  return n;
}

// Smart constructors fold constants and drop identities so that symbolic
// derivatives stay compact.
NodePtr make_add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == ExprNode::Kind::Const && b->kind == ExprNode::Kind::Const)
    return make_const(a->value + b->value);
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Add;
  n->vec = a->vec || b->vec;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_neg(NodePtr a);

NodePtr make_sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->kind == ExprNode::Kind::Const && b->kind == ExprNode::Kind::Const)
    return make_const(a->value - b->value);
  if (is_const(a, 0.0)) return make_neg(std::move(b));
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Sub;
  n->vec = a->vec || b->vec;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == ExprNode::Kind::Const && b->kind == ExprNode::Kind::Const)
    return make_const(a->value * b->value);
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Mul;
  n->vec = a->vec || b->vec;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  if (a->kind == ExprNode::Kind::Const && b->kind == ExprNode::Kind::Const &&
      b->value != 0.0)
    return make_const(a->value / b->value);
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Div;
  n->vec = a->vec;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_pow(NodePtr a, double e) {
  if (e == 0.0) return make_const(1.0);
  if (e == 1.0) return a;
  if (a->kind == ExprNode::Kind::Const) return make_const(std::pow(a->value, e));
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Pow;
  n->value = e;
  n->a = std::move(a);
  return n;
}

NodePtr make_neg(NodePtr a) {
  if (a->kind == ExprNode::Kind::Const) return make_const(-a->value);
  if (a->kind == ExprNode::Kind::Neg) return a->a;
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Neg;
  n->vec = a->vec;
  n->a = std::move(a);
  return n;
}

NodePtr make_tuple(NodePtr a, NodePtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Tuple;
  n->vec = true;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_call(ExprNode::Kind kind, NodePtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->vec = false;  // exp and norm2 both produce scalars
  n->a = std::move(a);
  return n;
}

// ---------------------------------------------------------------------------
// Parsing

struct Token {
  enum class Kind { Number, Ident, Symbol, End };
  Kind kind;
  double number = 0.0;
  std::string text;
  int position = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    current_.position = static_cast<int>(pos_);
    if (pos_ >= text_.size()) {
      current_.kind = Token::Kind::End;
      current_.text.clear();
      return;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
        ++end;
      if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
        std::size_t mark = end + 1;
        if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-')) ++mark;
        if (mark < text_.size() && std::isdigit(static_cast<unsigned char>(text_[mark]))) {
          end = mark;
          while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        }
      }
      const std::string num = text_.substr(pos_, end - pos_);
      try {
        current_.number = std::stod(num);
      } catch (const std::exception&) {
        throw ParseError(static_cast<int>(pos_), "malformed number '" + num + "'");
      }
      current_.kind = Token::Kind::Number;
      current_.text = num;
      pos_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                    text_[end] == '_'))
        ++end;
      current_.kind = Token::Kind::Ident;
      current_.text = text_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    current_.kind = Token::Kind::Symbol;
    current_.text = std::string(1, c);
    ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
 public:
  Parser(const std::string& text, int dim) : lexer_(text), dim_(dim) {}

  NodePtr parse() {
    NodePtr root = parse_sum();
    if (lexer_.peek().kind != Token::Kind::End)
      fail("unexpected trailing input '" + lexer_.peek().text + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(lexer_.peek().position, msg);
  }

  bool eat_symbol(const std::string& s) {
    if (lexer_.peek().kind == Token::Kind::Symbol && lexer_.peek().text == s) {
      lexer_.take();
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_term();
    for (;;) {
      const int at = lexer_.peek().position;
      if (eat_symbol("+")) {
        NodePtr rhs = parse_term();
        require_same_shape(lhs, rhs, at, "+");
        lhs = make_add(std::move(lhs), std::move(rhs));
      } else if (eat_symbol("-")) {
        NodePtr rhs = parse_term();
        require_same_shape(lhs, rhs, at, "-");
        lhs = make_sub(std::move(lhs), std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      const int at = lexer_.peek().position;
      if (eat_symbol("*")) {
        NodePtr rhs = parse_unary();
        if (lhs->vec && rhs->vec)
          throw ParseError(at, "cannot multiply two vectors; use norm2 or components");
        lhs = make_mul(std::move(lhs), std::move(rhs));
      } else if (eat_symbol("/")) {
        NodePtr rhs = parse_unary();
        if (rhs->vec) throw ParseError(at, "cannot divide by a vector");
        lhs = make_div(std::move(lhs), std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (eat_symbol("-")) return make_neg(parse_unary());
    if (eat_symbol("+")) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    const int at = lexer_.peek().position;
    if (!eat_symbol("^")) return base;
    if (base->vec)
      throw ParseError(at, "cannot raise a vector to a power; use norm2 or components");
    NodePtr exponent = parse_unary();  // right-associative
    if (exponent->kind != ExprNode::Kind::Const)
      throw ParseError(at, "exponent must be a numeric constant");
    return make_pow(std::move(base), exponent->value);
  }

  NodePtr parse_atom() {
    const Token tok = lexer_.take();
    switch (tok.kind) {
      case Token::Kind::Number:
        return make_const(tok.number);
      case Token::Kind::Ident:
        return parse_ident(tok);
      case Token::Kind::Symbol:
        if (tok.text == "(") {
          NodePtr inner = parse_sum();
          if (eat_symbol(",")) {
            // (a, b) assembles a 2-D vector from scalar components.
            const int at = lexer_.peek().position;
            NodePtr second = parse_sum();
            if (dim_ != 2) throw ParseError(tok.position, "tuples need a 2-D state");
            if (inner->vec || second->vec)
              throw ParseError(at, "tuple components must be scalar");
            if (!eat_symbol(")")) fail("expected ')'");
            return make_tuple(std::move(inner), std::move(second));
          }
          if (!eat_symbol(")")) fail("expected ')'");
          return inner;
        }
        throw ParseError(tok.position, "unexpected '" + tok.text + "'");
      case Token::Kind::End:
        throw ParseError(tok.position, "unexpected end of expression");
    }
    throw ParseError(tok.position, "unexpected token");
  }

  NodePtr parse_ident(const Token& tok) {
    const std::string& name = tok.text;
    if (name == "x" || name == "y") return make_var(name[0], -1, dim_);
    if (name.size() == 2 && (name[0] == 'x' || name[0] == 'y') &&
        (name[1] == '1' || name[1] == '2')) {
      const int comp = name[1] - '1';
      if (comp >= dim_)
        throw ParseError(tok.position,
                         "component '" + name + "' exceeds dimension " + std::to_string(dim_));
      return make_var(name[0], comp, dim_);
    }
    if (name == "exp" || name == "norm2") {
      if (!eat_symbol("(")) fail("expected '(' after '" + name + "'");
      const int at = lexer_.peek().position;
      NodePtr arg = parse_sum();
      if (eat_symbol(",")) fail("'" + name + "' takes exactly one argument");
      if (!eat_symbol(")")) fail("expected ')'");
      if (name == "exp") {
        if (arg->vec) throw ParseError(at, "exp needs a scalar argument");
        return make_call(ExprNode::Kind::Exp, std::move(arg));
      }
      return make_call(ExprNode::Kind::Norm2, std::move(arg));
    }
    throw ParseError(tok.position, "unknown identifier '" + name + "'");
  }

  void require_same_shape(const NodePtr& a, const NodePtr& b, int at, const char* op) const {
    if (a->vec != b->vec)
      throw ParseError(at, std::string("operands of '") + op + "' mix vector and scalar");
  }

  Lexer lexer_;
  int dim_;
};

// ---------------------------------------------------------------------------
// Evaluation

struct Val {
  double v[2];
  int n;
};

double ipow(double base, double e) {
  const long k = static_cast<long>(e);
  if (static_cast<double>(k) == e && k >= -32 && k <= 32) {
    double acc = 1.0;
    double b = base;
    long m = k < 0 ? -k : k;
    for (; m != 0; m >>= 1) {
      if (m & 1) acc *= b;
      b *= b;
    }
    return k < 0 ? 1.0 / acc : acc;
  }
  return std::pow(base, e);
}

Val ev(const ExprNode* n, const double* x, const double* y, int dim) {
  switch (n->kind) {
    case ExprNode::Kind::Const:
      return {{n->value, 0.0}, 1};
    case ExprNode::Kind::Var: {
      const double* src = n->var == 'x' ? x : y;
      if (n->comp >= 0) return {{src[n->comp], 0.0}, 1};
      if (dim == 1) return {{src[0], 0.0}, 1};
      return {{src[0], src[1]}, 2};
    }
    case ExprNode::Kind::Add: {
      Val a = ev(n->a.get(), x, y, dim), b = ev(n->b.get(), x, y, dim);
      for (int i = 0; i < a.n; ++i) a.v[i] += b.v[i];
      return a;
    }
    case ExprNode::Kind::Sub: {
      Val a = ev(n->a.get(), x, y, dim), b = ev(n->b.get(), x, y, dim);
      for (int i = 0; i < a.n; ++i) a.v[i] -= b.v[i];
      return a;
    }
    case ExprNode::Kind::Mul: {
      Val a = ev(n->a.get(), x, y, dim), b = ev(n->b.get(), x, y, dim);
      if (a.n == 1 && b.n == 1) return {{a.v[0] * b.v[0], 0.0}, 1};
      if (a.n == 1) {
        for (int i = 0; i < b.n; ++i) b.v[i] *= a.v[0];
        return b;
      }
      for (int i = 0; i < a.n; ++i) a.v[i] *= b.v[0];
      return a;
    }
    case ExprNode::Kind::Div: {
      Val a = ev(n->a.get(), x, y, dim), b = ev(n->b.get(), x, y, dim);
      for (int i = 0; i < a.n; ++i) a.v[i] /= b.v[0];
      return a;
    }
    case ExprNode::Kind::Pow: {
      Val a = ev(n->a.get(), x, y, dim);
      return {{ipow(a.v[0], n->value), 0.0}, 1};
    }
    case ExprNode::Kind::Neg: {
      Val a = ev(n->a.get(), x, y, dim);
      for (int i = 0; i < a.n; ++i) a.v[i] = -a.v[i];
      return a;
    }
    case ExprNode::Kind::Exp: {
      Val a = ev(n->a.get(), x, y, dim);
      return {{std::exp(a.v[0]), 0.0}, 1};
    }
    case ExprNode::Kind::Norm2: {
      Val a = ev(n->a.get(), x, y, dim);
      if (a.n == 1) return {{std::abs(a.v[0]), 0.0}, 1};
      return {{std::hypot(a.v[0], a.v[1]), 0.0}, 1};
    }
    case ExprNode::Kind::Tuple: {
      const Val a = ev(n->a.get(), x, y, dim);
      const Val b = ev(n->b.get(), x, y, dim);
      return {{a.v[0], b.v[0]}, 2};
    }
  }
  return {{0.0, 0.0}, 1};
}

// ---------------------------------------------------------------------------
// Structural transforms

NodePtr project(const NodePtr& n, int i) {
  if (!n->vec) return n;
  switch (n->kind) {
    case ExprNode::Kind::Var:
      return std::make_shared<ExprNode>(ExprNode{ExprNode::Kind::Var, 0.0, n->var, i, false,
                                                 nullptr, nullptr});
    case ExprNode::Kind::Add:
      return make_add(project(n->a, i), project(n->b, i));
    case ExprNode::Kind::Sub:
      return make_sub(project(n->a, i), project(n->b, i));
    case ExprNode::Kind::Neg:
      return make_neg(project(n->a, i));
    case ExprNode::Kind::Mul:
      if (n->a->vec) return make_mul(project(n->a, i), n->b);
      return make_mul(n->a, project(n->b, i));
    case ExprNode::Kind::Div:
      return make_div(project(n->a, i), n->b);
    case ExprNode::Kind::Tuple:
      return i == 0 ? n->a : n->b;
    default:
      throw std::logic_error("vector expression with non-vector operator");
  }
}

NodePtr diff(const NodePtr& n, char which, int comp, int dim) {
  switch (n->kind) {
    case ExprNode::Kind::Const:
      return make_const(0.0);
    case ExprNode::Kind::Var: {
      if (n->var != which) return make_const(0.0);
      const int c = n->comp < 0 ? 0 : n->comp;  // scalar whole-variable in 1-D
      return make_const(c == comp ? 1.0 : 0.0);
    }
    case ExprNode::Kind::Add:
      return make_add(diff(n->a, which, comp, dim), diff(n->b, which, comp, dim));
    case ExprNode::Kind::Sub:
      return make_sub(diff(n->a, which, comp, dim), diff(n->b, which, comp, dim));
    case ExprNode::Kind::Mul:
      return make_add(make_mul(diff(n->a, which, comp, dim), n->b),
                      make_mul(n->a, diff(n->b, which, comp, dim)));
    case ExprNode::Kind::Div:
      return make_div(make_sub(make_mul(diff(n->a, which, comp, dim), n->b),
                               make_mul(n->a, diff(n->b, which, comp, dim))),
                      make_mul(n->b, n->b));
    case ExprNode::Kind::Pow:
      return make_mul(make_mul(make_const(n->value), make_pow(n->a, n->value - 1.0)),
                      diff(n->a, which, comp, dim));
    case ExprNode::Kind::Neg:
      return make_neg(diff(n->a, which, comp, dim));
    case ExprNode::Kind::Exp:
      return make_mul(make_call(ExprNode::Kind::Exp, n->a), diff(n->a, which, comp, dim));
    case ExprNode::Kind::Norm2: {
      // d||v|| = sum_i v_i dv_i / ||v||; undefined at v = 0, as is the norm's
      // own derivative.
      if (!n->a->vec) {
        NodePtr s = n->a;
        return make_div(make_mul(s, diff(s, which, comp, dim)),
                        make_call(ExprNode::Kind::Norm2, s));
      }
      NodePtr numer = make_const(0.0);
      for (int i = 0; i < dim; ++i) {
        NodePtr ci = project(n->a, i);
        numer = make_add(std::move(numer), make_mul(ci, diff(ci, which, comp, dim)));
      }
      return make_div(std::move(numer), make_call(ExprNode::Kind::Norm2, n->a));
    }
  }
  return make_const(0.0);
}

bool search_y(const ExprNode* n) {
  if (n == nullptr) return false;
  if (n->kind == ExprNode::Kind::Var) return n->var == 'y';
  return search_y(n->a.get()) || search_y(n->b.get());
}

void print(const ExprNode* n, std::string& out) {
  switch (n->kind) {
    case ExprNode::Kind::Const: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      out += buf;
      return;
    }
    case ExprNode::Kind::Var:
      out += n->var;
      if (n->comp >= 0) out += static_cast<char>('1' + n->comp);
      return;
    case ExprNode::Kind::Add:
    case ExprNode::Kind::Sub:
    case ExprNode::Kind::Mul:
    case ExprNode::Kind::Div: {
      const char* op = n->kind == ExprNode::Kind::Add   ? " + "
                       : n->kind == ExprNode::Kind::Sub ? " - "
                       : n->kind == ExprNode::Kind::Mul ? " * "
                                                        : " / ";
      out += '(';
      print(n->a.get(), out);
      out += op;
      print(n->b.get(), out);
      out += ')';
      return;
    }
    case ExprNode::Kind::Pow: {
      out += '(';
      print(n->a.get(), out);
      out += ")^";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      out += buf;
      return;
    }
    case ExprNode::Kind::Neg:
      out += "-(";
      print(n->a.get(), out);
      out += ')';
      return;
    case ExprNode::Kind::Exp:
      out += "exp(";
      print(n->a.get(), out);
      out += ')';
      return;
    case ExprNode::Kind::Norm2:
      out += "norm2(";
      print(n->a.get(), out);
      out += ')';
      return;
    case ExprNode::Kind::Tuple:
      out += '(';
      print(n->a.get(), out);
      out += ", ";
      print(n->b.get(), out);
      out += ')';
      return;
  }
}

}  // namespace

Expression Expression::parse(const std::string& text, int dim) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("expressions support dimensions 1 and 2");
  Parser parser(text, dim);
  return Expression(parser.parse(), dim);
}

bool Expression::is_vector() const { return root_ != nullptr && root_->vec; }

bool Expression::uses_y() const { return root_ != nullptr && search_y(root_.get()); }

void Expression::eval(const double* x, const double* y, double* out) const {
  const Val val = ev(root_.get(), x, y, dim_);
  for (int i = 0; i < val.n; ++i) out[i] = val.v[i];
}

double Expression::eval_scalar(const double* x, const double* y) const {
  if (is_vector()) throw std::logic_error("eval_scalar on a vector expression");
  return ev(root_.get(), x, y, dim_).v[0];
}

Expression Expression::component(int i) const {
  if (i < 0 || i >= value_size()) throw std::out_of_range("component index");
  return Expression(project(root_, i), dim_);
}

Expression Expression::derivative(char which, int comp) const {
  if (is_vector())
    throw std::logic_error("derivative applies to scalar expressions; take component() first");
  if (which != 'x' && which != 'y') throw std::invalid_argument("variable must be 'x' or 'y'");
  if (comp < 0 || comp >= dim_) throw std::out_of_range("component index");
  return Expression(diff(root_, which, comp, dim_), dim_);
}

std::string Expression::str() const {
  std::string out;
  if (root_ != nullptr) print(root_.get(), out);
  return out;
}

}  // namespace momentkit
