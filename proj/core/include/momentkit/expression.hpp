#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace momentkit {

// Parse failure with the character offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(int position, const std::string& what)
      : std::runtime_error(what + " (at column " + std::to_string(position + 1) + ")"),
        position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

struct ExprNode;

// Arithmetic expressions over a state pair (x, y) with +, -, *, /, ^ (constant
// exponent), unary minus, exp(s), and norm2(v). In dimension 1 the variables
// x and y are scalars; in dimension 2 they are vectors with scalar components
// x1, x2, y1, y2. Vector arithmetic is elementwise; scalar * vector and
// vector / scalar are allowed; ^ and exp apply to scalars, norm2 maps a
// vector (or scalar, as |.|) to a scalar.
//
// Expressions are immutable; component() and derivative() build new trees.
// Derivatives are symbolic, so Jacobians of parsed dynamics are exact up to
// the nonsmooth points of norm2 (the zero vector).
class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text, int dim);

  bool empty() const { return root_ == nullptr; }
  int dim() const { return dim_; }
  bool is_vector() const;
  bool uses_y() const;

  // Number of output components: dim() for vector expressions, 1 otherwise.
  int value_size() const { return is_vector() ? dim_ : 1; }

  // Evaluates at x (size dim) and y (size dim; may be null when uses_y() is
  // false). out receives value_size() entries.
  void eval(const double* x, const double* y, double* out) const;

  double eval_scalar(const double* x, const double* y = nullptr) const;

  // Scalar expression for component i (identity on scalar expressions when
  // i == 0).
  Expression component(int i) const;

  // Partial derivative of a scalar expression with respect to variable
  // `which` ('x' or 'y'), component `comp`. Throws std::logic_error when
  // applied to a vector expression.
  Expression derivative(char which, int comp) const;

  std::string str() const;

 private:
  Expression(std::shared_ptr<const ExprNode> root, int dim)
      : root_(std::move(root)), dim_(dim) {}

  std::shared_ptr<const ExprNode> root_;
  int dim_ = 1;
};

}  // namespace momentkit
