#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "momentkit/expression.hpp"
#include "momentkit/rng.hpp"

using namespace momentkit;

namespace {

double fd(const Expression& e, char which, int comp, double* x, double* y) {
  double* target = which == 'x' ? x : y;
  const double h = 1e-6;
  const double keep = target[comp];
  target[comp] = keep + h;
  const double hi = e.eval_scalar(x, y);
  target[comp] = keep - h;
  const double lo = e.eval_scalar(x, y);
  target[comp] = keep;
  return (hi - lo) / (2 * h);
}

}  // namespace

TEST_CASE("scalar arithmetic and precedence") {
  double x = 2.0;
  CHECK(Expression::parse("1 + 2 * 3", 1).eval_scalar(&x) == 7.0);
  CHECK(Expression::parse("(1 + 2) * 3", 1).eval_scalar(&x) == 9.0);
  CHECK(Expression::parse("2 ^ 3 ^ 1", 1).eval_scalar(&x) == 8.0);
  CHECK(Expression::parse("-x^2", 1).eval_scalar(&x) == -4.0);
  CHECK(Expression::parse("2^-1", 1).eval_scalar(&x) == 0.5);
  CHECK(Expression::parse("x^0.5", 1).eval_scalar(&x) == doctest::Approx(std::sqrt(2.0)));
  CHECK(Expression::parse("exp(0)", 1).eval_scalar(&x) == 1.0);
  CHECK(Expression::parse("norm2(-3)", 1).eval_scalar(&x) == 3.0);
  CHECK(Expression::parse("1e-2 + 1.5e2", 1).eval_scalar(&x) == doctest::Approx(150.01));
}

TEST_CASE("pair variables and vector shapes") {
  Expression g = Expression::parse("2*exp(-0.6*(x-y)^2)*(x-y)", 1);
  CHECK(!g.is_vector());
  CHECK(g.uses_y());
  double x = 1.0, y = 0.25;
  const double u = x - y;
  CHECK(g.eval_scalar(&x, &y) ==
        doctest::Approx(2.0 * std::exp(-0.6 * u * u) * u).epsilon(1e-14));

  Expression v = Expression::parse("(x - y) / (norm2(x - y) + 0.1)", 2);
  CHECK(v.is_vector());
  CHECK(v.value_size() == 2);
  double xv[2] = {1.0, 2.0}, yv[2] = {-1.0, 0.5};
  double out[2];
  v.eval(xv, yv, out);
  const double n = std::hypot(2.0, 1.5);
  CHECK(out[0] == doctest::Approx(2.0 / (n + 0.1)));
  CHECK(out[1] == doctest::Approx(1.5 / (n + 0.1)));

  Expression comp = v.component(1);
  CHECK(!comp.is_vector());
  CHECK(comp.eval_scalar(xv, yv) == doctest::Approx(out[1]));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(Expression::parse("x +", 1), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(x)", 1), ParseError);
  CHECK_THROWS_AS(Expression::parse("x2", 1), ParseError);      // beyond dimension
  CHECK_THROWS_AS(Expression::parse("x ^ y", 1), ParseError);   // non-constant exponent
  CHECK_THROWS_AS(Expression::parse("x * y", 2), ParseError);   // vector * vector
  CHECK_THROWS_AS(Expression::parse("x + x1", 2), ParseError);  // vector + scalar
  CHECK_THROWS_AS(Expression::parse("exp(x)", 2), ParseError);  // exp of vector
  CHECK_THROWS_AS(Expression::parse("1 / ", 1), ParseError);
  CHECK_THROWS_AS(Expression::parse("exp(x, x)", 1), ParseError);
  try {
    Expression::parse("x + bad", 1);
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("symbolic derivatives match finite differences") {
  CounterRng rng(77);
  std::uint64_t ctr = 0;

  // 1-D pair interaction.
  Expression g = Expression::parse("2*exp(-0.6*(x-y)^2)*(x-y)", 1);
  for (int trial = 0; trial < 50; ++trial) {
    double x = rng.uniform(ctr++, -2.0, 2.0);
    double y = rng.uniform(ctr++, -2.0, 2.0);
    for (char which : {'x', 'y'}) {
      const double analytic = g.derivative(which, 0).eval_scalar(&x, &y);
      CHECK(std::abs(analytic - fd(g, which, 0, &x, &y)) <= 1e-6 * (1.0 + std::abs(analytic)));
    }
  }

  // 2-D norm-based interaction away from the diagonal.
  Expression eta = Expression::parse(
      "(0.09 + 6*exp(-norm2(x-y)/50) - 6/(norm2(x-y) + 0.1)) * (y1 - x1)", 2);
  for (int trial = 0; trial < 50; ++trial) {
    double xv[2] = {rng.uniform(ctr++, -2.0, 2.0), rng.uniform(ctr++, -2.0, 2.0)};
    double yv[2] = {rng.uniform(ctr++, 2.5, 4.0), rng.uniform(ctr++, 2.5, 4.0)};
    for (char which : {'x', 'y'}) {
      for (int comp = 0; comp < 2; ++comp) {
        const double analytic = eta.derivative(which, comp).eval_scalar(xv, yv);
        CHECK(std::abs(analytic - fd(eta, which, comp, xv, yv)) <=
              1e-5 * (1.0 + std::abs(analytic)));
      }
    }
  }

  // Polynomial identity: d/dx (x^3 - 2x) = 3x^2 - 2 exactly.
  Expression p = Expression::parse("x^3 - 2*x", 1);
  Expression dp = p.derivative('x', 0);
  for (int trial = 0; trial < 20; ++trial) {
    double x = rng.uniform(ctr++, -3.0, 3.0);
    CHECK(dp.eval_scalar(&x) == doctest::Approx(3 * x * x - 2).epsilon(1e-14));
  }
}

TEST_CASE("printer round-trips through the parser") {
  const char* exprs[] = {"2*exp(-0.6*(x-y)^2)*(x-y)", "x^3 - 2*x + 1",
                         "norm2(x - y) + 0.5"};
  for (const char* text : exprs) {
    Expression e = Expression::parse(text, 1);
    Expression round = Expression::parse(e.str(), 1);
    CounterRng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      double x = rng.uniform(2 * trial, -2.0, 2.0);
      double y = rng.uniform(2 * trial + 1, -2.0, 2.0);
      CHECK(e.eval_scalar(&x, &y) == round.eval_scalar(&x, &y));
    }
  }
}
