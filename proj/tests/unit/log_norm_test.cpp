#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "momentkit/dynamics.hpp"
#include "momentkit/kernel_basis.hpp"
#include "momentkit/log_norm.hpp"
#include "momentkit/rng.hpp"

using namespace momentkit;

TEST_CASE("log norm of simple matrices") {
  Matrix neg_i = -Matrix::Identity(2, 2);
  CHECK(log_norm_2(neg_i) == doctest::Approx(-1.0));

  Matrix nilpotent(2, 2);
  nilpotent << 0, 1, 0, 0;
  CHECK(log_norm_2(nilpotent) == doctest::Approx(0.5));

  Matrix diag = Vector::LinSpaced(3, 0.0, -2.0).asDiagonal();
  CHECK(log_norm_2(diag) == doctest::Approx(0.0));

  CHECK_THROWS_AS(log_norm_2(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("log norm dominates matrix exponential growth") {
  CounterRng rng(31);
  std::uint64_t ctr = 0;
  for (int trial = 0; trial < 25; ++trial) {
    Matrix a(4, 4);
    for (int i = 0; i < 16; ++i) a(i / 4, i % 4) = rng.uniform(ctr++, -2.0, 2.0);
    const double nu = log_norm_2(a);
    for (double t : {0.1, 0.5, 1.0}) {
      const Matrix e = (t * a).exp();
      const double opnorm = e.jacobiSvd().singularValues()(0);
      CHECK(opnorm <= std::exp(t * nu) * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("lipschitz log constant over a box") {
  auto [grid1, w1] = trapezoid_grid(BoxDomain::interval(-1.0, 1.0), 201);

  auto decay = make_catalog_field("linear_decay", 1);
  CHECK(lipschitz_log_constant(*decay, BoxDomain::interval(-1.0, 1.0), grid1) ==
        doctest::Approx(-1.0));

  ExpressionField square(Expression::parse("x^2", 1));
  auto [grid01, w01] = trapezoid_grid(BoxDomain::interval(0.0, 1.0), 201);
  CHECK(lipschitz_log_constant(square, BoxDomain::interval(0.0, 1.0), grid01) ==
        doctest::Approx(2.0));

  ExpressionField rotation(Expression::parse("(x2, -x1)", 2));
  auto [grid2, w2] = trapezoid_grid(BoxDomain::square(-1.0, 1.0), 21);
  CHECK(lipschitz_log_constant(rotation, BoxDomain::square(-1.0, 1.0), grid2) ==
        doctest::Approx(0.0));
}

TEST_CASE("refining the grid never decreases the constant") {
  ExpressionField cubic(Expression::parse("x^3 - x", 1));
  const BoxDomain box = BoxDomain::interval(-2.0, 2.0);
  double prev = -std::numeric_limits<double>::infinity();
  for (int pts : {11, 21, 41, 81, 161}) {
    auto [grid, w] = trapezoid_grid(box, pts);
    const double cur = lipschitz_log_constant(cubic, box, grid);
    CHECK(cur >= prev - 1e-14);
    prev = cur;
  }
  // Max of 3x^2 - 1 on [-2,2] is 11, attained at the endpoints of every grid.
  CHECK(prev == doctest::Approx(11.0));
}

TEST_CASE("fields without jacobians are rejected") {
  class Opaque final : public VectorField {
   public:
    int dim() const override { return 1; }
    void value(const double* x, double* out) const override { out[0] = std::sin(x[0]); }
  };
  Opaque f;
  auto [grid, w] = trapezoid_grid(BoxDomain::interval(0.0, 1.0), 11);
  CHECK_THROWS_AS(lipschitz_log_constant(f, BoxDomain::interval(0.0, 1.0), grid),
                  std::invalid_argument);
}
