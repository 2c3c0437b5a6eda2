#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "momentkit/kernel_basis.hpp"
#include "momentkit/rng.hpp"

using namespace momentkit;

namespace {

BasisSpec gaussian_family_spec() {
  BasisSpec spec;
  spec.kind = BasisKind::GaussianMonomial;
  spec.domain = BoxDomain::interval(-2.0, 2.0);
  spec.centers = BasisSpec::equidistant_centers(-1.5, 1.5, 7);
  spec.sigma = 2.0 / 3.0;
  spec.orders = {0, 1};
  spec.constant_kernel = true;
  return spec;
}

// Central finite difference of kernel k along axis a.
double fd_gradient(const KernelBasis& basis, int k, Vector x, int a) {
  const double h = 1e-6 * std::max(1.0, std::abs(x[a]));
  Vector xp = x, xm = x;
  xp[a] += h;
  xm[a] -= h;
  return (basis.eval_one(k, xp.data()) - basis.eval_one(k, xm.data())) / (2 * h);
}

void check_gradients_match_fd(const KernelBasis& basis, std::uint64_t seed) {
  CounterRng rng(seed);
  const int d = basis.dim();
  std::uint64_t ctr = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(d);
    for (int a = 0; a < d; ++a) {
      // Interior points, 10% away from the boundary so FD stencils stay inside.
      const double lo = basis.domain().lower(a), hi = basis.domain().upper(a);
      const double pad = 0.05 * (hi - lo);
      x[a] = rng.uniform(ctr++, lo + pad, hi - pad);
    }
    for (int k = 0; k < basis.size(); ++k) {
      std::vector<double> grad(d);
      basis.eval_one(k, x.data(), grad.data());
      for (int a = 0; a < d; ++a) {
        const double fd = fd_gradient(basis, k, x, a);
        CHECK(std::abs(grad[a] - fd) <= 1e-6 * (1.0 + std::abs(grad[a])));
      }
    }
  }
}

}  // namespace

TEST_CASE("family sizes and constant kernels") {
  BasisSpec mono;
  mono.kind = BasisKind::Monomial;
  mono.domain = BoxDomain::interval(-2.0, 2.0);
  mono.degree = 14;
  KernelBasis b = make_basis(mono);
  CHECK(b.size() == 15);
  CHECK(b.constant_index() == 0);

  KernelBasis g = make_basis(gaussian_family_spec());
  CHECK(g.size() == 15);
  CHECK(g.constant_index() == 14);

  BasisSpec poly;
  poly.kind = BasisKind::Poly2D;
  poly.domain = BoxDomain::square(-2.0, 2.0);
  poly.degree = 7;
  KernelBasis p = make_basis(poly);
  CHECK(p.size() == 36);
  CHECK(p.constant_index() == 0);
  CHECK(p.exponents(0) == std::pair<int, int>{0, 0});
  CHECK(p.exponents(1) == std::pair<int, int>{0, 1});
  CHECK(p.exponents(2) == std::pair<int, int>{1, 0});
  CHECK(p.exponents(35) == std::pair<int, int>{7, 0});
}

TEST_CASE("make_basis rejects bad specs") {
  BasisSpec g = gaussian_family_spec();
  g.sigma = 0.0;
  CHECK_THROWS_AS(make_basis(g), std::invalid_argument);

  g = gaussian_family_spec();
  g.centers.push_back(5.0);
  CHECK_THROWS_AS(make_basis(g), std::invalid_argument);

  BasisSpec poly;
  poly.kind = BasisKind::Poly2D;
  poly.domain = BoxDomain::interval(-1.0, 1.0);
  poly.degree = 3;
  CHECK_THROWS_AS(make_basis(poly), std::invalid_argument);

  BasisSpec mono;
  mono.kind = BasisKind::Monomial;
  mono.domain = BoxDomain::square(-1.0, 1.0);
  CHECK_THROWS_AS(make_basis(mono), std::invalid_argument);
}

TEST_CASE("gaussian kernel value at its own center") {
  KernelBasis g = make_basis(gaussian_family_spec());
  // Order-0 kernel centered at -1.5 evaluated there: 1 / sqrt(2 pi sigma^2).
  Vector x(1);
  x << -1.5;
  const double expected = 1.0 / std::sqrt(2.0 * M_PI * (2.0 / 3.0) * (2.0 / 3.0));
  CHECK(g.eval_one(0, x.data()) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.59841).epsilon(1e-4));
  // Order-1 kernel at the same center multiplies by x.
  CHECK(g.eval_one(7, x.data()) == doctest::Approx(-1.5 * expected).epsilon(1e-12));
  // Trailing constant kernel.
  CHECK(g.eval_one(14, x.data()) == 1.0);
}

TEST_CASE("chebyshev values on the pulled-back interval") {
  BasisSpec spec;
  spec.kind = BasisKind::Chebyshev;
  spec.domain = BoxDomain::interval(-2.0, 2.0);
  spec.degree = 5;
  KernelBasis b = make_basis(spec);
  Vector hi(1), mid(1);
  hi << 2.0;
  mid << 0.0;
  for (int k = 0; k <= 5; ++k) CHECK(b.eval_one(k, hi.data()) == doctest::Approx(1.0));
  CHECK(b.eval_one(2, mid.data()) == doctest::Approx(-1.0));
  CHECK(b.eval_one(3, mid.data()) == doctest::Approx(0.0));

  // |T_k| <= 1 on a dense grid.
  for (int i = 0; i <= 1000; ++i) {
    Vector x(1);
    x << -2.0 + 4.0 * i / 1000.0;
    for (int k = 0; k <= 5; ++k) CHECK(std::abs(b.eval_one(k, x.data())) <= 1.0 + 1e-12);
  }
}

TEST_CASE("normalized monomials peak at one on the domain") {
  BasisSpec spec;
  spec.kind = BasisKind::NormalizedMonomial;
  spec.domain = BoxDomain::interval(0.0, 5.0);
  spec.degree = 9;
  KernelBasis b = make_basis(spec);
  for (int k = 0; k <= 9; ++k) {
    double mx = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      Vector x(1);
      x << 5.0 * i / 1000.0;
      mx = std::max(mx, std::abs(b.eval_one(k, x.data())));
    }
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("normalized monomials are monomials after the affine pullback") {
  BasisSpec norm;
  norm.kind = BasisKind::NormalizedMonomial;
  norm.domain = BoxDomain::interval(0.0, 5.0);
  norm.degree = 6;
  KernelBasis nb = make_basis(norm);

  BasisSpec mono;
  mono.kind = BasisKind::Monomial;
  mono.domain = BoxDomain::interval(-1.0, 1.0);
  mono.degree = 6;
  KernelBasis mb = make_basis(mono);

  for (int i = 0; i <= 50; ++i) {
    Vector x(1), u(1);
    x << 5.0 * i / 50.0;
    u << (2.0 * x[0] - 5.0) / 5.0;
    for (int k = 0; k <= 6; ++k)
      CHECK(nb.eval_one(k, x.data()) == mb.eval_one(k, u.data()));
  }
}

TEST_CASE("gradients match finite differences for every family") {
  check_gradients_match_fd(make_basis(gaussian_family_spec()), 11);

  BasisSpec mono;
  mono.kind = BasisKind::Monomial;
  mono.domain = BoxDomain::interval(-2.0, 2.0);
  mono.degree = 8;
  check_gradients_match_fd(make_basis(mono), 12);

  BasisSpec cheb;
  cheb.kind = BasisKind::Chebyshev;
  cheb.domain = BoxDomain::interval(-2.0, 2.0);
  cheb.degree = 8;
  check_gradients_match_fd(make_basis(cheb), 13);

  BasisSpec norm;
  norm.kind = BasisKind::NormalizedMonomial;
  norm.domain = BoxDomain::interval(-3.0, 1.0);
  norm.degree = 8;
  check_gradients_match_fd(make_basis(norm), 14);

  BasisSpec poly;
  poly.kind = BasisKind::Poly2D;
  poly.domain = BoxDomain::square(-2.0, 2.0);
  poly.degree = 7;
  check_gradients_match_fd(make_basis(poly), 15);
}

TEST_CASE("ill conditioned gram matrices are flagged") {
  BasisSpec mono;
  mono.kind = BasisKind::Monomial;
  mono.domain = BoxDomain::interval(-2.0, 2.0);
  mono.degree = 16;
  KernelBasis mb = make_basis(mono);
  CHECK(mb.degenerate());
  CHECK(mb.gram_condition() > 1e12);

  // Degree 14 sits just below the warning threshold on this domain.
  mono.degree = 14;
  KernelBasis m14 = make_basis(mono);
  CHECK(!m14.degenerate());
  CHECK(m14.gram_condition() > 1e11);

  BasisSpec cheb = mono;
  cheb.kind = BasisKind::Chebyshev;
  cheb.degree = 16;
  KernelBasis cb = make_basis(cheb);
  CHECK(!cb.degenerate());
  CHECK(cb.gram_condition() < 1e6);
}

TEST_CASE("eval_basis evaluates tables and rejects outside points") {
  KernelBasis g = make_basis(gaussian_family_spec());
  Matrix pts(3, 1);
  pts << -1.5, 0.0, 2.0;
  EvalTable table = eval_basis(g, pts);
  CHECK(table.values.rows() == 3);
  CHECK(table.values.cols() == 15);
  CHECK(table.gradients.size() == 1);
  CHECK(table.values(0, 0) == doctest::Approx(0.59841).epsilon(1e-4));
  CHECK(table.values(2, 14) == 1.0);

  Matrix bad(2, 1);
  bad << 0.0, 2.5;
  CHECK_THROWS_AS(eval_basis(g, bad), DomainViolation);
  try {
    eval_basis(g, bad);
  } catch (const DomainViolation& e) {
    CHECK(e.point_index() == 1);
  }
}

TEST_CASE("trapezoid grids integrate low order polynomials") {
  auto [grid1, w1] = trapezoid_grid(BoxDomain::interval(-1.0, 1.0), 201);
  CHECK(w1.sum() == doctest::Approx(2.0));
  double quad = 0.0;
  for (int i = 0; i < grid1.rows(); ++i) quad += w1[i] * grid1(i, 0) * grid1(i, 0);
  CHECK(quad == doctest::Approx(2.0 / 3.0).epsilon(1e-4));

  auto [grid2, w2] = trapezoid_grid(BoxDomain::square(0.0, 2.0), 41);
  CHECK(w2.sum() == doctest::Approx(4.0));
  double qi = 0.0;
  for (int i = 0; i < grid2.rows(); ++i) qi += w2[i] * grid2(i, 0) * grid2(i, 1);
  CHECK(qi == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("equidistant centers span the requested interval") {
  auto c = BasisSpec::equidistant_centers(-1.5, 1.5, 7);
  REQUIRE(c.size() == 7);
  CHECK(c.front() == doctest::Approx(-1.5));
  CHECK(c.back() == doctest::Approx(1.5));
  for (int i = 1; i < 7; ++i) CHECK(c[i] - c[i - 1] == doctest::Approx(0.5));
}
