#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <momentkit/remez.hpp>

#include <cmath>
#include <stdexcept>

using momentkit::BestApproxResult;
using momentkit::best_linf_poly;

namespace {

double factorial(int n) {
  double value = 1.0;
  for (int j = 2; j <= n; ++j) value *= j;
  return value;
}

// Residual of the returned approximation at one of its reported points.
double residual_at(const BestApproxResult& r, double x,
                   const std::function<double(double)>& f) {
  return f(x) - r.evaluate(x);
}

}  // namespace

TEST_CASE("degree-two approximation of the cube is the scaled identity") {
  const auto cube = [](double x) { return x * x * x; };
  const BestApproxResult r = best_linf_poly(cube, 2, -1.0, 1.0, 1e-10);
  REQUIRE(r.converged);
  CHECK(r.error == doctest::Approx(0.25).epsilon(1e-8));
  // x^3 - (3/4) x = T_3(x)/4, so the approximant is (3/4) x.
  for (const double x : {-0.9, -0.3, 0.0, 0.4, 1.0})
    CHECK(r.evaluate(x) == doctest::Approx(0.75 * x).epsilon(1e-7));
  REQUIRE(r.points.size() == 4);
  CHECK(r.points[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(r.points[1] == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(r.points[2] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.points[3] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("best constant for an odd function is zero") {
  const auto identity = [](double x) { return x; };
  const BestApproxResult r = best_linf_poly(identity, 0, -1.0, 1.0, 1e-10);
  REQUIRE(r.converged);
  CHECK(r.error == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.evaluate(0.3)) <= 1e-9);
}

TEST_CASE("monic power errors halve with the degree") {
  for (int n = 0; n <= 12; ++n) {
    const auto f = [n](double x) { return std::pow(x, n + 1); };
    const BestApproxResult r = best_linf_poly(f, n, -1.0, 1.0, 1e-9);
    REQUIRE(r.converged);
    CHECK(r.error == doctest::Approx(std::pow(2.0, -n)).epsilon(1e-8));
  }
}

TEST_CASE("polynomials below the degree certify a vanishing error") {
  const auto f = [](double x) { return 1.0 + 2.0 * x - 3.0 * x * x * x; };
  const BestApproxResult r = best_linf_poly(f, 5, -1.0, 1.0, 1e-10);
  REQUIRE(r.converged);
  CHECK(r.error <= 1e-12);
  CHECK(r.evaluate(0.7) == doctest::Approx(f(0.7)).epsilon(1e-12));
}

TEST_CASE("equioscillation certificate for the exponential") {
  const auto f = [](double x) { return std::exp(x); };
  const BestApproxResult r = best_linf_poly(f, 8, -1.0, 1.0, 1e-9);
  REQUIRE(r.converged);
  REQUIRE(r.points.size() == 10);
  CHECK(r.error >= r.level);
  CHECK(r.error - r.level <= 1e-9 * (1.0 + r.error));

  double previous = -1.1;
  double sign = 0.0;
  for (long i = 0; i < r.points.size(); ++i) {
    const double x = r.points[i];
    CHECK(x > previous);
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
    previous = x;
    const double res = residual_at(r, x, f);
    CHECK(std::abs(res) >= r.error - 1e-9 * (1.0 + r.error) - 1e-13);
    if (i > 0) CHECK(res * sign < 0.0);
    sign = res;
  }
}

TEST_CASE("degree zero on a shifted interval averages the endpoints") {
  const auto f = [](double x) { return x; };
  const BestApproxResult r = best_linf_poly(f, 0, 2.0, 6.0, 1e-10);
  REQUIRE(r.converged);
  CHECK(r.error == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.evaluate(3.1) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("smoothness bound dominates the computed errors") {
  // E_n(f) <= (pi/2)^k (n-k)!/n! sup|f^(k)| with k = 3 and f = exp, whose
  // third derivative has sup norm e on [-1, 1].
  const auto f = [](double x) { return std::exp(x); };
  const double c = std::pow(M_PI / 2.0, 3) * std::exp(1.0);
  for (int n = 4; n <= 12; ++n) {
    const BestApproxResult r = best_linf_poly(f, n, -1.0, 1.0, 1e-9);
    REQUIRE(r.converged);
    const double bound = c * factorial(n - 3) / factorial(n);
    CHECK(r.error <= bound);
  }
}

TEST_CASE("invalid inputs are rejected") {
  const auto f = [](double x) { return x; };
  CHECK_THROWS_AS(best_linf_poly(f, -1, -1.0, 1.0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(best_linf_poly(f, 49, -1.0, 1.0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(best_linf_poly(f, 3, 1.0, -1.0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(best_linf_poly(f, 3, -1.0, 1.0, 1e-13), std::invalid_argument);
  const auto bad = [](double x) { return std::log(x); };
  CHECK_THROWS_AS(best_linf_poly(bad, 3, -1.0, 1.0, 1e-10), std::invalid_argument);
}
