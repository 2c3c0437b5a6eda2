#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <momentkit/rng.hpp>
#include <momentkit/simplex.hpp>

#include <cmath>

using momentkit::LpOptions;
using momentkit::LpProblem;
using momentkit::LpResult;
using momentkit::LpStatus;
using momentkit::Matrix;
using momentkit::Vector;
using momentkit::solve_lp;

namespace {

// Optimality certificate for min c'x s.t. Ax = b, x >= 0:
// primal feasibility, dual feasibility (reduced costs >= 0), and a matching
// duality gap. Any solver output passing all three is provably optimal.
void check_certificate(const LpProblem& p, const LpResult& r, double tol = 1e-7) {
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(r.x.size() == p.a.cols());
  REQUIRE(r.y.size() == p.a.rows());
  CHECK(r.x.minCoeff() >= -tol);
  CHECK((p.a * r.x - p.b).cwiseAbs().maxCoeff() <= tol * (1.0 + p.b.cwiseAbs().maxCoeff()));
  const Vector reduced = p.c - p.a.transpose() * r.y;
  CHECK(reduced.minCoeff() >= -tol * (1.0 + p.c.cwiseAbs().maxCoeff()));
  CHECK(std::abs(p.c.dot(r.x) - p.b.dot(r.y)) <=
        tol * (1.0 + std::abs(p.c.dot(r.x))));
}

}  // namespace

TEST_CASE("two variable problem with slack") {
  // min -x1 - x2  s.t.  x1 + x2 + s = 1
  LpProblem p;
  p.a = Matrix::Ones(1, 3);
  p.b = Vector::Ones(1);
  p.c = Vector::Zero(3);
  p.c[0] = -1.0;
  p.c[1] = -1.0;

  const LpResult r = solve_lp(p);
  check_certificate(p, r);
  CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(r.x[0] + r.x[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.x[2] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("degenerate objective ties") {
  // min x3  s.t. x1 + x2 = 2, x1 - x2 = 0  ->  x = (1, 1, 0)
  LpProblem p;
  p.a = Matrix::Zero(2, 3);
  p.a(0, 0) = 1.0; p.a(0, 1) = 1.0;
  p.a(1, 0) = 1.0; p.a(1, 1) = -1.0;
  p.b = Vector::Zero(2);
  p.b[0] = 2.0;
  p.c = Vector::Zero(3);
  p.c[2] = 1.0;

  const LpResult r = solve_lp(p);
  check_certificate(p, r);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
  CHECK(r.objective == doctest::Approx(0.0));
}

TEST_CASE("infeasible system is reported with its residual") {
  // x1 + x2 = 1 and x1 + x2 = 3 cannot both hold with x >= 0.
  LpProblem p;
  p.a = Matrix::Ones(2, 2);
  p.b = Vector::Zero(2);
  p.b[0] = 1.0;
  p.b[1] = 3.0;
  p.c = Vector::Ones(2);

  const LpResult r = solve_lp(p);
  CHECK(r.status == LpStatus::Infeasible);
  CHECK(r.infeasibility > 0.5);
}

TEST_CASE("unbounded ray is detected") {
  // min -x1  s.t.  x1 - x2 = 0: push both to infinity.
  LpProblem p;
  p.a = Matrix::Zero(1, 2);
  p.a(0, 0) = 1.0;
  p.a(0, 1) = -1.0;
  p.b = Vector::Zero(1);
  p.c = Vector::Zero(2);
  p.c[0] = -1.0;

  const LpResult r = solve_lp(p);
  CHECK(r.status == LpStatus::Unbounded);
}

TEST_CASE("negative right-hand sides are handled by row flips") {
  // -x1 - x2 = -1 is the same feasible set as x1 + x2 = 1.
  LpProblem p;
  p.a = -Matrix::Ones(1, 3);
  p.a(0, 2) = -1.0;
  p.b = -Vector::Ones(1);
  p.c = Vector::Zero(3);
  p.c[0] = -2.0;
  p.c[1] = -1.0;

  const LpResult r = solve_lp(p);
  check_certificate(p, r);
  CHECK(r.objective == doctest::Approx(-2.0));
  CHECK(r.x[0] == doctest::Approx(1.0));
}

TEST_CASE("classic cycling instance terminates at the optimum") {
  // Beale's example: Dantzig pricing cycles without an anti-cycling rule.
  // min -0.75 x1 + 150 x2 - 0.02 x3 + 6 x4 with three equality rows after
  // slacks are appended.
  LpProblem p;
  p.a = Matrix::Zero(3, 7);
  p.a(0, 0) = 0.25;  p.a(0, 1) = -60.0;  p.a(0, 2) = -1.0 / 25.0; p.a(0, 3) = 9.0; p.a(0, 4) = 1.0;
  p.a(1, 0) = 0.5;   p.a(1, 1) = -90.0;  p.a(1, 2) = -1.0 / 50.0; p.a(1, 3) = 3.0; p.a(1, 5) = 1.0;
  p.a(2, 2) = 1.0;   p.a(2, 6) = 1.0;
  p.b = Vector::Zero(3);
  p.b[2] = 1.0;
  p.c = Vector::Zero(7);
  p.c[0] = -0.75;
  p.c[1] = 150.0;
  p.c[2] = -0.02;
  p.c[3] = 6.0;

  const LpResult r = solve_lp(p);
  check_certificate(p, r);
  CHECK(r.objective == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("redundant rows leave a harmless artificial in the basis") {
  // Second row duplicates the first; the basis matrix stays singular in the
  // original columns, so an artificial must remain parked at zero.
  LpProblem p;
  p.a = Matrix::Zero(2, 2);
  p.a(0, 0) = 1.0; p.a(0, 1) = 1.0;
  p.a(1, 0) = 1.0; p.a(1, 1) = 1.0;
  p.b = Vector::Ones(2);
  p.c = Vector::Zero(2);
  p.c[0] = 1.0;

  const LpResult r = solve_lp(p);
  check_certificate(p, r);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
}

TEST_CASE("random feasible problems satisfy optimality certificates") {
  momentkit::CounterRng rng{20240817u};
  std::uint64_t counter = 0;

  for (int trial = 0; trial < 40; ++trial) {
    const int m = 3 + trial % 6;
    const int n = m + 2 + trial % 9;

    LpProblem p;
    p.a = Matrix(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        p.a(i, j) = rng.uniform(counter++, -2.0, 2.0);
    // Feasibility by construction: b = A x0 with x0 >= 0.
    Vector x0(n);
    for (int j = 0; j < n; ++j) x0[j] = rng.uniform(counter++, 0.0, 3.0);
    p.b = p.a * x0;
    p.c = Vector(n);
    for (int j = 0; j < n; ++j) p.c[j] = rng.uniform(counter++, -1.0, 1.0);

    const LpResult r = solve_lp(p);
    if (r.status == LpStatus::Unbounded) continue;  // legitimately possible
    check_certificate(p, r);
    CHECK(r.objective <= p.c.dot(x0) + 1e-7 * (1.0 + std::abs(p.c.dot(x0))));
  }
}

TEST_CASE("bounded random problems always reach an optimum") {
  // Appending the simplex constraint sum(x) = s bounds every variable, so
  // unboundedness is impossible and each trial must certify optimality.
  momentkit::CounterRng rng{77123u};
  std::uint64_t counter = 0;

  for (int trial = 0; trial < 40; ++trial) {
    const int m = 2 + trial % 5;
    const int n = m + 3 + trial % 7;

    Matrix a(m + 1, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        a(i, j) = rng.uniform(counter++, -1.0, 1.0);
    a.row(m).setOnes();

    Vector x0(n);
    for (int j = 0; j < n; ++j) x0[j] = rng.uniform(counter++, 0.1, 2.0);

    LpProblem p;
    p.a = a;
    p.b = a * x0;
    p.c = Vector(n);
    for (int j = 0; j < n; ++j) p.c[j] = rng.uniform(counter++, -5.0, 5.0);

    const LpResult r = solve_lp(p);
    check_certificate(p, r);
    CHECK(r.objective <= p.c.dot(x0) + 1e-7 * (1.0 + std::abs(p.c.dot(x0))));
  }
}

TEST_CASE("tall systems with a unique feasible point") {
  // Square invertible A pins x exactly; the solver must return it whatever
  // the costs are.
  momentkit::CounterRng rng{9185u};
  std::uint64_t counter = 0;
  const int n = 6;
  Matrix a = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) += 0.3 * rng.uniform(counter++, -1.0, 1.0);
  Vector x0(n);
  for (int j = 0; j < n; ++j) x0[j] = rng.uniform(counter++, 0.5, 1.5);

  LpProblem p;
  p.a = a;
  p.b = a * x0;
  p.c = Vector(n);
  for (int j = 0; j < n; ++j) p.c[j] = rng.uniform(counter++, -1.0, 1.0);

  const LpResult r = solve_lp(p);
  check_certificate(p, r);
  CHECK((r.x - x0).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("iteration cap surfaces as a status") {
  LpProblem p;
  p.a = Matrix::Ones(1, 3);
  p.b = Vector::Ones(1);
  p.c = Vector::Zero(3);
  p.c[0] = -1.0;

  LpOptions opt;
  opt.max_iterations = 1;  // phase 1 alone cannot finish
  const LpResult r = solve_lp(p, opt);
  CHECK(r.status == LpStatus::IterationLimit);
}

TEST_CASE("empty problems are rejected") {
  LpProblem p;
  p.a = Matrix(0, 0);
  p.b = Vector(0);
  p.c = Vector(0);
  CHECK_THROWS_AS(solve_lp(p), std::invalid_argument);
}
