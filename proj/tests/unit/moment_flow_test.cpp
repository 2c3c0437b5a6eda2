#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <momentkit/dynamics.hpp>
#include <momentkit/fit.hpp>
#include <momentkit/moment_flow.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

using momentkit::BasisKind;
using momentkit::BasisSpec;
using momentkit::BoxDomain;
using momentkit::DivergedError;
using momentkit::KernelBasis;
using momentkit::LeaderModel;
using momentkit::LeaderTrack;
using momentkit::LinearModel;
using momentkit::Matrix;
using momentkit::MomentBox;
using momentkit::MomentTrajectory;
using momentkit::QuadraticModel;
using momentkit::SimulationError;
using momentkit::Vector;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

BasisSpec monomials(int degree, double a = -1.0, double b = 1.0) {
  BasisSpec spec;
  spec.kind = BasisKind::Monomial;
  spec.domain = BoxDomain::interval(a, b);
  spec.degree = degree;
  return spec;
}

QuadraticModel scalar_quadratic(double coefficient) {
  return momentkit::make_quadratic_model({Matrix::Constant(1, 1, coefficient)});
}

LeaderTrack constant_track(double position) {
  Vector times(2);
  times << 0.0, 1e6;
  Matrix points(2, 1);
  points << position, position;
  return LeaderTrack::waypoints(times, points);
}

}  // namespace

TEST_CASE("zero drift leaves the moments constant") {
  LinearModel model{Matrix::Zero(3, 3)};
  Vector m0(3);
  m0 << 1.0, -0.5, 2.0;
  const MomentTrajectory track = momentkit::integrate_linear(model, m0, 2.0, 0.01);
  CHECK(track.times[0] == 0.0);
  CHECK(track.times[track.times.size() - 1] == 2.0);
  for (long i = 0; i < track.times.size(); ++i)
    CHECK((track.values.row(i).transpose() - m0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar decay hits the analytic exponential") {
  LinearModel model{Matrix::Constant(1, 1, -1.0)};
  const MomentTrajectory track = momentkit::integrate_linear(
      model, Vector::Ones(1), 1.0, 1e-3);
  const double final = track.values(track.values.rows() - 1, 0);
  CHECK(final == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("fitted decay model decouples into exponential ladders") {
  const KernelBasis basis = momentkit::make_basis(monomials(3));
  const auto field = momentkit::make_catalog_field("linear_decay", 1);
  const auto grid = momentkit::default_fit_grid(basis.domain(), false);
  const auto [model, report] = momentkit::fit_linear(basis, *field, grid);

  // Moments of the uniform density on [-1, 1].
  Vector m0(4);
  m0 << 1.0, 0.0, 1.0 / 3.0, 0.0;
  const MomentTrajectory track = momentkit::integrate_linear(model, m0, 2.0, 1e-3);
  for (long i = 0; i < track.times.size(); i += 50) {
    const double t = track.times[i];
    for (int k = 0; k < 4; ++k)
      CHECK(track.values(i, k) ==
            doctest::Approx(m0[k] * std::exp(-k * t)).epsilon(1e-6));
  }
  // The constant kernel is matched exactly, so its moment must stay pinned.
  CHECK((track.values.col(0).array() - 1.0).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("step size and horizon are validated") {
  LinearModel model{Matrix::Zero(2, 2)};
  const Vector m0 = Vector::Ones(2);
  CHECK_THROWS_AS(momentkit::integrate_linear(model, m0, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(momentkit::integrate_linear(model, m0, -1.0, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(momentkit::integrate_linear(model, Vector::Ones(3), 1.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("final step lands exactly on the horizon") {
  LinearModel model{Matrix::Zero(1, 1)};
  const MomentTrajectory track =
      momentkit::integrate_linear(model, Vector::Ones(1), 1.0, 0.3);
  CHECK(track.times.size() == 5);
  CHECK(track.times[4] == 1.0);
  for (long i = 1; i < track.times.size(); ++i)
    CHECK(track.times[i] > track.times[i - 1]);
}

// ---------------------------------------------------------------------------

TEST_CASE("bilinear closure reproduces the analytic reciprocal decay") {
  const QuadraticModel model = scalar_quadratic(-1.0);
  const MomentTrajectory track =
      momentkit::integrate_quadratic(model, Vector::Ones(1), 1.0, 1e-3);
  const double final = track.values(track.values.rows() - 1, 0);
  CHECK(final == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("zero interaction slices leave the moments constant") {
  QuadraticModel model = momentkit::make_quadratic_model(
      {Matrix::Zero(2, 2), Matrix::Zero(2, 2)});
  Vector m0(2);
  m0 << 1.0, 0.25;
  double exit = -1.0;
  MomentBox box{Vector::Zero(2), Vector::Constant(2, 2.0)};
  const MomentTrajectory track =
      momentkit::integrate_quadratic(model, m0, 1.0, 0.01, &box, &exit);
  for (long i = 0; i < track.times.size(); ++i)
    CHECK((track.values.row(i).transpose() - m0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(exit == kInf);
}

TEST_CASE("box monitoring reports the first exit time") {
  const QuadraticModel model = scalar_quadratic(-1.0);
  MomentBox box{Vector::Constant(1, 0.6), Vector::Constant(1, 1.5)};
  double exit = -1.0;
  momentkit::integrate_quadratic(model, Vector::Ones(1), 2.0, 1e-3, &box, &exit);
  // 1/(1+t) crosses 0.6 at t = 2/3.
  CHECK(exit == doctest::Approx(2.0 / 3.0).epsilon(3e-3));

  // Starting outside the box exits immediately.
  MomentBox tight{Vector::Constant(1, 0.0), Vector::Constant(1, 0.5)};
  momentkit::integrate_quadratic(model, Vector::Ones(1), 1.0, 0.01, &tight, &exit);
  CHECK(exit == 0.0);
}

TEST_CASE("finite-time blow-up raises a diverged error with its time") {
  const QuadraticModel model = scalar_quadratic(1.0);
  try {
    momentkit::integrate_quadratic(model, Vector::Ones(1), 3.0, 1e-3);
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    CHECK(e.time() > 0.9);
    CHECK(e.time() < 1.2);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("zero influence leaves the leader-driven moments constant") {
  const KernelBasis psi = momentkit::make_basis(monomials(0));
  LeaderModel model{{Matrix::Zero(3, 3)}, psi};
  Vector m0(3);
  m0 << 1.0, 0.2, -0.4;
  const MomentTrajectory track = momentkit::integrate_leader(
      model, {constant_track(0.0)}, m0, 1.0, 0.01);
  for (long i = 0; i < track.times.size(); ++i)
    CHECK((track.values.row(i).transpose() - m0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant unit influence reduces to matrix exponential decay") {
  const KernelBasis psi = momentkit::make_basis(monomials(0));
  LeaderModel model{{Matrix(-Matrix::Identity(3, 3))}, psi};
  Vector m0(3);
  m0 << 1.0, -2.0, 0.5;

  const MomentTrajectory one = momentkit::integrate_leader(
      model, {constant_track(0.25)}, m0, 1.0, 1e-3);
  const Vector last_one = one.values.row(one.values.rows() - 1).transpose();
  CHECK((last_one - std::exp(-1.0) * m0).cwiseAbs().maxCoeff() <= 1e-8);

  // Two identical leaders double the rate.
  const MomentTrajectory two = momentkit::integrate_leader(
      model, {constant_track(0.25), constant_track(-0.5)}, m0, 1.0, 1e-3);
  const Vector last_two = two.values.row(two.values.rows() - 1).transpose();
  CHECK((last_two - std::exp(-2.0) * m0).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("a leader that leaves the kernel domain is an error") {
  const KernelBasis psi = momentkit::make_basis(monomials(0));
  LeaderModel model{{Matrix(-Matrix::Identity(2, 2))}, psi};
  Vector times(2);
  times << 0.0, 5.0;
  Matrix points(2, 1);
  points << 0.0, 10.0;
  const LeaderTrack escape = LeaderTrack::waypoints(times, points);

  CHECK_THROWS_AS(momentkit::integrate_leader(model, {escape}, Vector::Ones(2),
                                              5.0, 0.01),
                  SimulationError);
  CHECK_THROWS_AS(momentkit::leader_rate(model, {escape}, 5.0),
                  SimulationError);
}

// ---------------------------------------------------------------------------

TEST_CASE("error bound formula matches its closed forms") {
  CHECK(momentkit::bound_linear(0.0, 0.7, 0.0, 2.0) ==
        doctest::Approx(1.4).epsilon(1e-12));
  CHECK(momentkit::bound_linear(-2.0, 1.0, 0.0, 1.0) ==
        doctest::Approx(0.4323323583816936).epsilon(1e-12));
  // Far horizon with negative rate approaches eps/(-rate).
  CHECK(momentkit::bound_linear(-1.0, 1.0, 0.0, 100.0) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(momentkit::bound_quadratic(-2.0, 1.0, 0.0, 1.0) ==
        momentkit::bound_linear(-2.0, 1.0, 0.0, 1.0));
}

TEST_CASE("negative-rate bounds respect the asymptote") {
  for (double nu : {-0.25, -1.0, -3.0})
    for (double t : {0.1, 1.0, 10.0, 1000.0})
      CHECK(momentkit::bound_linear(nu, 2.0, 0.3, t) <=
            0.3 + 2.0 / (-nu) + 1e-12);
}

TEST_CASE("bound is continuous across the zero-rate branch") {
  const double at_zero = momentkit::bound_linear(0.0, 1.0, 1.0, 5.0);
  CHECK(std::abs(momentkit::bound_linear(1e-13, 1.0, 1.0, 5.0) - at_zero) <
        1e-9);
  CHECK(std::abs(momentkit::bound_linear(-1e-13, 1.0, 1.0, 5.0) - at_zero) <
        1e-9);
  // Just past the branch point the formula itself is used and still close.
  CHECK(std::abs(momentkit::bound_linear(2e-12, 1.0, 1.0, 5.0) - at_zero) <
        1e-9);
}

TEST_CASE("bound grows with every parameter") {
  const double eps_grid[] = {0.0, 0.5, 1.0, 2.0};
  const double dm_grid[] = {0.0, 0.1, 1.0};
  const double nu_grid[] = {-3.0, -1.0, -1e-13, 0.0, 1e-13, 0.5, 2.0};

  double prev = -1.0;
  for (double nu : nu_grid) {
    const double value = momentkit::bound_linear(nu, 1.0, 0.5, 2.0);
    CHECK(value >= prev - 1e-12);
    prev = value;
  }
  for (double t : {0.5, 2.0}) {
    double prev_eps = -1.0;
    for (double eps : eps_grid) {
      const double value = momentkit::bound_linear(-1.0, eps, 0.5, t);
      CHECK(value >= prev_eps);
      prev_eps = value;
    }
    double prev_dm = -1.0;
    for (double dm : dm_grid) {
      const double value = momentkit::bound_linear(-1.0, 1.0, dm, t);
      CHECK(value >= prev_dm);
      prev_dm = value;
    }
  }
  CHECK_THROWS_AS(momentkit::bound_linear(0.0, -1.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(momentkit::bound_linear(0.0, 1.0, 0.0, -1.0),
                  std::invalid_argument);
}

TEST_CASE("bound series evaluates the same curve pointwise") {
  Vector times(4);
  times << 0.0, 0.5, 1.0, 3.0;
  const momentkit::ErrorBound series =
      momentkit::bound_series(0.3, 0.8, 0.0, times);
  for (long i = 0; i < times.size(); ++i)
    CHECK(series.values[i] ==
          momentkit::bound_linear(0.3, 0.8, 0.0, times[i]));
  for (long i = 1; i < times.size(); ++i)
    CHECK(series.values[i] >= series.values[i - 1]);
  CHECK(series.rate == 0.3);
  CHECK(series.eps_total == 0.8);
}

// ---------------------------------------------------------------------------

TEST_CASE("closure growth rate maximizes over box endpoints") {
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(momentkit::estimate_beta({eye},
                                 MomentBox{Vector::Zero(1), Vector::Ones(1)}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(momentkit::estimate_beta({eye}, MomentBox{Vector::Constant(1, -2.0),
                                                  Vector::Constant(1, -1.0)}) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(momentkit::estimate_beta({Matrix::Zero(2, 2), Matrix::Zero(2, 2)},
                                 MomentBox{Vector::Zero(2), Vector::Ones(2)}) ==
        0.0);
  CHECK_THROWS_AS(momentkit::estimate_beta({eye}, MomentBox{Vector::Ones(1),
                                                            Vector::Zero(1)}),
                  std::invalid_argument);
}

TEST_CASE("trajectory hull feeds the closure rate estimate") {
  const QuadraticModel model = scalar_quadratic(-1.0);
  const MomentTrajectory track =
      momentkit::integrate_quadratic(model, Vector::Ones(1), 1.0, 1e-3);
  const MomentBox hull = momentkit::moment_hull(track);
  CHECK(hull.upper[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hull.lower[0] == doctest::Approx(0.5).epsilon(1e-6));

  // d/dm (-m^2) = -2m lies in [-2, -1] over the hull, so the box estimate
  // recovers the true worst-case rate -1 at the upper-left endpoint.
  CHECK(momentkit::estimate_beta(model, hull) ==
        doctest::Approx(-1.0).epsilon(1e-6));

  const MomentBox wide = momentkit::moment_hull(track, 0.1);
  CHECK(wide.lower[0] < hull.lower[0]);
  CHECK(wide.upper[0] > hull.upper[0]);
  CHECK(momentkit::estimate_beta(model, wide) >=
        momentkit::estimate_beta(model, hull));
}

TEST_CASE("leader bound reduces to the constant-coefficient formula") {
  const KernelBasis psi = momentkit::make_basis(monomials(0));
  LeaderModel model{{Matrix(-Matrix::Identity(3, 3))}, psi};
  const std::vector<LeaderTrack> tracks = {constant_track(0.1)};

  CHECK(momentkit::leader_rate(model, tracks, 2.0) ==
        doctest::Approx(-1.0).epsilon(1e-12));

  for (double t : {0.5, 1.0, 4.0}) {
    const double expected = 0.7 * std::exp(-t) + 0.2 * (1.0 - std::exp(-t));
    CHECK(momentkit::bound_leader(model, tracks, 0.2, 0.7, t, 1) ==
          doctest::Approx(expected).epsilon(1e-9));
  }

  // Zero influence with a perfect fit keeps the initial mismatch only.
  LeaderModel idle{{Matrix::Zero(3, 3)}, psi};
  CHECK(momentkit::bound_leader(idle, tracks, 0.0, 0.7, 3.0, 1) ==
        doctest::Approx(0.7).epsilon(1e-12));

  // Doubling the leader count doubles the eps term, not the dm0 term.
  const double one = momentkit::bound_leader(model, tracks, 0.2, 0.7, 1.0, 1);
  const double two = momentkit::bound_leader(model, tracks, 0.2, 0.7, 1.0, 2);
  CHECK(two - one == doctest::Approx(0.2 * (1.0 - std::exp(-1.0))).epsilon(1e-9));
}

TEST_CASE("leader rate scans the positions the tracks actually visit") {
  // psi = {1, y} on [-1, 1]; Gamma_0 = 0, Gamma_1 = I means the system
  // matrix is y * I with log norm y, so the visited maximum decides.
  const KernelBasis psi = momentkit::make_basis(monomials(1));
  LeaderModel model{{Matrix::Zero(2, 2), Matrix::Identity(2, 2)}, psi};

  Vector times(2);
  times << 0.0, 1.0;
  Matrix points(2, 1);
  points << -0.5, 0.25;
  const LeaderTrack sweep = LeaderTrack::waypoints(times, points);

  CHECK(momentkit::leader_rate(model, {sweep}, 1.0) ==
        doctest::Approx(0.25).epsilon(1e-9));
  // Only half the sweep has happened by t = 0.5.
  CHECK(momentkit::leader_rate(model, {sweep}, 0.5) ==
        doctest::Approx(-0.125).epsilon(1e-9));

  momentkit::LeaderBoundOptions full;
  full.full_domain = true;
  CHECK(momentkit::leader_rate(model, {sweep}, 1.0, full) ==
        doctest::Approx(1.0).epsilon(1e-9));
}
