#pragma once

#include "momentkit/dynamics.hpp"
#include "momentkit/reduced_model.hpp"
#include "momentkit/types.hpp"

#include <vector>

namespace momentkit {

// Reduced moment trajectory; row i of values holds the moment vector at
// times[i].
struct MomentTrajectory {
  Vector times;
  Matrix values;
};

// Componentwise box the reduced moments are assumed to stay in.
struct MomentBox {
  Vector lower;
  Vector upper;
};

// Componentwise hull of the trajectory values. `inflate` widens each side
// about the center by that fraction of the half-width (0.1 = 10%), so a
// constant component keeps a degenerate interval.
MomentBox moment_hull(const MomentTrajectory& track, double inflate = 0.0);

// A-priori error bound curve together with the parameters that produced it.
struct ErrorBound {
  Vector times;
  Vector values;
  double rate = 0.0;  // contraction rate: nu, beta, or tau
  double eps_total = 0.0;
  double dm0 = 0.0;
};

// Fixed-step RK4 integration of m' = A m from m0 over [0, T]. The returned
// trajectory includes t = 0 and lands exactly on T. Throws DivergedError
// with the blow-up time if the state stops being finite.
MomentTrajectory integrate_linear(const LinearModel& model, const Vector& m0,
                                  double T, double h);

// Same for the bilinear closure m_k' = m^T B_k m. When `monitor` is given,
// `exit_time` (if non-null) receives the first recorded time the trajectory
// leaves the box, or +infinity if it never does; error bounds built on the
// box are only meaningful up to that time.
MomentTrajectory integrate_quadratic(const QuadraticModel& model,
                                     const Vector& m0, double T, double h,
                                     const MomentBox* monitor = nullptr,
                                     double* exit_time = nullptr);

// Time-varying linear flow m' = sum_j sum_r psi_r(y_j(t)) Gamma_r m, with the
// leader positions sampled at the RK4 stage times. Throws SimulationError
// (naming the leader) if a track leaves the kernel domain.
MomentTrajectory integrate_leader(const LeaderModel& model,
                                  const std::vector<LeaderTrack>& tracks,
                                  const Vector& m0, double T, double h);

// Combined closure m' = A m + (m^T B_k m)_k + sum_j sum_r psi_r(y_j(t))
// Gamma_r m. Null parts are dropped; at least one part is required, and every
// present part must match the state size. Tracks are only consulted when a
// leader model is present. Monitor and exit-time semantics follow
// integrate_quadratic.
MomentTrajectory integrate_reduced(const LinearModel* linear,
                                   const QuadraticModel* quadratic,
                                   const LeaderModel* leader,
                                   const std::vector<LeaderTrack>& tracks,
                                   const Vector& m0, double T, double h,
                                   const MomentBox* monitor = nullptr,
                                   double* exit_time = nullptr);

// dm0 * e^{rate t} + eps_total * (e^{rate t} - 1) / rate, with the rate = 0
// branch dm0 + eps_total * t taken for |rate| < 1e-12 (it is the limit, so
// the bound is continuous there). Inputs other than the rate must be
// nonnegative.
double bound_linear(double nu, double eps_total, double dm0, double t);
double bound_quadratic(double beta, double eps_total, double dm0, double t);

// The same curve evaluated at each entry of `times`.
ErrorBound bound_series(double rate, double eps_total, double dm0,
                        const Vector& times);

// Largest log norm of the bilinear closure over the box: since the log norm
// of c * Btilde is piecewise linear and convex in c, the maximum over
// [lower_l, upper_l] sits at an endpoint, so the sum of endpoint maxima is
// exact. The slice overload requires one bound pair per slice.
double estimate_beta(const std::vector<Matrix>& btilde, const MomentBox& box);
double estimate_beta(const QuadraticModel& model, const MomentBox& box);

struct LeaderBoundOptions {
  int samples_per_axis = 33;  // grid resolution of the position scan
  int track_samples = 257;    // samples of each track when ranging positions
  bool full_domain = false;   // scan all of K instead of visited ranges
};

// Contraction rate of the leader-driven flow: for each track, the largest
// log norm of sum_r psi_r(y) Gamma_r over a grid of positions the track
// visits on [0, horizon] (or all of K with full_domain), summed over tracks.
// Subadditivity of the log norm makes the sum an upper bound for the joint
// maximum, and positive homogeneity makes it exact when the ranges coincide.
double leader_rate(const LeaderModel& model,
                   const std::vector<LeaderTrack>& tracks, double horizon,
                   const LeaderBoundOptions& options = {});

// dm0 * e^{tau t} + n_leaders * eps_total * (e^{tau t} - 1) / tau with tau
// from leader_rate over [0, t]; eps_total is the per-leader fit error, so the
// leader count multiplies it.
double bound_leader(const LeaderModel& model,
                    const std::vector<LeaderTrack>& tracks, double eps_total,
                    double dm0, double t, int n_leaders,
                    const LeaderBoundOptions& options = {});

}  // namespace momentkit
