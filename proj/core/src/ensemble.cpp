#include "momentkit/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "momentkit/rng.hpp"

namespace momentkit {

AgentEnsemble sample_uniform_box(int n, const BoxDomain& box, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one agent");
  CounterRng rng(seed);
  const int d = box.dim();
  Matrix states(n, d);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a)
      states(i, a) = rng.uniform(static_cast<std::uint64_t>(i) * d + a, box.lower(a),
                                 box.upper(a));
  return AgentEnsemble{std::move(states), box};
}

namespace {

// Inserts the full RHS of the agent ODE at time t into `out`.
void eval_rhs(const DynamicsSpec& dyn, double t, const Matrix& states, Matrix& out,
              Matrix& scratch, Matrix& leader_pos) {
  out.setZero(states.rows(), states.cols());
  if (dyn.field) {
    dyn.field->value_batch(states, scratch);
    out += scratch;
  }
  if (dyn.interaction) {
    dyn.interaction->mean_field(states, scratch);
    out += scratch;
  }
  if (dyn.leader_influence && !dyn.leaders.empty()) {
    double buf[2];
    for (std::size_t j = 0; j < dyn.leaders.size(); ++j) {
      dyn.leaders[j].position(t, buf);
      for (int a = 0; a < states.cols(); ++a) leader_pos(static_cast<int>(j), a) = buf[a];
    }
    dyn.leader_influence->accumulate_sources(states, leader_pos, out);
  }
}

void check_states(const Matrix& states, const BoxDomain& inflated, double t) {
  const int n = static_cast<int>(states.rows());
  const int d = static_cast<int>(states.cols());
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      const double v = states(i, a);
      if (!std::isfinite(v))
        throw SimulationError(t, i, "agent " + std::to_string(i) +
                                        " became non-finite at t = " + std::to_string(t));
    }
    if (!inflated.contains(states.row(i).data()))
      throw SimulationError(t, i, "agent " + std::to_string(i) +
                                      " left the inflated domain at t = " + std::to_string(t));
  }
}

}  // namespace

Trajectory simulate(const AgentEnsemble& ensemble, const DynamicsSpec& dyn, double T,
                    double h, int store_every, double margin) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  if (T < h) throw std::invalid_argument("horizon shorter than one step");
  if (store_every < 1) throw std::invalid_argument("store_every must be >= 1");
  if (dyn.dim() != ensemble.dim())
    throw std::invalid_argument("dynamics dimension does not match ensemble");

  const int steps = static_cast<int>(std::ceil(T / h - 1e-9));
  const BoxDomain inflated = ensemble.domain.inflated(1.0 + margin);
  const int n = ensemble.count();
  const int d = ensemble.dim();
  const int n_leaders = static_cast<int>(dyn.leaders.size());

  // Leader tracks must live in the domain over the whole horizon.
  for (int j = 0; j < n_leaders; ++j) {
    if (dyn.leaders[j].dim() != d)
      throw std::invalid_argument("leader track dimension mismatch");
  }

  Matrix x = ensemble.states;
  check_states(x, inflated, 0.0);

  Matrix k1(n, d), k2(n, d), k3(n, d), k4(n, d), scratch(n, d), stage(n, d);
  Matrix leader_pos(std::max(n_leaders, 1), d);

  Trajectory traj;
  traj.step = h;
  const int stored = steps / store_every + 1 + (steps % store_every != 0 ? 1 : 0);
  traj.snapshots.reserve(stored);
  std::vector<double> times;
  times.reserve(stored);
  traj.snapshots.push_back(x);
  times.push_back(0.0);

  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    if (n_leaders > 0) {
      double buf[2];
      for (int j = 0; j < n_leaders; ++j) {
        dyn.leaders[j].position(t, buf);
        if (!inflated.contains(buf))
          throw SimulationError(t, -1, "leader " + std::to_string(j) +
                                           " left the domain at t = " + std::to_string(t));
      }
    }
    eval_rhs(dyn, t, x, k1, scratch, leader_pos);
    stage = x + (0.5 * h) * k1;
    eval_rhs(dyn, t + 0.5 * h, stage, k2, scratch, leader_pos);
    stage = x + (0.5 * h) * k2;
    eval_rhs(dyn, t + 0.5 * h, stage, k3, scratch, leader_pos);
    stage = x + h * k3;
    eval_rhs(dyn, t + h, stage, k4, scratch, leader_pos);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    check_states(x, inflated, (s + 1) * h);
    if ((s + 1) % store_every == 0 || s + 1 == steps) {
      traj.snapshots.push_back(x);
      times.push_back((s + 1) * h);
    }
  }

  traj.times = Eigen::Map<Vector>(times.data(), static_cast<Eigen::Index>(times.size()));
  return traj;
}

Vector empirical_moments(const Matrix& states, const KernelBasis& basis) {
  const int n = static_cast<int>(states.rows());
  const int d = basis.dim();
  if (states.cols() != d) throw std::invalid_argument("state dimension mismatch");
  const int m = basis.size();

  Matrix values(n, m);
  std::vector<double> x(d), vals(m);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) x[a] = states(i, a);
    if (!basis.domain().contains(x.data(), 1e-12))
      throw DomainViolation(i, "agent " + std::to_string(i) + " lies outside the kernel domain");
    basis.eval_point(x.data(), vals.data());
    for (int k = 0; k < m; ++k) values(i, k) = vals[k];
  }

  // Summing in sorted order makes the result independent of row order.
  Vector moments(m);
  std::vector<double> column(n);
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < n; ++i) column[i] = values(i, k);
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double v : column) acc += v;
    moments[k] = acc / n;
  }
  return moments;
}

Matrix empirical_moment_track(const Trajectory& traj, const KernelBasis& basis) {
  const int rows = static_cast<int>(traj.snapshots.size());
  Matrix track(rows, basis.size());
  for (int p = 0; p < rows; ++p)
    track.row(p) = empirical_moments(traj.snapshots[p], basis).transpose();
  return track;
}

}  // namespace momentkit
