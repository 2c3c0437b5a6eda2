#pragma once

#include <cstdint>

#include "momentkit/box_domain.hpp"
#include "momentkit/dynamics.hpp"
#include "momentkit/kernel_basis.hpp"
#include "momentkit/types.hpp"

namespace momentkit {

// A population of N agents with states in a common box.
struct AgentEnsemble {
  Matrix states;  // N x d
  BoxDomain domain;

  int count() const { return static_cast<int>(states.rows()); }
  int dim() const { return static_cast<int>(states.cols()); }
};

// Fixed-step trajectory of the whole ensemble. times[0] = 0 and consecutive
// stored times differ by step * store_every.
struct Trajectory {
  Vector times;
  std::vector<Matrix> snapshots;
  double step = 0.0;

  const Matrix& terminal() const { return snapshots.back(); }
};

// Uniform i.i.d. states in the box; deterministic in (N, box, seed) and
// independent of evaluation order.
AgentEnsemble sample_uniform_box(int n, const BoxDomain& box, std::uint64_t seed);

// Integrates the agent ODE with classical 4th-order Runge-Kutta at fixed
// step h up to time T, storing every `store_every`-th state (and always the
// final one; T is rounded up to a whole number of steps). Interaction terms
// are averaged over agents (1/N); leader influence sums over tracks without
// scaling. Agents must stay inside the ensemble box inflated by `margin`
// (fraction of each side, default 5%): leaving it raises SimulationError, as
// does any non-finite state. Leader tracks are checked against the same
// inflated box.
Trajectory simulate(const AgentEnsemble& ensemble, const DynamicsSpec& dyn, double T,
                    double h, int store_every = 1, double margin = 0.05);

// Moment vector m_k = (1/N) sum_i phi_k(states.row(i)). Summands are added in
// sorted order, so the result is exactly invariant under row permutations.
// Throws DomainViolation if a state leaves the basis domain.
Vector empirical_moments(const Matrix& states, const KernelBasis& basis);

// Moments along a trajectory: row p holds empirical_moments(snapshots[p]).
Matrix empirical_moment_track(const Trajectory& traj, const KernelBasis& basis);

}  // namespace momentkit
