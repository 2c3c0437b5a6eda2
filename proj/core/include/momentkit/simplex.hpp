#pragma once

#include "momentkit/types.hpp"

namespace momentkit {

// Linear program in standard form:  min c^T x  s.t.  A x = b, x >= 0.
struct LpProblem {
  Matrix a;
  Vector b;
  Vector c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Vector x;           // primal solution (Optimal only)
  Vector y;           // duals of the equality rows (Optimal only)
  double objective = 0.0;
  long iterations = 0;
  // Phase-1 residual when Infeasible; the equality residual of the returned
  // point when Optimal.
  double infeasibility = 0.0;
};

struct LpOptions {
  long max_iterations = 0;   // 0 = automatic (50 * (rows + cols) + 10000)
  double pivot_tol = 1e-9;   // minimum |pivot| accepted
  double cost_tol = 1e-9;    // reduced-cost optimality tolerance
  int refactor_every = 64;   // basis refactorization cadence
};

// Dense two-phase revised simplex. Dantzig pricing with an automatic switch
// to Bland's rule after a long stall, product-form basis updates with
// periodic refactorization. Intended for the moderate problem sizes produced
// by grid discretizations (up to a few thousand rows/columns).
LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace momentkit
