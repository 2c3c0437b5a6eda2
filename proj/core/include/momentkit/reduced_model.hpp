#pragma once

#include <vector>

#include "momentkit/kernel_basis.hpp"
#include "momentkit/types.hpp"

namespace momentkit {

// Quadrature rule over a box domain used to discretize fit norms. For pair
// fits the product rule over K x K is implied: the same one-sided grid serves
// both arguments.
struct QuadratureGrid {
  Matrix points;   // n x d, inside the domain
  Vector weights;  // n, nonnegative, summing to the box volume
};

// Tensor trapezoid rule with per_axis points per axis.
QuadratureGrid make_quadrature(const BoxDomain& box, int per_axis);

// Default rules: 401 points per axis for one-sided 1-D fits, 61 per axis for
// 1-D pair fits (61 x 61 product) and one-sided 2-D fits, 21 per axis for
// 2-D pair fits where the implied product grid is four-dimensional.
QuadratureGrid default_fit_grid(const BoxDomain& box, bool pair_fit);

// Reduced moment dynamics m' = A m. a(k, l) multiplies m_l in the equation
// for moment k.
struct LinearModel {
  Matrix a;
};

// Reduced dynamics m'_k = m' B_k m. b[k](l, j) is the coefficient of
// phi_l(x) phi_j(y) in the fit of grad phi_k(x) . g(x, y). btilde[l](i, j) =
// b[i](l, j) + b[i](j, l) is the moment-box sensitivity matrix used by
// stability constraints and error bounds; it is kept exactly consistent with
// b by construction.
struct QuadraticModel {
  std::vector<Matrix> b;
  std::vector<Matrix> btilde;
};

// Builds the model from the B_k slices, deriving btilde.
QuadraticModel make_quadratic_model(std::vector<Matrix> b);

// Leader-driven term: m' += sum_j sum_r psi_r(y_j) Gamma_r m over leader
// positions y_j. gamma[r](k, l) multiplies psi_r(y) m_l in the equation for
// moment k. The psi family is carried so the model can be integrated without
// outside bookkeeping.
struct LeaderModel {
  std::vector<Matrix> gamma;
  KernelBasis psi;
};

// Outcome of one fit. Residuals are measured on the fitting grid: sup is the
// largest absolute residual, l2 the weight-accumulated root square error, per
// kernel. eps_total = sqrt(sum of squared sup residuals) feeds the moment
// error bounds. log_norms holds nu_2[A] for linear fits and, per index,
// max(nu_2[X], nu_2[-X]) of Btilde_l or Gamma_r for the pair fits. When a
// constrained solve stops without meeting its tolerances, converged is false
// and constraint_violation carries the remaining gap.
struct FitReport {
  Vector sup_residuals;
  Vector l2_residuals;
  double eps_total = 0.0;
  Vector log_norms;
  double objective = 0.0;
  long iterations = 0;
  bool converged = true;
  double constraint_violation = 0.0;
};

}  // namespace momentkit
