#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "momentkit/dynamics.hpp"
#include "momentkit/kernel_basis.hpp"
#include "momentkit/reduced_model.hpp"

namespace momentkit {

enum class FitNorm { L2, Linf };

// Knobs shared by the three fits. Constraints bound logarithmic norms:
// kappa0 caps nu_2[A] (one-sided) for linear fits; kappa caps
// max(nu_2[X], nu_2[-X]) per Btilde_l (quadratic) or Gamma_r (leader). An
// empty kappa means unconstrained; a single entry broadcasts; +inf entries
// skip individual indices. Constrained problems run a projected first-order
// scheme (gradient steps with spectral clipping of the symmetric part) and
// stop when the objective change and the constraint violation both drop
// below tol, or the iteration budget runs out, in which case the report has
// converged = false and the remaining violation. Unconstrained sup-norm fits
// solve one linear program per kernel; a program that hits its pivot budget
// falls back to the least-squares coefficients for that kernel and clears
// the converged flag. linf_smoothing is the softmax temperature (relative to
// the target scale) used to smooth sup-norm objectives under constraints.
struct FitOptions {
  FitNorm norm = FitNorm::L2;
  std::optional<double> kappa0;
  std::vector<double> kappa;
  long max_iterations = 100000;
  double tol = 1e-10;
  double linf_smoothing = 1e-3;
};

// Fits grad phi_k . f in span{phi_l} for every kernel, row k of A holding
// the coefficients. Throws std::invalid_argument when the family is
// numerically singular on the grid, the grid is empty or mismatched, or an
// oversized sup-norm problem is requested.
std::pair<LinearModel, FitReport> fit_linear(const KernelBasis& basis,
                                             const VectorField& f,
                                             const QuadratureGrid& grid,
                                             const FitOptions& options = {});

// Fits grad phi_k(x) . g(x, y) in span{phi_l(x) phi_j(y)} over the implied
// product grid.
std::pair<QuadraticModel, FitReport> fit_quadratic(const KernelBasis& basis,
                                                   const PairField& g,
                                                   const QuadratureGrid& grid,
                                                   const FitOptions& options = {});

// Fits grad phi_k(x) . eta(x, y) in span{phi_l(x) psi_r(y)}; the psi family
// may differ from phi but must be evaluable on the grid points.
std::pair<LeaderModel, FitReport> fit_leader(const KernelBasis& phi,
                                             const KernelBasis& psi,
                                             const PairField& eta,
                                             const QuadratureGrid& grid,
                                             const FitOptions& options = {});

}  // namespace momentkit
