#pragma once

#include <momentkit/types.hpp>

#include <functional>

namespace momentkit {

// Best uniform polynomial approximation of a continuous function on [a, b].
// The polynomial is stored in the Chebyshev basis of the interval; `error`
// is the sup norm of the final residual (an upper estimate of the true
// minimax error), `level` the equalized reference deviation (a lower
// estimate), and `points` the abscissae where the residual alternates in
// sign with magnitude `error` up to the certification tolerance.
struct BestApproxResult {
  int degree = 0;
  double a = -1.0;
  double b = 1.0;
  Vector coefficients;  // Chebyshev coefficients on [a, b]
  double error = 0.0;
  double level = 0.0;
  Vector points;  // equioscillation abscissae, increasing
  bool converged = false;
  int iterations = 0;

  double evaluate(double x) const;
};

// Exchange iterations from a Chebyshev-point reference. Converges when the
// residual sup norm and the reference deviation agree to `tol` relatively
// (or to roundoff for functions the degree represents exactly); exchange
// stagnation is reported by `converged = false` on the best iterate found,
// not by an exception. Requires 0 <= degree <= 48 and tol >= 1e-12.
BestApproxResult best_linf_poly(const std::function<double(double)>& f,
                                int degree, double a, double b,
                                double tol = 1e-10);

}  // namespace momentkit
