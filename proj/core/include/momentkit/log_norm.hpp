#pragma once

#include "momentkit/box_domain.hpp"
#include "momentkit/types.hpp"

namespace momentkit {

class VectorField;

// Logarithmic 2-norm: largest eigenvalue of (A + A^T) / 2. Controls growth of
// ||e^{At}||_2 <= e^{t nu}. Throws std::invalid_argument for non-square or
// non-finite input.
double log_norm_2(const Matrix& a);

// Logarithmic Lipschitz constant over a convex box: max over the grid rows of
// log_norm_2 of the field's Jacobian. Monotone nondecreasing under grid
// refinement. Throws std::invalid_argument if the field has no Jacobian.
double lipschitz_log_constant(const VectorField& f, const BoxDomain& box,
                              const Matrix& grid_points);

}  // namespace momentkit
