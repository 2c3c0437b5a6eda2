#include "momentkit/log_norm.hpp"

#include <stdexcept>

#include "momentkit/dynamics.hpp"

namespace momentkit {

double log_norm_2(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix must be square");
  if (!a.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lipschitz_log_constant(const VectorField& f, const BoxDomain& box,
                              const Matrix& grid_points) {
  if (!f.has_jacobian())
    throw std::invalid_argument("field does not supply a Jacobian");
  if (grid_points.cols() != box.dim() || box.dim() != f.dim())
    throw std::invalid_argument("grid, box, and field dimensions disagree");
  const int d = f.dim();
  Matrix jac(d, d);
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> x(d), j(static_cast<std::size_t>(d) * d);
  for (int p = 0; p < grid_points.rows(); ++p) {
    for (int a = 0; a < d; ++a) x[a] = grid_points(p, a);
    f.jacobian(x.data(), j.data());
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) jac(r, c) = j[static_cast<std::size_t>(r) * d + c];
    worst = std::max(worst, log_norm_2(jac));
  }
  return worst;
}

}  // namespace momentkit
