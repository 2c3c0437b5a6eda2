#include "momentkit/reduced_model.hpp"

#include <stdexcept>
#include <utility>

namespace momentkit {

QuadratureGrid make_quadrature(const BoxDomain& box, int per_axis) {
  auto [points, weights] = trapezoid_grid(box, per_axis);
  return QuadratureGrid{std::move(points), std::move(weights)};
}

QuadratureGrid default_fit_grid(const BoxDomain& box, bool pair_fit) {
  int per_axis = 0;
  if (box.dim() == 1) {
    per_axis = pair_fit ? 61 : 401;
  } else if (box.dim() == 2) {
    per_axis = pair_fit ? 21 : 61;
  } else {
    throw std::invalid_argument("no default quadrature beyond two dimensions");
  }
  return make_quadrature(box, per_axis);
}

QuadraticModel make_quadratic_model(std::vector<Matrix> b) {
  const int m = static_cast<int>(b.size());
  for (const Matrix& slice : b) {
    if (slice.rows() != m || slice.cols() != m)
      throw std::invalid_argument("quadratic slices must be M square matrices");
  }
  QuadraticModel model;
  model.b = std::move(b);
  model.btilde.assign(m, Matrix(m, m));
  for (int l = 0; l < m; ++l) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        model.btilde[l](i, j) = model.b[i](l, j) + model.b[i](j, l);
  }
  return model;
}

}  // namespace momentkit
