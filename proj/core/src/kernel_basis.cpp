#include "momentkit/kernel_basis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace momentkit {
namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kDegenerateCondition = 1e12;

bool is_one_dimensional(BasisKind kind) {
  return kind != BasisKind::Poly2D;
}

}  // namespace

std::vector<double> BasisSpec::equidistant_centers(double a, double b, int count) {
  if (count < 1) throw std::invalid_argument("center count must be positive");
  std::vector<double> c(count);
  if (count == 1) {
    c[0] = 0.5 * (a + b);
    return c;
  }
  const double h = (b - a) / (count - 1);
  for (int i = 0; i < count; ++i) c[i] = a + h * i;
  return c;
}

KernelBasis make_basis(const BasisSpec& spec) {
  KernelBasis basis(spec);
  const BoxDomain& box = spec.domain;

  if (is_one_dimensional(spec.kind) && box.dim() != 1)
    throw std::invalid_argument("1-D kernel family on a domain of dimension " +
                                std::to_string(box.dim()));
  if (spec.kind == BasisKind::Poly2D && box.dim() != 2)
    throw std::invalid_argument("Poly2D requires a 2-D domain");

  switch (spec.kind) {
    case BasisKind::Monomial:
    case BasisKind::NormalizedMonomial:
    case BasisKind::Chebyshev:
      if (spec.degree < 0) throw std::invalid_argument("degree must be >= 0");
      basis.size_ = spec.degree + 1;
      basis.constant_index_ = 0;
      break;
    case BasisKind::GaussianMonomial: {
      if (!(spec.sigma > 0.0))
        throw std::invalid_argument("GaussianMonomial requires sigma > 0");
      if (spec.centers.empty())
        throw std::invalid_argument("GaussianMonomial requires centers");
      if (spec.orders.empty() && !spec.constant_kernel)
        throw std::invalid_argument("empty kernel family");
      for (std::size_t j = 0; j < spec.centers.size(); ++j) {
        if (spec.centers[j] < box.lower(0) || spec.centers[j] > box.upper(0))
          throw std::invalid_argument("center " + std::to_string(j) +
                                      " lies outside the domain");
      }
      for (int order : spec.orders) {
        if (order < 0) throw std::invalid_argument("orders must be >= 0");
      }
      basis.size_ = static_cast<int>(spec.orders.size() * spec.centers.size()) +
                    (spec.constant_kernel ? 1 : 0);
      basis.constant_index_ = spec.constant_kernel ? basis.size_ - 1 : -1;
      break;
    }
    case BasisKind::Poly2D: {
      if (spec.degree < 0) throw std::invalid_argument("degree must be >= 0");
      basis.size_ = (spec.degree + 1) * (spec.degree + 2) / 2;
      basis.constant_index_ = 0;
      for (int s = 0; s <= spec.degree; ++s)
        for (int k = 0; k <= s; ++k)
          basis.poly2d_exponents_.emplace_back(k, s - k);
      break;
    }
  }
  if (basis.size_ == 0) throw std::invalid_argument("empty kernel family");

  // Gram condition estimate on a default grid; a severely ill-conditioned
  // family stays usable but is flagged for downstream warnings.
  const int per_axis = box.dim() == 1 ? 201 : 41;
  auto [grid, weights] = trapezoid_grid(box, per_axis);
  const int n = static_cast<int>(grid.rows());
  const int m = basis.size_;
  Matrix phi(n, m);
  std::vector<double> vals(m);
  for (int p = 0; p < n; ++p) {
    basis.eval_point(grid.row(p).data(), vals.data(), nullptr);
    for (int k = 0; k < m; ++k) phi(p, k) = vals[k];
  }
  Matrix gram = phi.transpose() * weights.asDiagonal() * phi;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  const double emin = es.eigenvalues().minCoeff();
  basis.gram_condition_ = emin > 0.0 ? emax / emin
                                     : std::numeric_limits<double>::infinity();
  basis.degenerate_ = !(basis.gram_condition_ < kDegenerateCondition);
  return basis;
}

std::pair<int, int> KernelBasis::exponents(int index) const {
  if (index < 0 || index >= size_) throw std::out_of_range("kernel index");
  if (spec_.kind == BasisKind::Poly2D) return poly2d_exponents_[index];
  return {index, 0};
}

double KernelBasis::eval_one(int k, const double* x, double* grad) const {
  std::vector<double> vals(size_);
  std::vector<double> grads;
  double* gptr = nullptr;
  if (grad != nullptr) {
    grads.resize(static_cast<std::size_t>(size_) * dim());
    gptr = grads.data();
  }
  eval_point(x, vals.data(), gptr);
  if (grad != nullptr)
    for (int a = 0; a < dim(); ++a) grad[a] = grads[static_cast<std::size_t>(k) * dim() + a];
  return vals[k];
}

void KernelBasis::eval_point(const double* x, double* values, double* grads) const {
  switch (spec_.kind) {
    case BasisKind::Monomial: {
      double pw = 1.0;
      for (int k = 0; k <= spec_.degree; ++k) {
        values[k] = pw;
        if (grads != nullptr) grads[k] = k == 0 ? 0.0 : k * values[k - 1];
        pw *= x[0];
      }
      break;
    }
    case BasisKind::NormalizedMonomial: {
      const double a = spec_.domain.lower(0), b = spec_.domain.upper(0);
      const double u = (2.0 * x[0] - (a + b)) / (b - a);
      const double du = 2.0 / (b - a);
      double pw = 1.0;
      for (int k = 0; k <= spec_.degree; ++k) {
        values[k] = pw;
        if (grads != nullptr) grads[k] = k == 0 ? 0.0 : k * values[k - 1] * du;
        pw *= u;
      }
      break;
    }
    case BasisKind::Chebyshev: {
      const double a = spec_.domain.lower(0), b = spec_.domain.upper(0);
      const double u = (2.0 * x[0] - (a + b)) / (b - a);
      const double du = 2.0 / (b - a);
      double tm = 1.0, dm = 0.0;  // T_{k-1}, T'_{k-1}
      double tk = u, dk = 1.0;    // T_k, T'_k
      for (int k = 0; k <= spec_.degree; ++k) {
        if (k == 0) {
          values[k] = 1.0;
          if (grads != nullptr) grads[k] = 0.0;
        } else if (k == 1) {
          values[k] = u;
          if (grads != nullptr) grads[k] = du;
        } else {
          const double tn = 2.0 * u * tk - tm;
          const double dn = 2.0 * tk + 2.0 * u * dk - dm;
          tm = tk;
          dm = dk;
          tk = tn;
          dk = dn;
          values[k] = tn;
          if (grads != nullptr) grads[k] = dn * du;
        }
      }
      break;
    }
    case BasisKind::GaussianMonomial: {
      const double s2 = spec_.sigma * spec_.sigma;
      const double norm = 1.0 / std::sqrt(2.0 * M_PI * s2);
      int idx = 0;
      for (int order : spec_.orders) {
        const double xp = order == 0 ? 1.0 : std::pow(x[0], order);
        const double xpm1 = order == 0 ? 0.0 : (order == 1 ? 1.0 : std::pow(x[0], order - 1));
        for (double c : spec_.centers) {
          const double dxc = x[0] - c;
          const double g = std::exp(-dxc * dxc / s2) * norm;
          values[idx] = xp * g;
          if (grads != nullptr)
            grads[idx] = (order * xpm1 - xp * 2.0 * dxc / s2) * g;
          ++idx;
        }
      }
      if (spec_.constant_kernel) {
        values[idx] = 1.0;
        if (grads != nullptr) grads[idx] = 0.0;
      }
      break;
    }
    case BasisKind::Poly2D: {
      const int deg = spec_.degree;
      // Power tables for both coordinates.
      std::vector<double> px(deg + 1), py(deg + 1);
      px[0] = py[0] = 1.0;
      for (int k = 1; k <= deg; ++k) {
        px[k] = px[k - 1] * x[0];
        py[k] = py[k - 1] * x[1];
      }
      for (int idx = 0; idx < size_; ++idx) {
        const auto [k, l] = poly2d_exponents_[idx];
        values[idx] = px[k] * py[l];
        if (grads != nullptr) {
          grads[2 * idx + 0] = k == 0 ? 0.0 : k * px[k - 1] * py[l];
          grads[2 * idx + 1] = l == 0 ? 0.0 : l * px[k] * py[l - 1];
        }
      }
      break;
    }
  }
}

EvalTable eval_basis(const KernelBasis& basis, const Matrix& points) {
  if (points.cols() != basis.dim())
    throw std::invalid_argument("points have dimension " +
                                std::to_string(points.cols()) + ", expected " +
                                std::to_string(basis.dim()));
  const int n = static_cast<int>(points.rows());
  const int m = basis.size();
  const int d = basis.dim();

  EvalTable table;
  table.points = points;
  table.values.resize(n, m);
  table.gradients.assign(d, Matrix(n, m));

  std::vector<double> x(d), vals(m), grads(static_cast<std::size_t>(m) * d);
  for (int p = 0; p < n; ++p) {
    for (int a = 0; a < d; ++a) x[a] = points(p, a);
    if (!basis.domain().contains(x.data(), kBoundaryTol))
      throw DomainViolation(p, "evaluation point " + std::to_string(p) +
                                   " lies outside the kernel domain");
    basis.eval_point(x.data(), vals.data(), grads.data());
    for (int k = 0; k < m; ++k) {
      table.values(p, k) = vals[k];
      for (int a = 0; a < d; ++a)
        table.gradients[a](p, k) = grads[static_cast<std::size_t>(k) * d + a];
    }
  }
  return table;
}

std::pair<Matrix, Vector> trapezoid_grid(const BoxDomain& box, int per_axis) {
  if (per_axis < 2) throw std::invalid_argument("grid needs >= 2 points per axis");
  const int d = box.dim();
  std::vector<Vector> nodes(d), w(d);
  for (int a = 0; a < d; ++a) {
    nodes[a].resize(per_axis);
    w[a].resize(per_axis);
    const double h = box.side(a) / (per_axis - 1);
    for (int i = 0; i < per_axis; ++i) {
      nodes[a][i] = box.lower(a) + h * i;
      w[a][i] = (i == 0 || i == per_axis - 1) ? 0.5 * h : h;
    }
    nodes[a][per_axis - 1] = box.upper(a);
  }

  long total = 1;
  for (int a = 0; a < d; ++a) total *= per_axis;
  Matrix grid(total, d);
  Vector weights(total);
  std::vector<int> index(d, 0);
  for (long r = 0; r < total; ++r) {
    double wt = 1.0;
    for (int a = 0; a < d; ++a) {
      grid(r, a) = nodes[a][index[a]];
      wt *= w[a][index[a]];
    }
    weights[r] = wt;
    for (int a = d - 1; a >= 0; --a) {
      if (++index[a] < per_axis) break;
      index[a] = 0;
    }
  }
  return {std::move(grid), std::move(weights)};
}

}  // namespace momentkit
