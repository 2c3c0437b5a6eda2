#pragma once

#include <vector>

#include "momentkit/box_domain.hpp"
#include "momentkit/types.hpp"

namespace momentkit {

// Supported kernel families.
//
//  Monomial            1-D: x^k, k = 0..degree.
//  NormalizedMonomial  1-D: u^k with u = (2x - (a+b)) / (b-a), so |phi| <= 1
//                      on the domain [a, b].
//  Chebyshev           1-D: T_k(u) with the same affine pullback u.
//  GaussianMonomial    1-D: x^i * exp(-(x - c_j)^2 / sigma^2) / sqrt(2 pi sigma^2)
//                      for each order i and center c_j, optionally followed by
//                      the constant kernel phi == 1.
//  Poly2D              2-D: x^k * y^l for 0 <= k + l <= degree, enumerated by
//                      total degree, x-exponent ascending within a degree.
enum class BasisKind {
  Monomial,
  NormalizedMonomial,
  Chebyshev,
  GaussianMonomial,
  Poly2D,
};

struct BasisSpec {
  BasisKind kind = BasisKind::Monomial;
  BoxDomain domain = BoxDomain::interval(-1.0, 1.0);
  int degree = 0;                    // polynomial kinds: max (total) degree
  std::vector<double> centers;       // GaussianMonomial only
  double sigma = 0.0;                // GaussianMonomial only
  std::vector<int> orders = {0, 1};  // GaussianMonomial monomial orders
  bool constant_kernel = true;       // GaussianMonomial: append phi == 1

  // Equidistant centers spanning [a, b] endpoints included.
  static std::vector<double> equidistant_centers(double a, double b, int count);

  bool operator==(const BasisSpec& other) const = default;
};

// Kernel values and gradients on a fixed point set. gradients[a](p, k) holds
// d phi_k / d x_a at points.row(p); one matrix per space dimension.
struct EvalTable {
  Matrix points;
  Matrix values;
  std::vector<Matrix> gradients;
};

class KernelBasis {
 public:
  const BasisSpec& spec() const { return spec_; }
  const BoxDomain& domain() const { return spec_.domain; }
  int dim() const { return spec_.domain.dim(); }
  int size() const { return size_; }

  // Index of the constant kernel phi == 1 if the family contains one
  // (Monomial-type index 0, Gaussian families' trailing kernel), else -1.
  int constant_index() const { return constant_index_; }

  // Estimated 2-norm condition number of the Gram matrix on a default
  // evaluation grid; families whose Gram is numerically singular are still
  // usable but flagged.
  double gram_condition() const { return gram_condition_; }
  bool degenerate() const { return degenerate_; }

  // Poly2D exponent pair (k, l) of kernel `index`; 1-D kinds return the
  // monomial/Chebyshev degree in first and 0 in second.
  std::pair<int, int> exponents(int index) const;

  // Evaluate kernel `k` and optionally its gradient at a single point x of
  // size dim(). grad, when non-null, receives dim() entries.
  double eval_one(int k, const double* x, double* grad = nullptr) const;

  // Evaluate all kernels at one point: values (size M), and when grads is
  // non-null the row-major M x dim() gradient block.
  void eval_point(const double* x, double* values, double* grads = nullptr) const;

  friend KernelBasis make_basis(const BasisSpec& spec);

 private:
  explicit KernelBasis(BasisSpec spec) : spec_(std::move(spec)) {}

  BasisSpec spec_;
  int size_ = 0;
  int constant_index_ = -1;
  double gram_condition_ = 0.0;
  bool degenerate_ = false;
  std::vector<std::pair<int, int>> poly2d_exponents_;
};

// Validates the spec and precomputes family layout. Throws
// std::invalid_argument on structural errors (bad sigma, centers outside the
// domain, wrong dimension for the family, empty family).
KernelBasis make_basis(const BasisSpec& spec);

// Evaluates every kernel with gradients at each row of `points` (n x dim).
// Throws DomainViolation, naming the first offending row, if a point lies
// outside the domain by more than 1e-12.
EvalTable eval_basis(const KernelBasis& basis, const Matrix& points);

// Tensor grid of `per_axis` points per axis spanning the box, endpoints
// included, together with trapezoid quadrature weights. Rows of the first
// matrix are grid points; the vector holds matching weights.
std::pair<Matrix, Vector> trapezoid_grid(const BoxDomain& box, int per_axis);

}  // namespace momentkit
