#include "momentkit/box_domain.hpp"

#include <stdexcept>

namespace momentkit {

BoxDomain::BoxDomain(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw std::invalid_argument("box bounds have mismatched dimensions");
  if (lower_.size() == 0) throw std::invalid_argument("box has dimension 0");
  for (int i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i]))
      throw std::invalid_argument("box is empty on axis " + std::to_string(i));
  }
}

BoxDomain BoxDomain::interval(double a, double b) {
  Vector lo(1), hi(1);
  lo << a;
  hi << b;
  return BoxDomain(lo, hi);
}

BoxDomain BoxDomain::square(double a, double b) {
  Vector lo(2), hi(2);
  lo << a, a;
  hi << b, b;
  return BoxDomain(lo, hi);
}

double BoxDomain::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= side(i);
  return v;
}

bool BoxDomain::contains(const double* x, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  }
  return true;
}

BoxDomain BoxDomain::inflated(double factor) const {
  Vector lo(dim()), hi(dim());
  for (int i = 0; i < dim(); ++i) {
    const double c = center(i);
    const double h = 0.5 * side(i) * factor;
    lo[i] = c - h;
    hi[i] = c + h;
  }
  return BoxDomain(lo, hi);
}

}  // namespace momentkit
