#pragma once

#include "momentkit/types.hpp"

namespace momentkit {

// Axis-aligned box K = [lower_1, upper_1] x ... x [lower_d, upper_d].
class BoxDomain {
 public:
  // Throws std::invalid_argument if sizes mismatch, the box is empty, or
  // lower(i) >= upper(i) for some axis.
  BoxDomain(Vector lower, Vector upper);

  static BoxDomain interval(double a, double b);
  static BoxDomain square(double a, double b);  // [a,b]^2

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  double side(int axis) const { return upper_[axis] - lower_[axis]; }
  double center(int axis) const { return 0.5 * (lower_[axis] + upper_[axis]); }
  double volume() const;

  bool contains(const double* x, double tol = 0.0) const;
  bool contains(const Vector& x, double tol = 0.0) const {
    return contains(x.data(), tol);
  }

  // Box scaled about its center; factor 1.05 inflates each side by 5%.
  BoxDomain inflated(double factor) const;

  bool operator==(const BoxDomain& other) const {
    return lower_ == other.lower_ && upper_ == other.upper_;
  }

 private:
  Vector lower_;
  Vector upper_;
};

}  // namespace momentkit
