#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace momentkit {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Tail parameter of the symmetric binomial family:
//   P_{k,n} = 2^{1-k} * sum_{j > (n+k)/2}^{k} C(k, j),
// the probability that k fair coin tosses give #heads - #tails > n. These
// weights bound the best uniform approximation error of x^k by polynomials
// of degree n, so they are kept as exact rationals with a float view.
struct PknValue {
  int k = 0;
  int n = 0;
  Rational value;
  double as_double() const { return static_cast<double>(value); }
};

// Number of outcomes of k tosses with #heads - #tails > n. Defined for any
// integer n (the first-two-tosses recurrence reaches n - 2 < 0); zero when
// the tail is empty.
BigInt pkn_count(int k, int n);

// Exact P_{k,n}. Requires k >= 1 and n >= 0.
PknValue p_kn(int k, int n);

// Exact sequence M^ell * P_{4M-1, 2M} for M = m_min..m_max. The sequence
// tends to zero faster than the reciprocal of any polynomial; its prefix is
// not monotone (it rises until M = 2) but decreases strictly from M = 3 on.
std::vector<Rational> proposition_decay(int ell, int m_min, int m_max);

// Exact integer/rational identities of the family, checked for every k up
// to k_max: the first-two-tosses recurrence
//   N_{k+2,n} = N_{k,n-2} + 2 N_{k,n} + N_{k,n+2},
// the range 0 <= P_{k,n} <= 1 for n >= 0, and the odd-parity monotonicity
// P_{k,n} <= P_{k+2,n} for k >= n >= 1 with k + n odd.
struct PknCheckReport {
  int k_max = 0;
  long checks = 0;
  bool pass = false;
  std::string first_failure;  // empty when pass
};

PknCheckReport verify_pkn_identities(int k_max);

}  // namespace momentkit
