#pragma once

#include <momentkit/pkn.hpp>
#include <momentkit/remez.hpp>

#include <functional>
#include <string>
#include <vector>

namespace momentkit {

// One sandwich check (1/(4e)) P_{k,n} <= E_n(x^k) <= P_{k,n} on [-1, 1].
struct SandwichReport {
  int k = 0;
  int n = 0;
  double lower = 0.0;  // P_{k,n} / (4e)
  double upper = 0.0;  // P_{k,n}
  double error = 0.0;  // computed E_n(x^k)
  double lower_margin = 0.0;  // error - lower
  double upper_margin = 0.0;  // upper - error
  bool remez_converged = false;
  bool pass = false;
};

SandwichReport verify_sandwich(int k, int n);  // requires 0 <= n < k

// Batch verification of the uniform-error properties of x^k on [-1, 1]:
//   (a) E_n(x^k) >= E_{n+1}(x^k)
//   (b) E_n(x^k) >= E_{n+1}(x^{k+1})
//   (c) E_n(x^k) = E_{n+1}(x^k) when n and k are both even
//   (d) E_n(x^k) >= E_n(x^{k+1}) when n + k is odd
// plus E_{2n}(x^k) <= P_{2M-1,2n} for 0 <= k <= 2M over the covered range,
// and the exact odd-parity monotonicity P_{k,n} <= P_{k+2,n} in rationals.
// Float inequalities carry a 1e-9-scale slack matching the exchange
// tolerance. Requires 2 <= k_max <= 20 and 1 <= n_max <= 12.
struct EnPropertiesReport {
  int k_max = 0;
  int n_max = 0;
  long checks = 0;
  bool pass = false;
  std::vector<std::string> failures;  // at most 20 entries, empty when pass
};

EnPropertiesReport verify_en_properties(int k_max, int n_max);

// Majorant of the instantaneous moment-dynamics error under monomial
// kernels: s_M = 2 sqrt(M) max_{k=1..4M} E_{4M}(k x^{k-1} f) on [-1, 1],
// for M = m_min..m_max. A failed exchange truncates the sequence and
// clears `complete`. Requires 1 <= m_min <= m_max <= 12.
struct DecayReport {
  int m_min = 0;
  int m_max = 0;
  std::vector<double> majorant;  // s_M
  std::vector<double> raw_max;   // max_k E_{4M}(k x^{k-1} f)
  bool monotone_decreasing = false;  // strict, over the returned terms
  bool complete = false;
};

DecayReport theorem3_decay(const std::function<double(double)>& f, int m_min,
                           int m_max);

// E_n^{[a,b]}(x^{n+1}) computed two ways: exchange iterations directly on
// [a, b], and the rescaling identity 2 ((b-a)/4)^{n+1}. Their ratio of
// consecutive terms is (b-a)/4, so the sequence diverges geometrically
// exactly when the interval is longer than 4.
struct DivergenceTerm {
  int n = 0;
  double computed = 0.0;  // exchange value
  double identity = 0.0;  // 2 ((b-a)/4)^{n+1}
  double rel_error = 0.0;
  bool converged = false;
};

struct DivergenceReport {
  double a = 0.0;
  double b = 0.0;
  std::vector<DivergenceTerm> terms;
  bool agreement = false;  // all terms converged and agree within 1e-6
};

DivergenceReport interval_divergence(int n_min, int n_max, double a, double b);

}  // namespace momentkit
