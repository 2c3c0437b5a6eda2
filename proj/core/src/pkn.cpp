#include <momentkit/pkn.hpp>

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace momentkit {

namespace {

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return BigInt(0);
  k = std::min(k, n - k);
  BigInt value = 1;
  for (int j = 1; j <= k; ++j) {
    value *= n - k + j;
    value /= j;  // exact: the running product is divisible by j!
  }
  return value;
}

}  // namespace

BigInt pkn_count(int k, int n) {
  if (k < 1) throw std::invalid_argument("pkn_count requires k >= 1");
  // Smallest j with 2j > n + k, floor division for possibly negative sums.
  const int s = n + k;
  const int floored = s >= 0 ? s / 2 : -((-s + 1) / 2);
  const int first = std::max(floored + 1, 0);
  BigInt total = 0;
  for (int j = first; j <= k; ++j) total += binomial(k, j);
  return total;
}

PknValue p_kn(int k, int n) {
  if (k < 1 || n < 0) throw std::invalid_argument("p_kn requires k >= 1 and n >= 0");
  PknValue result;
  result.k = k;
  result.n = n;
  result.value = Rational(pkn_count(k, n), BigInt(1) << (k - 1));
  return result;
}

std::vector<Rational> proposition_decay(int ell, int m_min, int m_max) {
  if (ell < 0 || m_min < 1 || m_max < m_min)
    throw std::invalid_argument("proposition_decay requires ell >= 0 and 1 <= m_min <= m_max");
  std::vector<Rational> sequence;
  sequence.reserve(m_max - m_min + 1);
  for (int m = m_min; m <= m_max; ++m) {
    BigInt scale = 1;
    for (int j = 0; j < ell; ++j) scale *= m;
    sequence.push_back(Rational(scale * pkn_count(4 * m - 1, 2 * m),
                                BigInt(1) << (4 * m - 2)));
  }
  return sequence;
}

PknCheckReport verify_pkn_identities(int k_max) {
  if (k_max < 3) throw std::invalid_argument("verify_pkn_identities requires k_max >= 3");
  PknCheckReport report;
  report.k_max = k_max;
  report.pass = true;
  auto fail = [&](const std::string& what) {
    report.pass = false;
    if (report.first_failure.empty()) report.first_failure = what;
  };

  for (int k = 1; k + 2 <= k_max; ++k) {
    for (int n = 0; n <= k; ++n) {
      const BigInt lhs = pkn_count(k + 2, n);
      const BigInt rhs = pkn_count(k, n - 2) + 2 * pkn_count(k, n) + pkn_count(k, n + 2);
      ++report.checks;
      if (lhs != rhs) {
        std::ostringstream msg;
        msg << "recurrence fails at k=" << k << " n=" << n;
        fail(msg.str());
      }
    }
  }

  for (int k = 1; k <= k_max; ++k) {
    const BigInt half_range = BigInt(1) << (k - 1);
    for (int n = 0; n <= k; ++n) {
      const BigInt count = pkn_count(k, n);
      ++report.checks;
      if (count < 0 || count > half_range) {
        std::ostringstream msg;
        msg << "range fails at k=" << k << " n=" << n;
        fail(msg.str());
      }
    }
  }

  // P_{k,n} <= P_{k+2,n} reduces to 4 N_{k,n} <= N_{k+2,n} over counts.
  for (int n = 1; n <= k_max - 2; ++n) {
    for (int k = n; k + 2 <= k_max; ++k) {
      if ((k + n) % 2 == 0) continue;
      ++report.checks;
      if (4 * pkn_count(k, n) > pkn_count(k + 2, n)) {
        std::ostringstream msg;
        msg << "odd-parity monotonicity fails at k=" << k << " n=" << n;
        fail(msg.str());
      }
    }
  }
  return report;
}

}  // namespace momentkit
