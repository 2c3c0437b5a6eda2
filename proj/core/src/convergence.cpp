#include <momentkit/convergence.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace momentkit {

namespace {

std::function<double(double)> monomial_fn(int k) {
  return [k](double x) { return std::pow(x, k); };
}

constexpr double kRemezTol = 1e-9;

}  // namespace

SandwichReport verify_sandwich(int k, int n) {
  if (k < 1 || n < 0 || n >= k)
    throw std::invalid_argument("verify_sandwich requires 0 <= n < k");
  const double upper = p_kn(k, n).as_double();
  const double lower = upper / (4.0 * std::exp(1.0));
  const BestApproxResult approx =
      best_linf_poly(monomial_fn(k), n, -1.0, 1.0, kRemezTol);

  SandwichReport report;
  report.k = k;
  report.n = n;
  report.lower = lower;
  report.upper = upper;
  report.error = approx.error;
  report.lower_margin = approx.error - lower;
  report.upper_margin = upper - approx.error;
  report.remez_converged = approx.converged;
  const double slack = kRemezTol * (1.0 + upper);
  report.pass = approx.converged && report.lower_margin >= -slack &&
                report.upper_margin >= -slack;
  return report;
}

EnPropertiesReport verify_en_properties(int k_max, int n_max) {
  if (k_max < 2 || k_max > 20 || n_max < 1 || n_max > 12)
    throw std::invalid_argument(
        "verify_en_properties requires 2 <= k_max <= 20 and 1 <= n_max <= 12");

  EnPropertiesReport report;
  report.k_max = k_max;
  report.n_max = n_max;
  report.pass = true;
  auto fail = [&](const std::string& what) {
    report.pass = false;
    if (report.failures.size() < 20) report.failures.push_back(what);
  };

  // E_n(x^k) table; exact zero once the degree reaches k.
  const int rows = n_max + 2;     // n = 0..n_max+1
  const int cols = k_max + 2;     // k = 0..k_max+1
  Matrix table = Matrix::Zero(rows, cols);
  for (int k = 1; k <= k_max + 1; ++k) {
    for (int n = 0; n <= n_max + 1 && n < k; ++n) {
      const BestApproxResult approx =
          best_linf_poly(monomial_fn(k), n, -1.0, 1.0, kRemezTol);
      if (!approx.converged) {
        std::ostringstream msg;
        msg << "exchange did not certify E_" << n << "(x^" << k << ")";
        fail(msg.str());
      }
      table(n, k) = approx.error;
    }
  }

  auto slack_for = [](double x, double y) {
    return kRemezTol * (1.0 + std::max(x, y));
  };
  auto check = [&](bool ok, const char* label, int k, int n) {
    ++report.checks;
    if (!ok) {
      std::ostringstream msg;
      msg << label << " fails at k=" << k << " n=" << n;
      fail(msg.str());
    }
  };

  for (int k = 1; k <= k_max; ++k) {
    for (int n = 0; n <= n_max; ++n) {
      const double e_nk = table(n, k);
      check(e_nk >= table(n + 1, k) - slack_for(e_nk, table(n + 1, k)),
            "degree monotonicity", k, n);
      check(e_nk >= table(n + 1, k + 1) - slack_for(e_nk, table(n + 1, k + 1)),
            "diagonal monotonicity", k, n);
      if (k % 2 == 0 && n % 2 == 0)
        check(std::abs(e_nk - table(n + 1, k)) <=
                  slack_for(e_nk, table(n + 1, k)),
              "even-degree equality", k, n);
      if ((n + k) % 2 == 1)
        check(e_nk >= table(n, k + 1) - slack_for(e_nk, table(n, k + 1)),
              "odd-parity power monotonicity", k, n);
    }
  }

  // E_{2n}(x^k) <= P_{2M-1,2n} for 0 <= k <= 2M.
  for (int m = 1; 2 * m - 1 <= k_max && 2 * m <= k_max + 1; ++m) {
    for (int n = 1; 2 * n <= n_max; ++n) {
      const double bound = p_kn(2 * m - 1, 2 * n).as_double();
      for (int k = 0; k <= 2 * m; ++k)
        check(table(2 * n, k) <= bound + slack_for(bound, table(2 * n, k)),
              "tail-parameter bound", k, 2 * n);
    }
  }

  // Exact odd-parity monotonicity of the tail parameters over the range.
  const PknCheckReport exact = verify_pkn_identities(k_max + 2);
  report.checks += exact.checks;
  if (!exact.pass) fail(exact.first_failure);

  return report;
}

DecayReport theorem3_decay(const std::function<double(double)>& f, int m_min,
                           int m_max) {
  if (m_min < 1 || m_max < m_min || m_max > 12)
    throw std::invalid_argument(
        "theorem3_decay requires 1 <= m_min <= m_max <= 12");

  DecayReport report;
  report.m_min = m_min;
  report.m_max = m_max;
  report.complete = true;
  for (int m = m_min; m <= m_max; ++m) {
    const int degree = 4 * m;
    double worst = 0.0;
    bool ok = true;
    for (int k = 1; k <= degree; ++k) {
      const auto integrand = [k, &f](double x) {
        return k * std::pow(x, k - 1) * f(x);
      };
      const BestApproxResult approx =
          best_linf_poly(integrand, degree, -1.0, 1.0, kRemezTol);
      if (!approx.converged) {
        ok = false;
        break;
      }
      worst = std::max(worst, approx.error);
    }
    if (!ok) {
      report.complete = false;
      break;
    }
    report.raw_max.push_back(worst);
    report.majorant.push_back(2.0 * std::sqrt(static_cast<double>(m)) * worst);
  }

  report.monotone_decreasing = true;
  for (size_t i = 1; i < report.majorant.size(); ++i)
    if (!(report.majorant[i] < report.majorant[i - 1]))
      report.monotone_decreasing = false;
  return report;
}

DivergenceReport interval_divergence(int n_min, int n_max, double a, double b) {
  if (n_min < 0 || n_max < n_min || n_max > 40)
    throw std::invalid_argument(
        "interval_divergence requires 0 <= n_min <= n_max <= 40");
  if (!(b > a))
    throw std::invalid_argument("interval_divergence requires b > a");

  DivergenceReport report;
  report.a = a;
  report.b = b;
  report.agreement = true;
  for (int n = n_min; n <= n_max; ++n) {
    const BestApproxResult approx =
        best_linf_poly(monomial_fn(n + 1), n, a, b, kRemezTol);
    DivergenceTerm term;
    term.n = n;
    term.computed = approx.error;
    term.identity = 2.0 * std::pow(0.25 * (b - a), n + 1);
    term.rel_error = std::abs(term.computed - term.identity) / term.identity;
    term.converged = approx.converged;
    if (!term.converged || term.rel_error > 1e-6) report.agreement = false;
    report.terms.push_back(term);
  }
  return report;
}

}  // namespace momentkit
