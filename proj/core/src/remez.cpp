#include <momentkit/remez.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace momentkit {

namespace {

double clenshaw(const Vector& c, double t) {
  double b1 = 0.0;
  double b2 = 0.0;
  for (long j = c.size() - 1; j >= 1; --j) {
    const double b0 = 2.0 * t * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

struct Extremum {
  double t = 0.0;
  double r = 0.0;  // signed residual value
};

}  // namespace

double BestApproxResult::evaluate(double x) const {
  const double t = (2.0 * x - a - b) / (b - a);
  return clenshaw(coefficients, t);
}

BestApproxResult best_linf_poly(const std::function<double(double)>& f,
                                int degree, double a, double b, double tol) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a))
    throw std::invalid_argument("best_linf_poly requires a finite interval with b > a");
  if (degree < 0 || degree > 48)
    throw std::invalid_argument("best_linf_poly supports degrees 0 through 48");
  if (!(tol >= 1e-12))
    throw std::invalid_argument("best_linf_poly requires tol >= 1e-12");

  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const auto fx = [&](double t) { return f(mid + half * t); };

  // Chebyshev-spaced scan grid with both endpoints.
  const long grid_n = std::max<long>(1025, 32L * (degree + 3) + 1);
  Vector tg(grid_n), fg(grid_n), rg(grid_n);
  for (long g = 0; g < grid_n; ++g) {
    tg[g] = -std::cos(M_PI * static_cast<double>(g) / static_cast<double>(grid_n - 1));
    fg[g] = fx(tg[g]);
    if (!std::isfinite(fg[g]))
      throw std::invalid_argument("best_linf_poly requires finite function values");
  }
  const double f_scale = fg.cwiseAbs().maxCoeff();
  const double noise_floor =
      32.0 * std::numeric_limits<double>::epsilon() * (1.0 + f_scale);

  // A function that is even or odd about the interval midpoint shares its
  // best degree-n polynomial with degree n + 1 when the parities line up,
  // so the optimal residual alternates at n + 3 points and an (n + 2)-point
  // exchange degenerates (the equalized level collapses to zero). Running
  // the exchange as the degree-(n + 1) problem is then exact and generic.
  double even_dev = 0.0;
  double odd_dev = 0.0;
  for (long g = 0; g < grid_n; ++g) {
    even_dev = std::max(even_dev, std::abs(fg[g] - fg[grid_n - 1 - g]));
    odd_dev = std::max(odd_dev, std::abs(fg[g] + fg[grid_n - 1 - g]));
  }
  const double sym_tol = 1e-13 * (1.0 + f_scale);
  const bool degenerate_parity = (even_dev <= sym_tol && degree % 2 == 0) ||
                                 (odd_dev <= sym_tol && degree % 2 == 1);

  const int n = degenerate_parity ? degree + 1 : degree;
  const int m = n + 2;  // reference size

  std::vector<double> ref(m);
  for (int i = 0; i < m; ++i)
    ref[i] = -std::cos(M_PI * static_cast<double>(i) / static_cast<double>(m - 1));

  BestApproxResult best;
  best.degree = degree;
  best.a = a;
  best.b = b;
  best.coefficients = Vector::Zero(degree + 1);
  best.error = f_scale;  // the zero polynomial is always admissible
  best.level = 0.0;
  best.points = Vector();
  double best_rmax = std::numeric_limits<double>::infinity();
  int since_best = 0;
  int rescues = 0;

  Matrix sys(m, m);
  Vector rhs(m);
  Vector coeff = Vector::Zero(n + 1);

  auto finish = [&](const Vector& c, double level, double rmax,
                    const std::vector<Extremum>& ext, int iter, bool ok) {
    // In the inflated parity case the top coefficient is structurally zero.
    best.coefficients = c.head(degree + 1);
    best.level = level;
    best.error = rmax;
    best.points = Vector(static_cast<long>(ext.size()));
    for (size_t i = 0; i < ext.size(); ++i)
      best.points[static_cast<long>(i)] = mid + half * ext[i].t;
    best.iterations = iter;
    best.converged = ok;
  };

  for (int iter = 1; iter <= 60; ++iter) {
    // Equalize the residual on the reference: p(t_i) + (-1)^i h = f(t_i).
    for (int i = 0; i < m; ++i) {
      const double t = ref[i];
      double t0 = 1.0, t1 = t;
      sys(i, 0) = 1.0;
      if (n >= 1) sys(i, 1) = t;
      for (int j = 2; j <= n; ++j) {
        const double t2 = 2.0 * t * t1 - t0;
        sys(i, j) = t2;
        t0 = t1;
        t1 = t2;
      }
      sys(i, n + 1) = (i % 2 == 0) ? 1.0 : -1.0;
      rhs[i] = fx(t);
    }
    const Vector sol = sys.colPivHouseholderQr().solve(rhs);
    if (!sol.allFinite()) break;
    coeff = sol.head(n + 1);
    const double level = std::abs(sol[n + 1]);

    for (long g = 0; g < grid_n; ++g) rg[g] = fg[g] - clenshaw(coeff, tg[g]);
    const double grid_max = rg.cwiseAbs().maxCoeff();

    // Exactly representable functions: the residual is pure roundoff and
    // carries no usable sign structure.
    if (grid_max <= noise_floor) {
      std::vector<Extremum> at_ref(ref.size());
      for (size_t i = 0; i < ref.size(); ++i)
        at_ref[i] = {ref[i], fx(ref[i]) - clenshaw(coeff, ref[i])};
      finish(coeff, level, grid_max, at_ref, iter, true);
      return best;
    }

    // One extremum candidate per maximal run of constant residual sign,
    // refined by golden-section search on the signed residual.
    std::vector<Extremum> ext;
    auto refine = [&](long lo_idx, long hi_idx, long peak_idx, double sign) {
      double lo = tg[std::max(lo_idx, peak_idx - 1)];
      double hi = tg[std::min(hi_idx, peak_idx + 1)];
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - gr * (hi - lo);
      double x2 = lo + gr * (hi - lo);
      double r1 = sign * (fx(x1) - clenshaw(coeff, x1));
      double r2 = sign * (fx(x2) - clenshaw(coeff, x2));
      for (int it = 0; it < 48; ++it) {
        if (r1 < r2) {
          lo = x1;
          x1 = x2;
          r1 = r2;
          x2 = lo + gr * (hi - lo);
          r2 = sign * (fx(x2) - clenshaw(coeff, x2));
        } else {
          hi = x2;
          x2 = x1;
          r2 = r1;
          x1 = hi - gr * (hi - lo);
          r1 = sign * (fx(x1) - clenshaw(coeff, x1));
        }
      }
      double tm = r1 > r2 ? x1 : x2;
      double rm = std::max(r1, r2);
      // The grid peak itself can beat the refined point at interval ends.
      if (sign * rg[peak_idx] > rm) {
        tm = tg[peak_idx];
        rm = sign * rg[peak_idx];
      }
      return Extremum{tm, sign * rm};
    };

    long run_start = 0;
    double run_sign = rg[0] >= 0.0 ? 1.0 : -1.0;
    long peak = 0;
    for (long g = 1; g <= grid_n; ++g) {
      const double sign_g =
          g < grid_n ? (rg[g] >= 0.0 ? 1.0 : -1.0) : -run_sign;
      if (sign_g != run_sign) {
        ext.push_back(refine(run_start, g - 1, peak, run_sign));
        run_start = g;
        run_sign = sign_g;
        peak = g;
      } else if (g < grid_n && std::abs(rg[g]) > std::abs(rg[peak])) {
        peak = g;
      }
    }

    // A transiently collapsed candidate set (fewer sign runs than reference
    // points) can usually be completed with the interval ends; give up only
    // when that fails repeatedly.
    if (static_cast<int>(ext.size()) < m) {
      if (rescues >= 3 || static_cast<int>(ext.size()) < m - 2) break;
      ++rescues;
      if (ext.front().t > tg[0] + 1e-9)
        ext.insert(ext.begin(), Extremum{tg[0], rg[0]});
      if (static_cast<int>(ext.size()) < m && ext.back().t < tg[grid_n - 1] - 1e-9)
        ext.push_back(Extremum{tg[grid_n - 1], rg[grid_n - 1]});
      if (static_cast<int>(ext.size()) < m) break;
    }

    // Trim to exactly n + 2 candidates, dropping the weakest while keeping
    // the signs alternating (an interior drop removes its weaker neighbor).
    while (static_cast<int>(ext.size()) > m) {
      size_t imin = 0;
      for (size_t i = 1; i < ext.size(); ++i)
        if (std::abs(ext[i].r) < std::abs(ext[imin].r)) imin = i;
      if (imin == 0) {
        ext.erase(ext.begin());
      } else if (imin + 1 == ext.size()) {
        ext.pop_back();
      } else {
        const size_t weaker =
            std::abs(ext[imin - 1].r) < std::abs(ext[imin + 1].r) ? imin - 1
                                                                  : imin + 1;
        const size_t first = std::min(imin, weaker);
        ext.erase(ext.begin() + first, ext.begin() + first + 2);
      }
    }

    double rmax = 0.0;
    for (const Extremum& e : ext) rmax = std::max(rmax, std::abs(e.r));
    const double deviation = std::max(rmax - level, 0.0);

    if (rmax < best_rmax) {
      best_rmax = rmax;
      finish(coeff, level, rmax, ext, iter, false);
      since_best = 0;
    } else {
      ++since_best;
    }

    if (deviation <= std::max(tol * rmax, noise_floor)) {
      finish(coeff, level, rmax, ext, iter, true);
      return best;
    }
    if (since_best >= 10) break;

    for (int i = 0; i < m; ++i) ref[i] = ext[i].t;
  }

  return best;
}

}  // namespace momentkit
