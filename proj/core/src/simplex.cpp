#include "momentkit/simplex.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace momentkit {

namespace {

// Revised simplex working state over the problem columns plus m artificial
// unit columns (indices n..n+m-1). Artificials start basic and are never
// allowed to re-enter once they leave.
class SimplexEngine {
 public:
  SimplexEngine(const LpProblem& p, const LpOptions& opt)
      : a_(p.a), b_(p.b), opt_(opt), m_(static_cast<int>(p.a.rows())),
        n_(static_cast<int>(p.a.cols())) {
    if (p.b.size() != m_) throw std::invalid_argument("b size mismatch");
    if (p.c.size() != n_) throw std::invalid_argument("c size mismatch");
    // Flip rows so b >= 0; the artificial basis is then feasible. Duals of
    // flipped rows change sign relative to the caller's problem.
    flipped_.assign(m_, false);
    for (int i = 0; i < m_; ++i) {
      if (b_[i] < 0.0) {
        a_.row(i) = -a_.row(i);
        b_[i] = -b_[i];
        flipped_[i] = true;
      }
    }
    max_iterations_ = opt.max_iterations > 0 ? opt.max_iterations
                                             : 50L * (m_ + n_) + 10000L;
  }

  // Runs both phases; when the arithmetic degrades (singular basis, drifted
  // residual, non-finite values) the result is never reported Optimal —
  // instead the solve restarts from scratch with more conservative pivoting,
  // up to three attempts.
  LpResult run(const Vector& cost) {
    LpResult result;
    const double b_scale = 1.0 + b_.cwiseAbs().maxCoeff();

    for (int attempt = 0; attempt < 3; ++attempt) {
      bland_start_ = attempt > 0;
      refactor_every_ = attempt == 0 ? opt_.refactor_every
                                     : std::max(8, opt_.refactor_every / 4);
      pivot_tol_ = opt_.pivot_tol * (attempt == 2 ? 100.0 : 1.0);
      reset();

      // Phase 1: minimize the artificial total.
      Vector phase1_cost = Vector::Zero(n_ + m_);
      phase1_cost.tail(m_).setOnes();
      const Step s1 = iterate(phase1_cost, result, false);
      if (s1 == Step::IterationLimit) {
        result.status = LpStatus::IterationLimit;
        return result;
      }
      // Phase 1 is bounded below by zero, so an unbounded ray is a numerical
      // artifact; retry conservatively.
      if (s1 == Step::Retry || s1 == Step::Unbounded) continue;

      const double level = phase1_level();
      if (level > 1e-7 * b_scale) {
        result.status = LpStatus::Infeasible;
        result.infeasibility = level;
        return result;
      }
      drive_out_artificials();

      // Phase 2 on the true costs; artificials are priced out for good.
      Vector full_cost = Vector::Zero(n_ + m_);
      full_cost.head(n_) = cost;
      const Step s2 = iterate(full_cost, result, true);
      if (s2 == Step::IterationLimit) {
        result.status = LpStatus::IterationLimit;
        return result;
      }
      if (s2 == Step::Retry) continue;
      if (s2 == Step::Unbounded) {
        result.status = LpStatus::Unbounded;
        return result;
      }

      // Validate before reporting: a clean refactorization, finite values,
      // and a small equality residual.
      if (!refactorize()) continue;
      Vector x = Vector::Zero(n_);
      for (int i = 0; i < m_; ++i)
        if (basis_[i] < n_) x[basis_[i]] = std::max(0.0, xb_[i]);
      if (!x.allFinite()) continue;
      const double residual = (a_ * x - b_).cwiseAbs().maxCoeff();
      if (!(residual <= 1e-6 * b_scale)) continue;

      Vector y = binv_.transpose() * basic_cost(full_cost);
      if (!y.allFinite()) continue;
      for (int i = 0; i < m_; ++i)
        if (flipped_[i]) y[i] = -y[i];

      result.status = LpStatus::Optimal;
      result.x = std::move(x);
      result.y = std::move(y);
      result.objective = cost.dot(result.x);
      result.infeasibility = residual;
      return result;
    }

    result.status = LpStatus::IterationLimit;
    return result;
  }

 private:
  enum class Step { Optimal, Unbounded, IterationLimit, Retry };

  void reset() {
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
    in_basis_.assign(n_ + m_, false);
    for (int i = 0; i < m_; ++i) in_basis_[n_ + i] = true;
    binv_ = Matrix::Identity(m_, m_);
    xb_ = b_;
  }

  Vector column(int j) const {
    if (j < n_) return a_.col(j);
    Vector e = Vector::Zero(m_);
    e[j - n_] = 1.0;
    return e;
  }

  Vector basic_cost(const Vector& cost) const {
    Vector cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
    return cb;
  }

  double phase1_level() const {
    double level = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= n_) level += std::max(0.0, xb_[i]);
    return level;
  }

  // Replaces zero-level basic artificials by original columns wherever a
  // sound pivot exists, choosing the largest-magnitude pivot for stability.
  // Rows with no pivot are redundant constraints: the artificial stays, and
  // the eviction rule in the ratio test keeps it pinned at zero.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      const Vector row = binv_.row(i) * a_;
      int entering = -1;
      double best = pivot_tol_;
      for (int j = 0; j < n_; ++j) {
        const double mag = std::abs(row[j]);
        if (!in_basis_[j] && std::isfinite(mag) && mag > best) {
          best = mag;
          entering = j;
        }
      }
      if (entering >= 0) pivot(entering, i, binv_ * a_.col(entering), 0.0);
    }
  }

  void pivot(int entering, int leaving, const Vector& d, double theta) {
    in_basis_[basis_[leaving]] = false;
    in_basis_[entering] = true;
    basis_[leaving] = entering;
    const double piv = d[leaving];
    for (int i = 0; i < m_; ++i) {
      if (i == leaving) continue;
      const double factor = d[i] / piv;
      if (factor != 0.0) binv_.row(i) -= factor * binv_.row(leaving);
      xb_[i] -= theta * d[i];
      if (xb_[i] < 0.0 && xb_[i] > -1e-9) xb_[i] = 0.0;
    }
    binv_.row(leaving) /= piv;
    xb_[leaving] = theta;
  }

  // Recomputes the basis inverse from scratch. Returns false when the basis
  // matrix is numerically singular or the inverse is not finite; callers
  // must then abandon the current basis instead of trusting it.
  bool refactorize() {
    Matrix basis_cols(m_, m_);
    for (int i = 0; i < m_; ++i) basis_cols.col(i) = column(basis_[i]);
    Eigen::FullPivLU<Matrix> lu(basis_cols);
    if (!lu.isInvertible()) return false;
    binv_ = lu.inverse();
    if (!binv_.allFinite()) return false;
    xb_ = binv_ * b_;
    if (!xb_.allFinite()) return false;
    for (int i = 0; i < m_; ++i)
      if (xb_[i] < 0.0 && xb_[i] > -1e-9) xb_[i] = 0.0;
    return true;
  }

  Step iterate(const Vector& cost, LpResult& result, bool phase2) {
    bool bland = bland_start_;
    long stalled = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    int since_refactor = 0;

    for (;;) {
      if (result.iterations++ >= max_iterations_) return Step::IterationLimit;

      Vector y = binv_.transpose() * basic_cost(cost);
      rc_ = cost.head(n_) - a_.transpose() * y;
      if (!rc_.allFinite() || !xb_.allFinite()) {
        if (!refactorize()) return Step::Retry;
        y = binv_.transpose() * basic_cost(cost);
        rc_ = cost.head(n_) - a_.transpose() * y;
        if (!rc_.allFinite() || !xb_.allFinite()) return Step::Retry;
      }

      // Pricing: Dantzig unless a stall (or a retry attempt) forced Bland's
      // rule.
      int entering = -1;
      if (bland) {
        for (int j = 0; j < n_; ++j) {
          if (!in_basis_[j] && rc_[j] < -opt_.cost_tol) {
            entering = j;
            break;
          }
        }
      } else {
        double best_rc = -opt_.cost_tol;
        for (int j = 0; j < n_; ++j) {
          if (!in_basis_[j] && rc_[j] < best_rc) {
            best_rc = rc_[j];
            entering = j;
          }
        }
      }
      if (entering < 0) return Step::Optimal;

      Vector d = binv_ * a_.col(entering);
      if (!d.allFinite()) {
        if (!refactorize()) return Step::Retry;
        d = binv_ * a_.col(entering);
        if (!d.allFinite()) return Step::Retry;
      }

      // Eviction first: a basic artificial touched by the pivot column must
      // leave at zero step, or it could regain a positive level in phase 2.
      int leaving = -1;
      double theta = 0.0;
      if (phase2) {
        double best = pivot_tol_;
        for (int i = 0; i < m_; ++i) {
          if (basis_[i] >= n_ && std::abs(d[i]) > best) {
            best = std::abs(d[i]);
            leaving = i;
          }
        }
      }

      if (leaving < 0) {
        // Ratio test. Ties resolve toward the largest pivot for stability,
        // or the smallest basis label under Bland's rule so it terminates.
        theta = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
          if (d[i] > pivot_tol_) {
            const double ratio = std::max(0.0, xb_[i]) / d[i];
            if (ratio < theta - 1e-12) {
              theta = ratio;
              leaving = i;
            } else if (ratio < theta + 1e-12 && leaving >= 0) {
              if (bland ? basis_[i] < basis_[leaving]
                        : d[i] > d[leaving]) {
                theta = std::min(theta, ratio);
                leaving = i;
              }
            }
          }
        }
        if (leaving < 0) return Step::Unbounded;
      }

      pivot(entering, leaving, d, theta);

      if (++since_refactor >= refactor_every_) {
        if (!refactorize()) return Step::Retry;
        since_refactor = 0;
      }

      const double obj = basic_cost(cost).dot(xb_);
      if (obj < best_obj - 1e-12 * (1.0 + std::abs(best_obj))) {
        best_obj = obj;
        stalled = 0;
      } else if (!bland && ++stalled > 200) {
        bland = true;
      }
    }
  }

  Matrix a_;
  Vector b_;
  LpOptions opt_;
  int m_, n_;
  long max_iterations_ = 0;
  bool bland_start_ = false;
  int refactor_every_ = 64;
  double pivot_tol_ = 1e-9;
  std::vector<bool> flipped_;
  std::vector<int> basis_;
  std::vector<bool> in_basis_;
  Matrix binv_;
  Vector xb_;
  Vector rc_;
};

// Power-of-two factor bringing `magnitude` near 1; exact in floating point,
// so unscaling is lossless.
double pow2_factor(double magnitude) {
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) return 1.0;
  return std::ldexp(1.0, -static_cast<int>(std::lround(std::log2(magnitude))));
}

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
  if (problem.a.rows() == 0 || problem.a.cols() == 0)
    throw std::invalid_argument("empty linear program");
  const long m = problem.a.rows();
  const long n = problem.a.cols();
  if (problem.b.size() != m) throw std::invalid_argument("b size mismatch");
  if (problem.c.size() != n) throw std::invalid_argument("c size mismatch");

  // Sup-norm equilibration with power-of-two factors: brings rows and
  // columns to unit magnitude so pivot and feasibility tolerances act on a
  // common scale. x and y are mapped back exactly afterwards.
  Matrix a = problem.a;
  Vector row_scale = Vector::Ones(m);
  Vector col_scale = Vector::Ones(n);
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (long i = 0; i < m; ++i) {
      const double f = pow2_factor(a.row(i).cwiseAbs().maxCoeff());
      if (f != 1.0) {
        a.row(i) *= f;
        row_scale[i] *= f;
      }
    }
    for (long j = 0; j < n; ++j) {
      const double f = pow2_factor(a.col(j).cwiseAbs().maxCoeff());
      if (f != 1.0) {
        a.col(j) *= f;
        col_scale[j] *= f;
      }
    }
  }

  LpProblem scaled;
  scaled.a = std::move(a);
  scaled.b = row_scale.cwiseProduct(problem.b);
  scaled.c = col_scale.cwiseProduct(problem.c);

  SimplexEngine engine(scaled, options);
  LpResult result = engine.run(scaled.c);
  if (result.status == LpStatus::Optimal) {
    result.x = col_scale.cwiseProduct(result.x);
    result.y = row_scale.cwiseProduct(result.y);
    result.objective = problem.c.dot(result.x);
    result.infeasibility =
        (problem.a * result.x - problem.b).cwiseAbs().maxCoeff();
  }
  return result;
}

}  // namespace momentkit
