#include "momentkit/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "momentkit/log_norm.hpp"
#include "momentkit/simplex.hpp"

namespace momentkit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLinfSizeCap = 4e7;  // design entries for sup-norm pair fits

struct Side {
  Matrix phi;                // n x M kernel values
  std::vector<Matrix> dphi;  // per-axis n x M kernel partials
  Vector w;
  Vector sqw;
  Matrix weighted;  // diag(sqw) * phi
  Eigen::ColPivHouseholderQR<Matrix> qr;
  Matrix gram;  // phi' W phi
  double gram_lmax = 0.0;
};

void validate_grid(const QuadratureGrid& grid, int dim) {
  if (grid.points.rows() == 0) throw std::invalid_argument("empty quadrature grid");
  if (grid.points.cols() != dim)
    throw std::invalid_argument("quadrature grid dimension mismatch");
  if (grid.weights.size() != grid.points.rows())
    throw std::invalid_argument("quadrature weights do not match the points");
  if (grid.weights.minCoeff() < 0.0)
    throw std::invalid_argument("quadrature weights must be nonnegative");
}

Side make_side(const KernelBasis& basis, const QuadratureGrid& grid) {
  Side s;
  EvalTable table = eval_basis(basis, grid.points);
  s.phi = std::move(table.values);
  s.dphi = std::move(table.gradients);
  s.w = grid.weights;
  s.sqw = grid.weights.cwiseSqrt();
  s.weighted = s.sqw.asDiagonal() * s.phi;
  s.qr.compute(s.weighted);
  if (s.qr.rank() < basis.size())
    throw std::invalid_argument(
        "kernel family is numerically singular on the fit grid");
  s.gram = s.phi.transpose() * s.w.asDiagonal() * s.phi;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.gram);
  s.gram_lmax = es.eigenvalues().maxCoeff();
  return s;
}

// Target matrix for single-state fits: column k holds grad phi_k . f on the
// grid.
Matrix single_targets(const Side& s, const VectorField& f, const Matrix& points) {
  Matrix fv(points.rows(), points.cols());
  f.value_batch(points, fv);
  Matrix targets = Matrix::Zero(s.phi.rows(), s.phi.cols());
  for (int a = 0; a < points.cols(); ++a)
    targets.array() += s.dphi[a].array().colwise() * fv.col(a).array();
  return targets;
}

// Component tables of the pair map over the product grid: out[a](p, q) is
// component a of g(x_p, y_q).
std::vector<Matrix> pair_components(const PairField& g, const Matrix& points) {
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  std::vector<Matrix> out(d, Matrix(n, n));
  double x[2], y[2], value[2];
  for (int p = 0; p < n; ++p) {
    for (int a = 0; a < d; ++a) x[a] = points(p, a);
    for (int q = 0; q < n; ++q) {
      for (int a = 0; a < d; ++a) y[a] = points(q, a);
      g.value(x, y, value);
      for (int a = 0; a < d; ++a) out[a](p, q) = value[a];
    }
  }
  return out;
}

// Pair target for one kernel: H(p, q) = grad phi_k(x_p) . g(x_p, y_q).
Matrix pair_target(const Side& s, const std::vector<Matrix>& comps, int k) {
  Matrix h = Matrix::Zero(comps[0].rows(), comps[0].cols());
  for (std::size_t a = 0; a < comps.size(); ++a)
    h.array() += comps[a].array().colwise() * s.dphi[a].col(k).array();
  return h;
}

// Least squares over the product rule: B = pinv(Wx Phi) C pinv(Wy Psi)',
// with C the weighted target.
Matrix pair_l2_solve(const Side& sx, const Side& sy, const Matrix& h) {
  Matrix c = sx.sqw.asDiagonal() * h * sy.sqw.asDiagonal();
  Matrix left = sx.qr.solve(c);                           // Mx x n
  return sy.qr.solve(left.transpose()).transpose();       // Mx x My
}

// ---------------------------------------------------------------------------
// Sup-norm fit of one target vector as a linear program. The epigraph problem
// min t s.t. |design a - target| <= t is solved through its dual, which has
// only M + 1 rows: the duals of the equality system then recover (a, t).
struct LinfOutcome {
  Vector coeffs;
  bool ok = false;
  long iterations = 0;
};

LinfOutcome linf_lp(const Matrix& design, const Vector& target) {
  const int n = static_cast<int>(design.rows());
  const int m = static_cast<int>(design.cols());

  LpProblem p;
  p.a = Matrix(m + 1, 2 * n);
  p.a.block(0, 0, m, n) = design.transpose();
  p.a.block(0, n, m, n) = -design.transpose();
  p.a.row(m).setOnes();
  p.b = Vector::Zero(m + 1);
  p.b[m] = 1.0;
  p.c = Vector(2 * n);
  p.c.head(n) = target;
  p.c.tail(n) = -target;

  const LpResult r = solve_lp(p);
  LinfOutcome out;
  out.iterations = r.iterations;
  if (r.status == LpStatus::Optimal) {
    out.coeffs = r.y.head(m);
    out.ok = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constrained solves: FISTA over matrix slices with function-value restart,
// stopping when the objective and the constraint violation both stagnate
// below tol.
struct FirstOrderProblem {
  std::function<double(const std::vector<Matrix>&)> objective;
  std::function<std::vector<Matrix>(const std::vector<Matrix>&)> gradient;
  // Projects in place; returns the violation left against the true bounds.
  std::function<double(std::vector<Matrix>&)> project;
  double lipschitz = 1.0;
};

struct FirstOrderOutcome {
  std::vector<Matrix> vars;
  long iterations = 0;
  bool converged = false;
  double violation = 0.0;
  double objective = 0.0;
};

FirstOrderOutcome run_first_order(const FirstOrderProblem& problem,
                                  std::vector<Matrix> start, long budget,
                                  double tol) {
  FirstOrderOutcome out;
  const double step = 1.0 / std::max(problem.lipschitz, 1e-300);

  std::vector<Matrix> x = std::move(start);
  double vio = problem.project(x);
  std::vector<Matrix> x_prev = x;
  double obj = problem.objective(x);
  double theta = 1.0;
  bool stalled = false;

  while (out.iterations < budget) {
    ++out.iterations;
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double momentum = (theta - 1.0) / theta_next;

    std::vector<Matrix> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      z[i] = x[i] + momentum * (x[i] - x_prev[i]);

    std::vector<Matrix> grad = problem.gradient(z);
    std::vector<Matrix> cand(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cand[i] = z[i] - step * grad[i];
    double cand_vio = problem.project(cand);
    double cand_obj = problem.objective(cand);

    if (cand_obj > obj) {
      // Momentum overshot: restart from the last iterate.
      grad = problem.gradient(x);
      for (std::size_t i = 0; i < x.size(); ++i) cand[i] = x[i] - step * grad[i];
      cand_vio = problem.project(cand);
      cand_obj = problem.objective(cand);
      theta = 1.0;
    } else {
      theta = theta_next;
    }

    const double obj_change = std::abs(obj - cand_obj);
    const double vio_change = std::abs(vio - cand_vio);
    x_prev = std::move(x);
    x = std::move(cand);
    obj = cand_obj;
    vio = cand_vio;

    if (obj_change < tol && (vio < tol || vio_change < tol)) {
      stalled = true;
      break;
    }
  }

  out.vars = std::move(x);
  // "Converged" here means the iteration settled before the budget ran out.
  // Callers combine it with the violation of the final (possibly polished)
  // iterate, since `project` may be an approximate inner projection.
  out.converged = stalled;
  out.violation = vio;
  out.objective = obj;
  return out;
}

// Clips the spectrum of the symmetric part of a into [lo, hi], keeping the
// skew part. Passing lo = -inf gives the one-sided log-norm projection.
Matrix clip_symmetric_part(const Matrix& a, double lo, double hi) {
  Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector ev = es.eigenvalues();
  bool changed = false;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > hi) {
      ev[i] = hi;
      changed = true;
    } else if (ev[i] < lo) {
      ev[i] = lo;
      changed = true;
    }
  }
  if (!changed) return a;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose() +
         (a - sym);
}

double two_sided_violation(const Matrix& a, double kappa) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()),
                                           Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  const double bottom = es.eigenvalues().minCoeff();
  return std::max({0.0, top - kappa, -bottom - kappa});
}

// Broadcast / validate the per-index bounds; empty means unconstrained.
std::vector<double> expand_kappa(const std::vector<double>& kappa, int count) {
  if (kappa.empty()) return {};
  if (kappa.size() == 1) return std::vector<double>(count, kappa[0]);
  if (static_cast<int>(kappa.size()) != count)
    throw std::invalid_argument("per-index constraint list has the wrong length");
  return kappa;
}

bool any_finite(const std::vector<double>& kappa) {
  for (double k : kappa)
    if (k < kInf) return true;
  return false;
}

Matrix btilde_slice(const std::vector<Matrix>& b, int l) {
  const int m = static_cast<int>(b.size());
  Matrix bt(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) bt(i, j) = b[i](l, j) + b[i](j, l);
  return bt;
}

double quadratic_violation(const std::vector<Matrix>& b,
                           const std::vector<double>& kappa) {
  double v = 0.0;
  for (std::size_t l = 0; l < b.size(); ++l) {
    if (kappa[l] >= kInf) continue;
    v = std::max(v, two_sided_violation(btilde_slice(b, static_cast<int>(l)),
                                        kappa[l]));
  }
  return v;
}

// Cyclic projection of the coupled Btilde constraints. Each pass projects
// every bounded slice exactly (minimum-norm write-back into the B entries),
// but slices share entries, so passes repeat until the joint violation
// settles.
double project_quadratic(std::vector<Matrix>& b, const std::vector<double>& kappa,
                         double tol, int max_passes) {
  const int m = static_cast<int>(b.size());
  for (int pass = 0; pass < max_passes; ++pass) {
    double clamped_vio = 0.0;
    for (int l = 0; l < m; ++l) {
      if (kappa[l] >= kInf) continue;
      const double bound = std::max(kappa[l], 0.0);
      const Matrix bt = btilde_slice(b, l);
      const Matrix clipped = clip_symmetric_part(bt, -bound, bound);
      const Matrix delta = clipped - bt;
      if (delta.cwiseAbs().maxCoeff() == 0.0) continue;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          b[i](l, j) += 0.5 * delta(i, j);
          if (j != l) b[i](j, l) += 0.5 * delta(i, j);
        }
      }
    }
    for (int l = 0; l < m; ++l) {
      if (kappa[l] >= kInf) continue;
      clamped_vio = std::max(
          clamped_vio, two_sided_violation(btilde_slice(b, l),
                                           std::max(kappa[l], 0.0)));
    }
    if (clamped_vio < 0.5 * tol) break;
  }
  return quadratic_violation(b, kappa);
}

// ---------------------------------------------------------------------------
// Smoothed sup-norm objective: temperature-scaled log-sum-exp over both signs
// of every grid residual, converging to max |residual| as the temperature
// drops. Returns the value; when grad_out is non-null it receives the
// softmax-signed residual weights.
double smooth_sup(const Vector& residual, double eta, Vector* grad_out) {
  const double peak = residual.cwiseAbs().maxCoeff();
  double z = 0.0;
  Vector g;
  if (grad_out) g = Vector::Zero(residual.size());
  for (int i = 0; i < residual.size(); ++i) {
    const double up = std::exp((residual[i] - peak) / eta);
    const double down = std::exp((-residual[i] - peak) / eta);
    z += up + down;
    if (grad_out) g[i] = up - down;
  }
  if (grad_out) *grad_out = g / z;
  return peak + eta * std::log(z);
}

// ---------------------------------------------------------------------------
// Shared report assembly. residual(k) must fill sup and weighted l2 numbers.
struct ResidualStats {
  Vector sup;
  Vector l2;
};

FitReport finish_report(const ResidualStats& stats, Vector log_norms,
                        double objective, long iterations, bool converged,
                        double violation) {
  FitReport report;
  report.sup_residuals = stats.sup;
  report.l2_residuals = stats.l2;
  report.eps_total = stats.sup.norm();
  report.log_norms = std::move(log_norms);
  report.objective = objective;
  report.iterations = iterations;
  report.converged = converged;
  report.constraint_violation = violation;
  return report;
}

}  // namespace

// ---------------------------------------------------------------------------

std::pair<LinearModel, FitReport> fit_linear(const KernelBasis& basis,
                                             const VectorField& f,
                                             const QuadratureGrid& grid,
                                             const FitOptions& options) {
  if (f.dim() != basis.dim())
    throw std::invalid_argument("field dimension does not match the basis");
  validate_grid(grid, basis.dim());
  const int m = basis.size();

  Side s = make_side(basis, grid);
  const Matrix targets = single_targets(s, f, grid.points);

  // Least squares solution: always computed, both as the L2 answer and as
  // the fallback / starting point of the other paths.
  Matrix a_ls =
      s.qr.solve(s.sqw.asDiagonal() * targets).transpose().eval();

  Matrix a = a_ls;
  long iterations = 0;
  bool converged = true;
  double violation = 0.0;

  const bool constrained = options.kappa0.has_value();
  if (!constrained && options.norm == FitNorm::Linf) {
    for (int k = 0; k < m; ++k) {
      const LinfOutcome out = linf_lp(s.phi, targets.col(k));
      iterations += out.iterations;
      if (out.ok)
        a.row(k) = out.coeffs.transpose();
      else
        converged = false;  // keep the least squares row
    }
  } else if (constrained) {
    const double kappa0 = *options.kappa0;
    const double eta =
        options.linf_smoothing * (1.0 + targets.cwiseAbs().maxCoeff());
    const Matrix rn = s.phi.transpose() * s.w.asDiagonal() * targets;
    const double const_term =
        (s.sqw.asDiagonal() * targets).squaredNorm();

    FirstOrderProblem problem;
    problem.project = [&](std::vector<Matrix>& vars) {
      vars[0] = clip_symmetric_part(vars[0], -kInf, kappa0);
      return 0.0;
    };
    if (options.norm == FitNorm::L2) {
      problem.lipschitz = 2.0 * s.gram_lmax;
      problem.objective = [&](const std::vector<Matrix>& vars) {
        const Matrix& av = vars[0];
        return (av * s.gram * av.transpose()).trace() -
               2.0 * (av * rn).trace() + const_term;
      };
      problem.gradient = [&](const std::vector<Matrix>& vars) {
        return std::vector<Matrix>{2.0 * (vars[0] * s.gram - rn.transpose())};
      };
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s.phi.transpose() * s.phi);
      problem.lipschitz = es.eigenvalues().maxCoeff() / eta;
      problem.objective = [&](const std::vector<Matrix>& vars) {
        double total = 0.0;
        for (int k = 0; k < m; ++k) {
          const Vector r = s.phi * vars[0].row(k).transpose() - targets.col(k);
          total += smooth_sup(r, eta, nullptr);
        }
        return total;
      };
      problem.gradient = [&](const std::vector<Matrix>& vars) {
        Matrix g(m, m);
        Vector weights;
        for (int k = 0; k < m; ++k) {
          const Vector r = s.phi * vars[0].row(k).transpose() - targets.col(k);
          smooth_sup(r, eta, &weights);
          g.row(k) = (s.phi.transpose() * weights).transpose();
        }
        return std::vector<Matrix>{std::move(g)};
      };
    }

    FirstOrderOutcome out = run_first_order(problem, {a_ls},
                                            options.max_iterations, options.tol);
    a = out.vars[0];
    iterations = out.iterations;
    converged = out.converged && out.violation < options.tol;
    violation = out.violation;
  }

  ResidualStats stats{Vector(m), Vector(m)};
  const Matrix residual = s.phi * a.transpose() - targets;
  for (int k = 0; k < m; ++k) {
    stats.sup[k] = residual.col(k).cwiseAbs().maxCoeff();
    stats.l2[k] = std::sqrt(residual.col(k).cwiseAbs2().dot(s.w));
  }
  const double objective = options.norm == FitNorm::L2
                               ? stats.l2.squaredNorm()
                               : stats.sup.sum();
  Vector log_norms(1);
  log_norms[0] = log_norm_2(a);

  LinearModel model{std::move(a)};
  return {std::move(model), finish_report(stats, std::move(log_norms), objective,
                                          iterations, converged, violation)};
}

// ---------------------------------------------------------------------------

namespace {

// Everything the two pair fits (quadratic and leader) share: per-kernel
// targets H_k over the product grid, least squares slices, LP sup fits, the
// constrained first-order run, and residual accounting.
struct PairFitResult {
  std::vector<Matrix> slices;
  ResidualStats stats;
  double objective = 0.0;
  long iterations = 0;
  bool converged = true;
  double violation = 0.0;
};

PairFitResult fit_pair_slices(
    const Side& sx, const Side& sy, const std::vector<Matrix>& comps,
    const FitOptions& options,
    const std::function<double(std::vector<Matrix>&)>& project,
    bool has_constraints) {
  const int m = static_cast<int>(sx.phi.cols());
  const int my = static_cast<int>(sy.phi.cols());
  const int n = static_cast<int>(sx.phi.rows());

  PairFitResult result;
  result.slices.reserve(m);
  std::vector<Matrix> normal_rhs;
  normal_rhs.reserve(m);
  double const_term = 0.0;
  double target_peak = 0.0;

  for (int k = 0; k < m; ++k) {
    const Matrix h = pair_target(sx, comps, k);
    result.slices.push_back(pair_l2_solve(sx, sy, h));
    if (has_constraints) {
      normal_rhs.push_back(sx.phi.transpose() * sx.w.asDiagonal() * h *
                           sy.w.asDiagonal() * sy.phi);
      const_term +=
          (sx.sqw.asDiagonal() * h * sy.sqw.asDiagonal()).squaredNorm();
    }
    target_peak = std::max(target_peak, h.cwiseAbs().maxCoeff());
  }

  if (!has_constraints && options.norm == FitNorm::Linf) {
    const double entries = static_cast<double>(n) * n * m * my;
    if (entries > kLinfSizeCap)
      throw std::invalid_argument(
          "sup-norm pair fit is too large for the linear programming path");
    Matrix design(n * n, m * my);
    for (int p = 0; p < n; ++p)
      for (int l = 0; l < m; ++l)
        design.block(p * n, l * my, n, my) = sx.phi(p, l) * sy.phi;
    Vector flat(n * n);
    for (int k = 0; k < m; ++k) {
      const Matrix h = pair_target(sx, comps, k);
      for (int p = 0; p < n; ++p) flat.segment(p * n, n) = h.row(p).transpose();
      const LinfOutcome out = linf_lp(design, flat);
      result.iterations += out.iterations;
      if (out.ok) {
        Matrix slice(m, my);
        for (int l = 0; l < m; ++l)
          slice.row(l) = out.coeffs.segment(l * my, my).transpose();
        result.slices[k] = std::move(slice);
      } else {
        result.converged = false;  // least squares slice stays
      }
    }
  } else if (has_constraints) {
    const double eta = options.linf_smoothing * (1.0 + target_peak);

    FirstOrderProblem problem;
    problem.project = project;
    if (options.norm == FitNorm::L2) {
      problem.lipschitz = 2.0 * sx.gram_lmax * sy.gram_lmax;
      problem.objective = [&](const std::vector<Matrix>& vars) {
        double total = const_term;
        for (int k = 0; k < m; ++k) {
          total += (vars[k].transpose() * sx.gram * vars[k] * sy.gram).trace() -
                   2.0 * (vars[k].transpose() * normal_rhs[k]).trace();
        }
        return total;
      };
      problem.gradient = [&](const std::vector<Matrix>& vars) {
        std::vector<Matrix> g(m);
        for (int k = 0; k < m; ++k)
          g[k] = 2.0 * (sx.gram * vars[k] * sy.gram - normal_rhs[k]);
        return g;
      };
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> ex(sx.phi.transpose() * sx.phi);
      Eigen::SelfAdjointEigenSolver<Matrix> ey(sy.phi.transpose() * sy.phi);
      problem.lipschitz =
          ex.eigenvalues().maxCoeff() * ey.eigenvalues().maxCoeff() / eta;
      problem.objective = [&](const std::vector<Matrix>& vars) {
        double total = 0.0;
        for (int k = 0; k < m; ++k) {
          const Matrix r =
              sx.phi * vars[k] * sy.phi.transpose() - pair_target(sx, comps, k);
          total += smooth_sup(Eigen::Map<const Vector>(r.data(), r.size()), eta,
                              nullptr);
        }
        return total;
      };
      problem.gradient = [&](const std::vector<Matrix>& vars) {
        std::vector<Matrix> g(m);
        Vector weights;
        for (int k = 0; k < m; ++k) {
          const Matrix r =
              sx.phi * vars[k] * sy.phi.transpose() - pair_target(sx, comps, k);
          smooth_sup(Eigen::Map<const Vector>(r.data(), r.size()), eta, &weights);
          const Eigen::Map<const Matrix> wmat(weights.data(), n, n);
          g[k] = sx.phi.transpose() * wmat * sy.phi;
        }
        return g;
      };
    }

    FirstOrderOutcome out = run_first_order(
        problem, std::move(result.slices), options.max_iterations, options.tol);
    result.slices = std::move(out.vars);
    result.iterations = out.iterations;
    result.converged = out.converged;
    result.violation = out.violation;
  }

  result.stats.sup = Vector(m);
  result.stats.l2 = Vector(m);
  for (int k = 0; k < m; ++k) {
    const Matrix residual =
        sx.phi * result.slices[k] * sy.phi.transpose() - pair_target(sx, comps, k);
    result.stats.sup[k] = residual.cwiseAbs().maxCoeff();
    result.stats.l2[k] = std::sqrt(
        (sx.w.asDiagonal() * residual.cwiseAbs2() * sy.w.asDiagonal()).sum());
  }
  result.objective = options.norm == FitNorm::L2 ? result.stats.l2.squaredNorm()
                                                 : result.stats.sup.sum();
  return result;
}

}  // namespace

std::pair<QuadraticModel, FitReport> fit_quadratic(const KernelBasis& basis,
                                                   const PairField& g,
                                                   const QuadratureGrid& grid,
                                                   const FitOptions& options) {
  if (g.dim() != basis.dim())
    throw std::invalid_argument("pair map dimension does not match the basis");
  validate_grid(grid, basis.dim());
  const int m = basis.size();

  Side s = make_side(basis, grid);
  const std::vector<Matrix> comps = pair_components(g, grid.points);

  const std::vector<double> kappa = expand_kappa(options.kappa, m);
  const bool constrained = any_finite(kappa);

  auto project = [&](std::vector<Matrix>& vars) {
    return project_quadratic(vars, kappa, options.tol, 8);
  };
  PairFitResult fit =
      fit_pair_slices(s, s, comps, options, project, constrained);

  if (constrained) {
    // Long polishing run so a reported success really meets the bounds.
    fit.violation = project_quadratic(fit.slices, kappa, options.tol, 10000);
    fit.converged = fit.converged && fit.violation < options.tol;
  }

  QuadraticModel model = make_quadratic_model(std::move(fit.slices));

  Vector log_norms(m);
  for (int l = 0; l < m; ++l)
    log_norms[l] =
        std::max(log_norm_2(model.btilde[l]), log_norm_2(-model.btilde[l]));

  // Residuals may have moved during polishing; recompute.
  if (constrained) {
    for (int k = 0; k < m; ++k) {
      const Matrix residual =
          s.phi * model.b[k] * s.phi.transpose() - pair_target(s, comps, k);
      fit.stats.sup[k] = residual.cwiseAbs().maxCoeff();
      fit.stats.l2[k] = std::sqrt(
          (s.w.asDiagonal() * residual.cwiseAbs2() * s.w.asDiagonal()).sum());
    }
    fit.objective = options.norm == FitNorm::L2 ? fit.stats.l2.squaredNorm()
                                                : fit.stats.sup.sum();
  }

  return {std::move(model),
          finish_report(fit.stats, std::move(log_norms), fit.objective,
                        fit.iterations, fit.converged, fit.violation)};
}

std::pair<LeaderModel, FitReport> fit_leader(const KernelBasis& phi,
                                             const KernelBasis& psi,
                                             const PairField& eta,
                                             const QuadratureGrid& grid,
                                             const FitOptions& options) {
  if (eta.dim() != phi.dim())
    throw std::invalid_argument("pair map dimension does not match the basis");
  if (psi.dim() != phi.dim())
    throw std::invalid_argument("leader family dimension mismatch");
  validate_grid(grid, phi.dim());
  const int m = phi.size();
  const int ml = psi.size();

  Side sx = make_side(phi, grid);
  Side sy = make_side(psi, grid);
  const std::vector<Matrix> comps = pair_components(eta, grid.points);

  const std::vector<double> kappa = expand_kappa(options.kappa, ml);
  const bool constrained = any_finite(kappa);

  // The slices C_k(l, r) regroup into Gamma_r(k, l); each entry belongs to
  // exactly one Gamma, so spectral clipping per Gamma is an exact projection.
  auto project = [&](std::vector<Matrix>& vars) {
    double violation = 0.0;
    for (int r = 0; r < ml; ++r) {
      if (kappa[r] >= kInf) continue;
      Matrix gamma(m, m);
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) gamma(k, l) = vars[k](l, r);
      const double bound = std::max(kappa[r], 0.0);
      const Matrix clipped = clip_symmetric_part(gamma, -bound, bound);
      if ((clipped - gamma).cwiseAbs().maxCoeff() != 0.0) {
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) vars[k](l, r) = clipped(k, l);
      }
      violation = std::max(violation, std::max(0.0, -kappa[r]));
    }
    return violation;
  };

  PairFitResult fit =
      fit_pair_slices(sx, sy, comps, options, project, constrained);
  if (constrained) fit.converged = fit.converged && fit.violation < options.tol;

  LeaderModel model{std::vector<Matrix>(), psi};
  model.gamma.assign(ml, Matrix(m, m));
  for (int r = 0; r < ml; ++r)
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l) model.gamma[r](k, l) = fit.slices[k](l, r);

  Vector log_norms(ml);
  for (int r = 0; r < ml; ++r)
    log_norms[r] =
        std::max(log_norm_2(model.gamma[r]), log_norm_2(-model.gamma[r]));

  return {std::move(model),
          finish_report(fit.stats, std::move(log_norms), fit.objective,
                        fit.iterations, fit.converged, fit.violation)};
}

}  // namespace momentkit
