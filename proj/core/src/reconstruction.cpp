#include "momentkit/reconstruction.hpp"

#include "momentkit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace momentkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Edge {
  long from = 0;
  long to = 0;
  double weight = 0.0;  // cell_volume / spacing along the edge's axis
};

// Forward-difference edges along each axis, zero-flux boundary (no edge
// crosses the boundary).
std::vector<Edge> build_edges(const CellGrid& grid) {
  const int d = grid.box.dim();
  std::vector<long> stride(d, 1);
  for (int a = 1; a < d; ++a) stride[a] = stride[a - 1] * grid.cells[a - 1];

  std::vector<Edge> edges;
  for (int a = 0; a < d; ++a) {
    const double weight = grid.cell_volume / grid.spacings[a];
    for (long i = 0; i < grid.size(); ++i) {
      const long along = (i / stride[a]) % grid.cells[a];
      if (along + 1 < grid.cells[a])
        edges.push_back({i, i + stride[a], weight});
    }
  }
  return edges;
}

// Projects s onto {q : sum |q_k| <= radius} in the norm weighted by 1/sig:
// the minimizer is the soft threshold q_k = sign(s_k) max(0, |s_k| - mu
// sig_k) at the smallest mu >= 0 bringing the l1 norm inside.
void weighted_l1_ball(Vector& s, const Vector& sig, double radius) {
  if (s.cwiseAbs().sum() <= radius) return;
  const long n = s.size();
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](long i, long j) {
    return std::abs(s[i]) / sig[i] < std::abs(s[j]) / sig[j];
  });

  // Over [mu_prev, breakpoint]: f(mu) = abs_sum - mu * sig_sum, decreasing.
  double abs_sum = s.cwiseAbs().sum();
  double sig_sum = sig.sum();
  double mu = 0.0;
  for (long r = 0; r < n; ++r) {
    const long k = order[r];
    const double breakpoint = std::abs(s[k]) / sig[k];
    const double candidate = (abs_sum - radius) / sig_sum;
    if (candidate <= breakpoint) {
      mu = std::max(candidate, 0.0);
      break;
    }
    abs_sum -= std::abs(s[k]);
    sig_sum -= sig[k];
    mu = breakpoint;
  }
  for (long k = 0; k < n; ++k) {
    const double soft = std::max(0.0, std::abs(s[k]) - mu * sig[k]);
    s[k] = s[k] < 0.0 ? -soft : soft;
  }
}

void check_family(const Vector& m, const KernelBasis& basis,
                  const CellGrid& grid) {
  if (m.size() != basis.size())
    throw std::invalid_argument("moment vector size does not match the family");
  if (basis.dim() != grid.box.dim())
    throw std::invalid_argument("grid dimension does not match the family");
}

}  // namespace

CellGrid make_cell_grid(const BoxDomain& box, const std::vector<int>& cells) {
  const int d = box.dim();
  if (static_cast<int>(cells.size()) != d)
    throw std::invalid_argument("one cell count per axis is required");
  long total = 1;
  for (int a = 0; a < d; ++a) {
    if (cells[a] < 1) throw std::invalid_argument("cell counts must be >= 1");
    if (total > (1L << 22) / cells[a])
      throw std::invalid_argument("cell grid is too large");
    total *= cells[a];
  }

  CellGrid grid{box, cells, Matrix(total, d), Vector(d), 1.0};
  for (int a = 0; a < d; ++a) {
    grid.spacings[a] = box.side(a) / cells[a];
    grid.cell_volume *= grid.spacings[a];
  }
  std::vector<long> stride(d, 1);
  for (int a = 1; a < d; ++a) stride[a] = stride[a - 1] * cells[a - 1];
  for (long i = 0; i < total; ++i)
    for (int a = 0; a < d; ++a) {
      const long along = (i / stride[a]) % cells[a];
      grid.centers(i, a) = box.lower(a) + (along + 0.5) * grid.spacings[a];
    }
  return grid;
}

CellGrid default_cell_grid(const BoxDomain& box) {
  if (box.dim() == 1) return make_cell_grid(box, {400});
  if (box.dim() == 2) return make_cell_grid(box, {80, 80});
  throw std::invalid_argument("no default cell grid beyond two dimensions");
}

Vector measure_moments(const GridMeasure& measure, const KernelBasis& basis) {
  if (measure.density.size() != measure.grid.size())
    throw std::invalid_argument("density size does not match the grid");
  if (basis.dim() != measure.grid.box.dim())
    throw std::invalid_argument("grid dimension does not match the family");
  const EvalTable table = eval_basis(basis, measure.grid.centers);
  return table.values.transpose() *
         (measure.density * measure.grid.cell_volume);
}

ReconstructionResult reconstruct_tv(const Vector& m, const KernelBasis& basis,
                                    const CellGrid& grid, double lambda) {
  check_family(m, basis, grid);
  if (!(lambda > 0.0))
    throw std::invalid_argument("the mismatch weight must be positive");
  const int k0 = basis.constant_index();
  if (k0 < 0)
    throw std::invalid_argument(
        "density recovery requires the constant kernel in the family");

  const long n = grid.size();
  const int mk = basis.size();
  const EvalTable table = eval_basis(basis, grid.centers);
  // a(k, i) = phi_k(center_i) * volume, so moments(density) = a * density.
  const Matrix a = table.values.transpose() * grid.cell_volume;
  const std::vector<Edge> edges = build_edges(grid);
  const long ne = static_cast<long>(edges.size());

  // Diagonal preconditioning: dual steps from row sums of |[D; a]|, primal
  // steps from its column sums.
  Vector tau = a.cwiseAbs().colwise().sum().transpose();
  Vector sigma_p(ne);
  for (long e = 0; e < ne; ++e) {
    sigma_p[e] = 1.0 / (2.0 * edges[e].weight);
    tau[edges[e].from] += edges[e].weight;
    tau[edges[e].to] += edges[e].weight;
  }
  tau = tau.cwiseMax(1e-300).cwiseInverse();
  Vector sigma_q = a.cwiseAbs()
                       .rowwise()
                       .sum()
                       .cwiseMax(1e-300)
                       .cwiseInverse();

  Vector x = Vector::Constant(n, std::max(0.0, m[k0]) / grid.box.volume());
  Vector x_bar = x;
  Vector p = Vector::Zero(ne);
  Vector q = Vector::Zero(mk);
  Vector dx(ne), grad(n), mismatch(mk), certificate(n);

  auto apply_d = [&](const Vector& v, Vector& out) {
    for (long e = 0; e < ne; ++e)
      out[e] = edges[e].weight * (v[edges[e].to] - v[edges[e].from]);
  };
  auto apply_dt_at = [&](const Vector& pe, const Vector& qk, Vector& out) {
    out.noalias() = a.transpose() * qk;
    for (long e = 0; e < ne; ++e) {
      out[edges[e].from] -= edges[e].weight * pe[e];
      out[edges[e].to] += edges[e].weight * pe[e];
    }
  };

  // Objective and certified dual lower bound at a candidate primal-dual
  // triple. The dual point is made feasible by shifting negative reduced
  // costs onto the constant-kernel dual and scaling into the l1 ball, so the
  // bound is genuine whenever |pv| <= 1; best primal and best dual values
  // certify the reported gap independently of which iterate produced them.
  auto value_at = [&](const Vector& xv, const Vector& pv, const Vector& qv) {
    apply_d(xv, dx);
    mismatch.noalias() = a * xv;
    mismatch -= m;
    const double primal =
        dx.cwiseAbs().sum() + lambda * mismatch.cwiseAbs().maxCoeff();
    apply_dt_at(pv, qv, certificate);
    const double shift =
        std::max(0.0, -certificate.minCoeff()) / grid.cell_volume;
    const double l1 =
        qv.cwiseAbs().sum() - std::abs(qv[k0]) + std::abs(qv[k0] + shift);
    const double alpha = l1 > lambda ? lambda / l1 : 1.0;
    const double dual = -alpha * (m.dot(qv) + shift * m[k0]);
    return std::pair<double, double>(primal, dual);
  };

  // Plain primal-dual iterations converge slowly on piecewise-linear
  // problems, so the loop restarts at the epoch average (or the last
  // iterate, whichever certifies better) whenever the point gap halves, and
  // rebalances the primal/dual step ratio from the movement of the iterates.
  // Each epoch is an ordinary convergent run, and the restarts typically
  // make the overall scheme linearly convergent on problems of this class.
  const long budget = 50000;
  const long check_every = 25;
  const long epoch_cap = 2000;

  double omega = 1.0;
  Vector tau_eff = tau;
  Vector sigma_p_eff = sigma_p;
  Vector sigma_q_eff = sigma_q;

  Vector xsum = Vector::Zero(n);
  Vector psum = Vector::Zero(ne);
  Vector qsum = Vector::Zero(mk);
  Vector x_start = x, p_start = p, q_start = q;
  long epoch_iters = 0;

  Vector best_x = x;
  auto [best_primal, best_dual] = value_at(x, p, q);
  double epoch_gap = best_primal - best_dual;

  auto tolerance_met = [&] {
    return best_primal - best_dual <= 1e-6 * (1.0 + std::abs(best_primal));
  };

  long iter = 0;
  while (!tolerance_met() && iter < budget) {
    ++iter;
    ++epoch_iters;
    // Dual ascent: per-edge clamp for the TV term, weighted l1-ball
    // projection (shifted by the moment data) for the sup term.
    apply_d(x_bar, dx);
    p += sigma_p_eff.cwiseProduct(dx);
    p = p.cwiseMax(-1.0).cwiseMin(1.0);
    mismatch.noalias() = a * x_bar;
    mismatch -= m;
    q += sigma_q_eff.cwiseProduct(mismatch);
    weighted_l1_ball(q, sigma_q_eff, lambda);

    // Primal descent with nonnegativity.
    apply_dt_at(p, q, grad);
    x_bar = x;  // keep the previous iterate for the extrapolation
    x = (x - tau_eff.cwiseProduct(grad)).cwiseMax(0.0);
    x_bar = 2.0 * x - x_bar;

    xsum += x;
    psum += p;
    qsum += q;

    if (iter % check_every == 0 || iter == budget) {
      const auto [primal_last, dual_last] = value_at(x, p, q);
      const Vector x_avg = xsum / static_cast<double>(epoch_iters);
      const Vector p_avg = psum / static_cast<double>(epoch_iters);
      const Vector q_avg = qsum / static_cast<double>(epoch_iters);
      const auto [primal_avg, dual_avg] = value_at(x_avg, p_avg, q_avg);

      if (primal_last < best_primal) {
        best_primal = primal_last;
        best_x = x;
      }
      if (primal_avg < best_primal) {
        best_primal = primal_avg;
        best_x = x_avg;
      }
      best_dual = std::max({best_dual, dual_last, dual_avg});
      if (tolerance_met()) break;

      const double gap_last = primal_last - dual_last;
      const double gap_avg = primal_avg - dual_avg;
      const bool avg_better = gap_avg < gap_last;
      const Vector& cand_x = avg_better ? x_avg : x;
      const Vector& cand_p = avg_better ? p_avg : p;
      const Vector& cand_q = avg_better ? q_avg : q;
      const double cand_gap = avg_better ? gap_avg : gap_last;

      if (cand_gap <= 0.5 * epoch_gap || epoch_iters >= epoch_cap) {
        const double primal_move = (cand_x - x_start).norm();
        const double dual_move =
            std::sqrt((cand_p - p_start).squaredNorm() +
                      (cand_q - q_start).squaredNorm());
        if (primal_move > 1e-10 * (1.0 + x_start.norm()) &&
            dual_move > 1e-10 * (1.0 + p_start.norm() + q_start.norm()))
          omega = std::clamp(
              std::exp(0.5 * std::log(dual_move / primal_move) +
                       0.5 * std::log(omega)),
              1e-2, 1e3);
        tau_eff = tau / omega;
        sigma_p_eff = sigma_p * omega;
        sigma_q_eff = sigma_q * omega;

        x = cand_x;
        p = cand_p;
        q = cand_q;
        x_bar = x;
        x_start = x;
        p_start = p;
        q_start = q;
        xsum.setZero();
        psum.setZero();
        qsum.setZero();
        epoch_iters = 0;
        epoch_gap = cand_gap;
      }
    }
  }

  // Rebuild the mismatch and gradient magnitudes of the returned point.
  apply_d(best_x, dx);
  mismatch.noalias() = a * best_x;
  mismatch -= m;
  ReconstructionResult result{GridMeasure{grid, best_x},
                              mismatch.cwiseAbs().maxCoeff(),
                              dx.cwiseAbs().sum(),
                              iter,
                              best_primal - best_dual,
                              tolerance_met(),
                              {}};
  if (!result.converged)
    result.warning = "duality gap above tolerance after the iteration budget";
  else if (m[k0] <= 0.0)
    result.warning = "nonpositive mass moment; the recovered density is zero";
  return result;
}

namespace {

// Shared by the two public entry points: solves min/max of mass on the
// region, relaxing the matching band if exact matching is infeasible.
MassBoundResult solve_mass_bounds(const Vector& m, const KernelBasis& basis,
                                  const CellGrid& grid,
                                  std::vector<char> region) {
  check_family(m, basis, grid);
  const long n = grid.size();
  if (static_cast<long>(region.size()) != n)
    throw std::invalid_argument("region mask size does not match the grid");

  const EvalTable table = eval_basis(basis, grid.centers);
  const Matrix a = table.values.transpose();  // moments of unit cell masses
  const int mk = basis.size();

  Vector indicator = Vector::Zero(n);
  for (long i = 0; i < n; ++i)
    if (region[i]) indicator[i] = 1.0;

  MassBoundResult result;
  result.region = std::move(region);

  // Exact matching first.
  LpProblem exact;
  exact.a = a;
  exact.b = m;
  exact.c = indicator;
  LpResult min_run = solve_lp(exact);

  double band = 0.0;
  if (min_run.status == LpStatus::Infeasible) {
    // Minimal band: min delta over (w, delta, u, l) >= 0 with
    // a w - delta + u = m (upper side) and a w + delta - l = m (lower side).
    LpProblem relax;
    relax.a = Matrix::Zero(2 * mk, n + 1 + 2 * mk);
    relax.a.block(0, 0, mk, n) = a;
    relax.a.block(mk, 0, mk, n) = a;
    relax.a.block(0, n, mk, 1) = -Vector::Ones(mk);
    relax.a.block(mk, n, mk, 1) = Vector::Ones(mk);
    relax.a.block(0, n + 1, mk, mk) = Matrix::Identity(mk, mk);
    relax.a.block(mk, n + 1 + mk, mk, mk) = -Matrix::Identity(mk, mk);
    relax.b = Vector(2 * mk);
    relax.b.head(mk) = m;
    relax.b.tail(mk) = m;
    relax.c = Vector::Zero(n + 1 + 2 * mk);
    relax.c[n] = 1.0;
    const LpResult relaxed = solve_lp(relax);
    if (relaxed.status != LpStatus::Optimal)
      throw std::runtime_error("moment-matching relaxation failed to solve");
    band = std::max(relaxed.objective, 0.0) * (1.0 + 1e-6) + 1e-9;
  }

  LpProblem banded;
  if (band > 0.0) {
    // a w + u = m + band, a w - l = m - band with slack variables u, l.
    banded.a = Matrix::Zero(2 * mk, n + 2 * mk);
    banded.a.block(0, 0, mk, n) = a;
    banded.a.block(mk, 0, mk, n) = a;
    banded.a.block(0, n, mk, mk) = Matrix::Identity(mk, mk);
    banded.a.block(mk, n + mk, mk, mk) = -Matrix::Identity(mk, mk);
    banded.b = Vector(2 * mk);
    banded.b.head(mk) = m.array() + band;
    banded.b.tail(mk) = m.array() - band;
    banded.c = Vector::Zero(n + 2 * mk);
    banded.c.head(n) = indicator;
    min_run = solve_lp(banded);
  }
  if (min_run.status != LpStatus::Optimal)
    throw std::runtime_error("mass minimization did not reach an optimum");

  LpProblem max_problem = band > 0.0 ? banded : exact;
  max_problem.c.head(n) = -indicator;
  const LpResult max_run = solve_lp(max_problem);
  if (max_run.status == LpStatus::Unbounded) {
    result.max_mass = kInf;
  } else if (max_run.status == LpStatus::Optimal) {
    result.max_mass = -max_run.objective;
    result.max_masses = max_run.x.head(n);
  } else {
    throw std::runtime_error("mass maximization did not reach an optimum");
  }

  result.min_mass = min_run.objective;
  result.min_masses = min_run.x.head(n);
  result.relaxation = band;
  return result;
}

}  // namespace

MassBoundResult mass_bounds(const Vector& m, const KernelBasis& basis,
                            const CellGrid& grid,
                            const std::vector<char>& region) {
  return solve_mass_bounds(m, basis, grid, region);
}

MassBoundResult mass_bounds(const Vector& m, const KernelBasis& basis,
                            const CellGrid& grid, const BoxDomain& region) {
  if (region.dim() != grid.box.dim())
    throw std::invalid_argument("region dimension does not match the grid");
  std::vector<char> mask(grid.size(), 0);
  Vector center(grid.box.dim());
  for (long i = 0; i < grid.size(); ++i) {
    center = grid.centers.row(i).transpose();
    mask[i] = region.contains(center) ? 1 : 0;
  }
  return solve_mass_bounds(m, basis, grid, std::move(mask));
}

}  // namespace momentkit
