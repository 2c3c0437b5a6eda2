#include "momentkit/moment_flow.hpp"

#include "momentkit/kernel_basis.hpp"
#include "momentkit/log_norm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace momentkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed-step RK4 over [0, T]; rhs(t, m) may vary in time. Every step is
// recorded; the final step is shortened to land exactly on T.
template <typename Rhs>
MomentTrajectory run_rk4(const Vector& m0, double T, double h, Rhs&& rhs) {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(T >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  const long steps =
      T == 0.0 ? 0 : static_cast<long>(std::ceil(T / h - 1e-9));

  MomentTrajectory track;
  track.times = Vector(steps + 1);
  track.values = Matrix(steps + 1, m0.size());
  track.times[0] = 0.0;
  track.values.row(0) = m0.transpose();

  Vector m = m0;
  double t = 0.0;
  for (long i = 1; i <= steps; ++i) {
    const double next = std::min(T, static_cast<double>(i) * h);
    const double dt = next - t;
    const Vector k1 = rhs(t, m);
    const Vector k2 = rhs(t + 0.5 * dt, Vector(m + 0.5 * dt * k1));
    const Vector k3 = rhs(t + 0.5 * dt, Vector(m + 0.5 * dt * k2));
    const Vector k4 = rhs(next, Vector(m + dt * k3));
    m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = next;
    if (!m.allFinite() || m.cwiseAbs().maxCoeff() > 1e100)
      throw DivergedError(t, "moment trajectory diverged");
    track.times[i] = t;
    track.values.row(i) = m.transpose();
  }
  return track;
}

void validate_box(const MomentBox& box, long count, const char* what) {
  if (box.lower.size() != count || box.upper.size() != count)
    throw std::invalid_argument(std::string(what) +
                                ": box size does not match");
  if ((box.lower.array() > box.upper.array()).any())
    throw std::invalid_argument(std::string(what) +
                                ": box has lower > upper");
}

double growth_bound(double rate, double eps_total, double dm0, double t) {
  if (eps_total < 0.0 || dm0 < 0.0 || t < 0.0)
    throw std::invalid_argument("bound inputs must be nonnegative");
  if (std::abs(rate) < 1e-12) return dm0 + eps_total * t;
  const double growth = std::expm1(rate * t);
  return dm0 * (growth + 1.0) + eps_total * growth / rate;
}

}  // namespace

MomentBox moment_hull(const MomentTrajectory& track, double inflate) {
  if (track.values.rows() == 0)
    throw std::invalid_argument("cannot take the hull of an empty trajectory");
  MomentBox box;
  box.lower = track.values.colwise().minCoeff().transpose();
  box.upper = track.values.colwise().maxCoeff().transpose();
  if (inflate != 0.0) {
    const Vector margin = 0.5 * inflate * (box.upper - box.lower);
    box.lower -= margin;
    box.upper += margin;
  }
  return box;
}

MomentTrajectory integrate_linear(const LinearModel& model, const Vector& m0,
                                  double T, double h) {
  if (model.a.rows() != model.a.cols() || model.a.rows() != m0.size())
    throw std::invalid_argument("state size does not match the model");
  return run_rk4(m0, T, h,
                 [&](double, const Vector& m) -> Vector { return model.a * m; });
}

MomentTrajectory integrate_quadratic(const QuadraticModel& model,
                                     const Vector& m0, double T, double h,
                                     const MomentBox* monitor,
                                     double* exit_time) {
  const long m_count = static_cast<long>(model.b.size());
  if (m_count == 0 || m0.size() != m_count)
    throw std::invalid_argument("state size does not match the model");
  if (monitor != nullptr) validate_box(*monitor, m_count, "moment box");

  Vector rate(m_count);
  MomentTrajectory track =
      run_rk4(m0, T, h, [&](double, const Vector& m) -> Vector {
        for (long k = 0; k < m_count; ++k) rate[k] = m.dot(model.b[k] * m);
        return rate;
      });

  if (monitor != nullptr && exit_time != nullptr) {
    *exit_time = kInf;
    for (long i = 0; i < track.times.size(); ++i) {
      const auto row = track.values.row(i).transpose().array();
      if ((row < monitor->lower.array()).any() ||
          (row > monitor->upper.array()).any()) {
        *exit_time = track.times[i];
        break;
      }
    }
  }
  return track;
}

MomentTrajectory integrate_leader(const LeaderModel& model,
                                  const std::vector<LeaderTrack>& tracks,
                                  const Vector& m0, double T, double h) {
  const int ml = model.psi.size();
  const int d = model.psi.dim();
  if (static_cast<int>(model.gamma.size()) != ml)
    throw std::invalid_argument("influence slices do not match the family");
  const long m_count = ml > 0 ? model.gamma[0].rows() : 0;
  if (m_count == 0 || m0.size() != m_count)
    throw std::invalid_argument("state size does not match the model");
  for (const LeaderTrack& track : tracks)
    if (track.dim() != d)
      throw std::invalid_argument("leader track dimension mismatch");

  // The system matrix only changes with the stage time, and RK4 repeats the
  // midpoint, so cache the last assembly.
  Matrix system(m_count, m_count);
  double cached_at = std::numeric_limits<double>::quiet_NaN();
  Vector psi_values(ml);
  Vector y(d);
  auto assemble = [&](double t) {
    if (t == cached_at) return;
    system.setZero();
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      tracks[j].position(t, y.data());
      if (!model.psi.domain().contains(y, 1e-12))
        throw SimulationError(t, static_cast<int>(j),
                              "leader left the kernel domain");
      model.psi.eval_point(y.data(), psi_values.data());
      for (int r = 0; r < ml; ++r)
        system.noalias() += psi_values[r] * model.gamma[r];
    }
    cached_at = t;
  };

  return run_rk4(m0, T, h, [&](double t, const Vector& m) -> Vector {
    assemble(t);
    return system * m;
  });
}

MomentTrajectory integrate_reduced(const LinearModel* linear,
                                   const QuadraticModel* quadratic,
                                   const LeaderModel* leader,
                                   const std::vector<LeaderTrack>& tracks,
                                   const Vector& m0, double T, double h,
                                   const MomentBox* monitor,
                                   double* exit_time) {
  const long m_count = m0.size();
  if (linear == nullptr && quadratic == nullptr && leader == nullptr)
    throw std::invalid_argument("at least one model part is required");
  if (linear != nullptr &&
      (linear->a.rows() != m_count || linear->a.cols() != m_count))
    throw std::invalid_argument("state size does not match the linear part");
  if (quadratic != nullptr &&
      static_cast<long>(quadratic->b.size()) != m_count)
    throw std::invalid_argument("state size does not match the bilinear part");
  if (monitor != nullptr) validate_box(*monitor, m_count, "moment box");

  int ml = 0;
  int d = 0;
  if (leader != nullptr) {
    ml = leader->psi.size();
    d = leader->psi.dim();
    if (static_cast<int>(leader->gamma.size()) != ml)
      throw std::invalid_argument("influence slices do not match the family");
    if (ml == 0 || leader->gamma[0].rows() != m_count)
      throw std::invalid_argument("state size does not match the leader part");
    for (const LeaderTrack& track : tracks)
      if (track.dim() != d)
        throw std::invalid_argument("leader track dimension mismatch");
  }

  Matrix system(m_count, m_count);
  double cached_at = std::numeric_limits<double>::quiet_NaN();
  Vector psi_values(std::max(ml, 1));
  Vector y(std::max(d, 1));
  auto leader_system = [&](double t) -> const Matrix& {
    if (t != cached_at) {
      system.setZero();
      for (std::size_t j = 0; j < tracks.size(); ++j) {
        tracks[j].position(t, y.data());
        if (!leader->psi.domain().contains(y, 1e-12))
          throw SimulationError(t, static_cast<int>(j),
                                "leader left the kernel domain");
        leader->psi.eval_point(y.data(), psi_values.data());
        for (int r = 0; r < ml; ++r)
          system.noalias() += psi_values[r] * leader->gamma[r];
      }
      cached_at = t;
    }
    return system;
  };

  Vector rate(m_count);
  MomentTrajectory track =
      run_rk4(m0, T, h, [&](double t, const Vector& m) -> Vector {
        rate.setZero();
        if (linear != nullptr) rate.noalias() += linear->a * m;
        if (quadratic != nullptr)
          for (long k = 0; k < m_count; ++k)
            rate[k] += m.dot(quadratic->b[k] * m);
        if (leader != nullptr) rate.noalias() += leader_system(t) * m;
        return rate;
      });

  if (monitor != nullptr && exit_time != nullptr) {
    *exit_time = kInf;
    for (long i = 0; i < track.times.size(); ++i) {
      const auto row = track.values.row(i).transpose().array();
      if ((row < monitor->lower.array()).any() ||
          (row > monitor->upper.array()).any()) {
        *exit_time = track.times[i];
        break;
      }
    }
  }
  return track;
}

double bound_linear(double nu, double eps_total, double dm0, double t) {
  return growth_bound(nu, eps_total, dm0, t);
}

double bound_quadratic(double beta, double eps_total, double dm0, double t) {
  return growth_bound(beta, eps_total, dm0, t);
}

ErrorBound bound_series(double rate, double eps_total, double dm0,
                        const Vector& times) {
  ErrorBound bound;
  bound.rate = rate;
  bound.eps_total = eps_total;
  bound.dm0 = dm0;
  bound.times = times;
  bound.values = Vector(times.size());
  for (long i = 0; i < times.size(); ++i)
    bound.values[i] = growth_bound(rate, eps_total, dm0, times[i]);
  return bound;
}

double estimate_beta(const std::vector<Matrix>& btilde, const MomentBox& box) {
  if (btilde.empty())
    throw std::invalid_argument("at least one slice is required");
  validate_box(box, static_cast<long>(btilde.size()), "moment box");
  double beta = 0.0;
  for (std::size_t l = 0; l < btilde.size(); ++l) {
    beta += std::max(log_norm_2(Matrix(box.lower[l] * btilde[l])),
                     log_norm_2(Matrix(box.upper[l] * btilde[l])));
  }
  return beta;
}

double estimate_beta(const QuadraticModel& model, const MomentBox& box) {
  return estimate_beta(model.btilde, box);
}

double leader_rate(const LeaderModel& model,
                   const std::vector<LeaderTrack>& tracks, double horizon,
                   const LeaderBoundOptions& options) {
  if (tracks.empty())
    throw std::invalid_argument("at least one leader track is required");
  if (options.samples_per_axis < 2 || options.track_samples < 2)
    throw std::invalid_argument("scan resolutions must be at least 2");
  if (!(horizon >= 0.0))
    throw std::invalid_argument("horizon must be nonnegative");

  const KernelBasis& psi = model.psi;
  const int ml = psi.size();
  const int d = psi.dim();
  if (static_cast<int>(model.gamma.size()) != ml)
    throw std::invalid_argument("influence slices do not match the family");
  const long m_count = model.gamma[0].rows();

  Vector psi_values(ml);
  Matrix scaled(m_count, m_count);
  Vector y(d);
  auto rate_at = [&](const Vector& point) {
    psi.eval_point(point.data(), psi_values.data());
    scaled.setZero();
    for (int r = 0; r < ml; ++r)
      scaled.noalias() += psi_values[r] * model.gamma[r];
    return log_norm_2(scaled);
  };

  double tau = 0.0;
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    const LeaderTrack& track = tracks[j];
    if (track.dim() != d)
      throw std::invalid_argument("leader track dimension mismatch");

    Vector lo = psi.domain().upper();
    Vector hi = psi.domain().lower();
    for (int i = 0; i < options.track_samples; ++i) {
      const double t = horizon * i / (options.track_samples - 1);
      track.position(t, y.data());
      if (!psi.domain().contains(y, 1e-12))
        throw SimulationError(t, static_cast<int>(j),
                              "leader left the kernel domain");
      lo = lo.cwiseMin(y);
      hi = hi.cwiseMax(y);
    }
    if (options.full_domain) {
      lo = psi.domain().lower();
      hi = psi.domain().upper();
    }

    // Tensor scan of the visited box; degenerate axes collapse to one point.
    std::vector<int> counts(d);
    long combos = 1;
    for (int a = 0; a < d; ++a) {
      counts[a] = hi[a] > lo[a] ? options.samples_per_axis : 1;
      combos *= counts[a];
    }
    double best = -kInf;
    Vector point(d);
    for (long c = 0; c < combos; ++c) {
      long rest = c;
      for (int a = 0; a < d; ++a) {
        const int idx = static_cast<int>(rest % counts[a]);
        rest /= counts[a];
        point[a] = counts[a] == 1
                       ? lo[a]
                       : lo[a] + (hi[a] - lo[a]) * idx / (counts[a] - 1);
      }
      best = std::max(best, rate_at(point));
    }
    tau += best;
  }
  return tau;
}

double bound_leader(const LeaderModel& model,
                    const std::vector<LeaderTrack>& tracks, double eps_total,
                    double dm0, double t, int n_leaders,
                    const LeaderBoundOptions& options) {
  if (n_leaders <= 0)
    throw std::invalid_argument("leader count must be positive");
  const double tau = leader_rate(model, tracks, t, options);
  return growth_bound(tau, n_leaders * eps_total, dm0, t);
}

}  // namespace momentkit
