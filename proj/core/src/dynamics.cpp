#include "momentkit/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace momentkit {

namespace {
constexpr double kDistanceClamp = 1e-12;
}

void VectorField::jacobian(const double*, double*) const {
  throw std::invalid_argument("vector field does not supply a Jacobian");
}

void VectorField::value_batch(const Matrix& states, Matrix& out) const {
  const int n = static_cast<int>(states.rows());
  const int d = dim();
  double x[2], fx[2];
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) x[a] = states(i, a);
    value(x, fx);
    for (int a = 0; a < d; ++a) out(i, a) = fx[a];
  }
}

void PairField::mean_field(const Matrix& states, Matrix& out) const {
  const int n = static_cast<int>(states.rows());
  const int d = dim();
  const double inv_n = 1.0 / n;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double xi[2], yj[2], g[2];
    double acc[2] = {0.0, 0.0};
    for (int a = 0; a < d; ++a) xi[a] = states(i, a);
    for (int j = 0; j < n; ++j) {
      for (int a = 0; a < d; ++a) yj[a] = states(j, a);
      value(xi, yj, g);
      for (int a = 0; a < d; ++a) acc[a] += g[a];
    }
    for (int a = 0; a < d; ++a) out(i, a) = acc[a] * inv_n;
  }
}

void PairField::accumulate_sources(const Matrix& states, const Matrix& sources,
                                   Matrix& out) const {
  const int n = static_cast<int>(states.rows());
  const int ns = static_cast<int>(sources.rows());
  const int d = dim();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double xi[2], yj[2], g[2];
    double acc[2] = {0.0, 0.0};
    for (int a = 0; a < d; ++a) xi[a] = states(i, a);
    for (int j = 0; j < ns; ++j) {
      for (int a = 0; a < d; ++a) yj[a] = sources(j, a);
      value(xi, yj, g);
      for (int a = 0; a < d; ++a) acc[a] += g[a];
    }
    for (int a = 0; a < d; ++a) out(i, a) += acc[a];
  }
}

// ---------------------------------------------------------------------------
// Expression-backed fields

ExpressionField::ExpressionField(Expression expr) : expr_(std::move(expr)) {
  if (expr_.uses_y())
    throw std::invalid_argument("per-agent field must not reference y");
  const int d = expr_.dim();
  if (expr_.value_size() != d)
    throw std::invalid_argument("field expression must be " + std::to_string(d) +
                                "-dimensional on a " + std::to_string(d) + "-D domain");
  for (int i = 0; i < d; ++i) components_.push_back(expr_.component(i));
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < d; ++c) partials_.push_back(components_[i].derivative('x', c));
}

void ExpressionField::value(const double* x, double* out) const {
  expr_.eval(x, nullptr, out);
}

void ExpressionField::jacobian(const double* x, double* jac) const {
  const int d = dim();
  for (int i = 0; i < d * d; ++i) jac[i] = partials_[i].eval_scalar(x);
}

ExpressionPairField::ExpressionPairField(Expression expr) : expr_(std::move(expr)) {
  const int d = expr_.dim();
  if (expr_.value_size() != d)
    throw std::invalid_argument("pair field expression must be " + std::to_string(d) +
                                "-dimensional on a " + std::to_string(d) + "-D domain");
}

void ExpressionPairField::value(const double* x, const double* y, double* out) const {
  expr_.eval(x, y, out);
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

class ZeroField final : public VectorField {
 public:
  explicit ZeroField(int d) : d_(d) {}
  int dim() const override { return d_; }
  void value(const double*, double* out) const override {
    for (int a = 0; a < d_; ++a) out[a] = 0.0;
  }
  bool has_jacobian() const override { return true; }
  void jacobian(const double*, double* jac) const override {
    for (int i = 0; i < d_ * d_; ++i) jac[i] = 0.0;
  }
  void value_batch(const Matrix& states, Matrix& out) const override {
    out.setZero(states.rows(), d_);
  }

 private:
  int d_;
};

class LinearDecayField final : public VectorField {
 public:
  explicit LinearDecayField(int d) : d_(d) {}
  int dim() const override { return d_; }
  void value(const double* x, double* out) const override {
    for (int a = 0; a < d_; ++a) out[a] = -x[a];
  }
  bool has_jacobian() const override { return true; }
  void jacobian(const double*, double* jac) const override {
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) jac[i * d_ + j] = i == j ? -1.0 : 0.0;
  }
  void value_batch(const Matrix& states, Matrix& out) const override { out = -states; }

 private:
  int d_;
};

// 1-D short-range repulsion with Gaussian falloff.
class GaussianRepulsion final : public PairField {
 public:
  int dim() const override { return 1; }
  void value(const double* x, const double* y, double* out) const override {
    const double u = x[0] - y[0];
    out[0] = 2.0 * std::exp(-0.6 * u * u) * u;
  }
  void mean_field(const Matrix& states, Matrix& out) const override {
    const int n = static_cast<int>(states.rows());
    const double inv_n = 1.0 / n;
    const auto xs = states.col(0).array();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const auto u = xs(i) - xs;
      out(i, 0) = (2.0 * (-0.6 * u.square()).exp() * u).sum() * inv_n;
    }
  }
};

// 2-D crowd repulsion: hard push at contact decaying exponentially with
// separation r = ||x - y||.
class CrowdRepulsion final : public PairField {
 public:
  int dim() const override { return 2; }
  void value(const double* x, const double* y, double* out) const override {
    const double u0 = x[0] - y[0], u1 = x[1] - y[1];
    double r = std::sqrt(u0 * u0 + u1 * u1);
    if (r < kDistanceClamp) r = kDistanceClamp;
    const double coef = 4.8 / (r + 0.1) * std::exp(-0.4 * r);
    out[0] = coef * u0;
    out[1] = coef * u1;
  }
  void mean_field(const Matrix& states, Matrix& out) const override {
    const int n = static_cast<int>(states.rows());
    const double inv_n = 1.0 / n;
    const auto xs = states.col(0).array();
    const auto ys = states.col(1).array();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const auto u0 = xs(i) - xs;
      const auto u1 = ys(i) - ys;
      const auto r = (u0.square() + u1.square()).sqrt().max(kDistanceClamp);
      const auto coef = 4.8 / (r + 0.1) * (-0.4 * r).exp();
      out(i, 0) = (coef * u0).sum() * inv_n;
      out(i, 1) = (coef * u1).sum() * inv_n;
    }
  }
};

// 2-D leader influence: weak long-range attraction toward y with short-range
// repulsion, vanishing as r grows.
class CrowdLeaderPull final : public PairField {
 public:
  int dim() const override { return 2; }
  void value(const double* x, const double* y, double* out) const override {
    const double u0 = y[0] - x[0], u1 = y[1] - x[1];
    double r = std::sqrt(u0 * u0 + u1 * u1);
    if (r < kDistanceClamp) r = kDistanceClamp;
    const double coef = 0.09 + 6.0 * std::exp(-r / 50.0) - 6.0 / (r + 0.1);
    out[0] = coef * u0;
    out[1] = coef * u1;
  }
  void accumulate_sources(const Matrix& states, const Matrix& sources,
                          Matrix& out) const override {
    const int n = static_cast<int>(states.rows());
    const int ns = static_cast<int>(sources.rows());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double acc0 = 0.0, acc1 = 0.0;
      for (int j = 0; j < ns; ++j) {
        const double u0 = sources(j, 0) - states(i, 0);
        const double u1 = sources(j, 1) - states(i, 1);
        double r = std::sqrt(u0 * u0 + u1 * u1);
        if (r < kDistanceClamp) r = kDistanceClamp;
        const double coef = 0.09 + 6.0 * std::exp(-r / 50.0) - 6.0 / (r + 0.1);
        acc0 += coef * u0;
        acc1 += coef * u1;
      }
      out(i, 0) += acc0;
      out(i, 1) += acc1;
    }
  }
};

}  // namespace

std::shared_ptr<const VectorField> make_catalog_field(const std::string& name, int dim) {
  if (name == "zero") return std::make_shared<ZeroField>(dim);
  if (name == "linear_decay") return std::make_shared<LinearDecayField>(dim);
  throw std::invalid_argument("unknown field '" + name + "'");
}

std::shared_ptr<const PairField> make_catalog_pair_field(const std::string& name, int dim) {
  if (name == "gaussian_repulsion") {
    if (dim != 1) throw std::invalid_argument("gaussian_repulsion is 1-D");
    return std::make_shared<GaussianRepulsion>();
  }
  if (name == "crowd_repulsion") {
    if (dim != 2) throw std::invalid_argument("crowd_repulsion is 2-D");
    return std::make_shared<CrowdRepulsion>();
  }
  if (name == "crowd_leader_pull") {
    if (dim != 2) throw std::invalid_argument("crowd_leader_pull is 2-D");
    return std::make_shared<CrowdLeaderPull>();
  }
  throw std::invalid_argument("unknown pair field '" + name + "'");
}

std::vector<std::string> catalog_field_names() { return {"zero", "linear_decay"}; }

std::vector<std::string> catalog_pair_field_names() {
  return {"gaussian_repulsion", "crowd_repulsion", "crowd_leader_pull"};
}

// ---------------------------------------------------------------------------
// Leader tracks

LeaderTrack LeaderTrack::waypoints(Vector times, Matrix points) {
  if (times.size() < 1 || points.rows() != times.size())
    throw std::invalid_argument("waypoint times and points must match and be nonempty");
  for (int i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("waypoint times must be strictly increasing");
  LeaderTrack track;
  track.kind_ = Kind::Waypoints;
  track.times_ = std::move(times);
  track.points_ = std::move(points);
  return track;
}

LeaderTrack LeaderTrack::sinusoid(Vector from, Vector to, double t0, double t1,
                                  double amplitude, double cycles) {
  if (from.size() != to.size()) throw std::invalid_argument("endpoint dimensions differ");
  if (!(t1 > t0)) throw std::invalid_argument("traverse needs t1 > t0");
  LeaderTrack track;
  track.kind_ = Kind::Sinusoid;
  track.times_ = Vector(2);
  track.times_ << t0, t1;
  track.points_ = Matrix(2, from.size());
  track.points_.row(0) = from.transpose();
  track.points_.row(1) = to.transpose();
  track.amplitude_ = amplitude;
  track.cycles_ = cycles;
  return track;
}

void LeaderTrack::position(double t, double* out) const {
  const int d = dim();
  if (kind_ == Kind::Waypoints) {
    const int n = static_cast<int>(times_.size());
    if (t <= times_[0]) {
      for (int a = 0; a < d; ++a) out[a] = points_(0, a);
      return;
    }
    if (t >= times_[n - 1]) {
      for (int a = 0; a < d; ++a) out[a] = points_(n - 1, a);
      return;
    }
    int hi = 1;
    while (times_[hi] < t) ++hi;
    const double s = (t - times_[hi - 1]) / (times_[hi] - times_[hi - 1]);
    for (int a = 0; a < d; ++a)
      out[a] = (1.0 - s) * points_(hi - 1, a) + s * points_(hi, a);
    return;
  }

  double s = (t - times_[0]) / (times_[1] - times_[0]);
  s = std::min(1.0, std::max(0.0, s));
  for (int a = 0; a < d; ++a)
    out[a] = (1.0 - s) * points_(0, a) + s * points_(1, a);
  if (d == 2 && amplitude_ != 0.0) {
    // Lateral detour along the unit normal of the traverse direction.
    const double dx = points_(1, 0) - points_(0, 0);
    const double dy = points_(1, 1) - points_(0, 1);
    const double len = std::hypot(dx, dy);
    if (len > 0.0) {
      const double off = amplitude_ * std::sin(2.0 * M_PI * cycles_ * s);
      out[0] += off * (-dy / len);
      out[1] += off * (dx / len);
    }
  }
}

Vector LeaderTrack::position(double t) const {
  Vector out(dim());
  position(t, out.data());
  return out;
}

int DynamicsSpec::dim() const {
  if (field) return field->dim();
  if (interaction) return interaction->dim();
  if (leader_influence) return leader_influence->dim();
  throw std::logic_error("empty dynamics");
}

}  // namespace momentkit
