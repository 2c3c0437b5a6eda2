#pragma once

#include <memory>
#include <string>
#include <vector>

#include "momentkit/expression.hpp"
#include "momentkit/types.hpp"

namespace momentkit {

// Per-agent drift f: R^d -> R^d.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual int dim() const = 0;
  virtual void value(const double* x, double* out) const = 0;

  virtual bool has_jacobian() const { return false; }
  // Row-major d x d Jacobian; throws std::invalid_argument when unavailable.
  virtual void jacobian(const double* x, double* jac) const;

  // out.row(i) = f(states.row(i)); default loops over rows.
  virtual void value_batch(const Matrix& states, Matrix& out) const;
};

// Pairwise map g: R^d x R^d -> R^d used for mean-field interactions and
// leader influence.
class PairField {
 public:
  virtual ~PairField() = default;
  virtual int dim() const = 0;
  virtual void value(const double* x, const double* y, double* out) const = 0;

  // out.row(i) = (1/N) sum_j g(x_i, x_j), each inner sum in fixed j order so
  // results do not depend on thread count.
  virtual void mean_field(const Matrix& states, Matrix& out) const;

  // out.row(i) += sum_j g(x_i, sources.row(j)) — no 1/N scaling.
  virtual void accumulate_sources(const Matrix& states, const Matrix& sources,
                                  Matrix& out) const;
};

// Fields defined by parsed expressions; Jacobians come from symbolic
// differentiation of the expression tree.
class ExpressionField : public VectorField {
 public:
  explicit ExpressionField(Expression expr);
  int dim() const override { return expr_.dim(); }
  void value(const double* x, double* out) const override;
  bool has_jacobian() const override { return true; }
  void jacobian(const double* x, double* jac) const override;
  const Expression& expression() const { return expr_; }

 private:
  Expression expr_;
  std::vector<Expression> components_;
  std::vector<Expression> partials_;  // row-major d x d
};

class ExpressionPairField : public PairField {
 public:
  explicit ExpressionPairField(Expression expr);
  int dim() const override { return expr_.dim(); }
  void value(const double* x, const double* y, double* out) const override;
  const Expression& expression() const { return expr_; }

 private:
  Expression expr_;
};

// Named built-in fields. These mirror what the expression DSL can describe
// but with hand-vectorized mean-field loops for large ensembles.
//
//   fields:      "zero", "linear_decay" (f = -x)
//   pair fields: "gaussian_repulsion"  1-D  2 exp(-0.6 (x-y)^2) (x-y)
//                "crowd_repulsion"     2-D  4.8/(r+0.1) exp(-2r/5) (x-y)
//                "crowd_leader_pull"   2-D  (0.09 + 6 exp(-r/50) - 6/(r+0.1)) (y-x)
//   with r = ||x-y||_2 clamped at 1e-12.
std::shared_ptr<const VectorField> make_catalog_field(const std::string& name, int dim);
std::shared_ptr<const PairField> make_catalog_pair_field(const std::string& name, int dim);
std::vector<std::string> catalog_field_names();
std::vector<std::string> catalog_pair_field_names();

// Prescribed leader path y(t), either piecewise-linear waypoints or a
// straight traverse with a sinusoidal lateral detour. Positions clamp to the
// ends outside [t0, t1].
class LeaderTrack {
 public:
  static LeaderTrack waypoints(Vector times, Matrix points);
  static LeaderTrack sinusoid(Vector from, Vector to, double t0, double t1,
                              double amplitude, double cycles);

  int dim() const { return static_cast<int>(points_.cols()); }
  void position(double t, double* out) const;
  Vector position(double t) const;

  enum class Kind { Waypoints, Sinusoid };
  Kind kind() const { return kind_; }
  const Vector& times() const { return times_; }
  const Matrix& points() const { return points_; }
  double amplitude() const { return amplitude_; }
  double cycles() const { return cycles_; }

 private:
  LeaderTrack() = default;
  Kind kind_ = Kind::Waypoints;
  Vector times_;   // waypoint times, or {t0, t1}
  Matrix points_;  // waypoint rows, or rows {from, to}
  double amplitude_ = 0.0;
  double cycles_ = 0.0;
};

// Complete right-hand side of the agent ODE: optional drift, optional
// mean-field interaction, optional leader influence applied to the tracks.
struct DynamicsSpec {
  std::shared_ptr<const VectorField> field;
  std::shared_ptr<const PairField> interaction;
  std::shared_ptr<const PairField> leader_influence;
  std::vector<LeaderTrack> leaders;

  int dim() const;
};

}  // namespace momentkit
