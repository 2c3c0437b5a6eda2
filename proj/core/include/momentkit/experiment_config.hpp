#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "momentkit/box_domain.hpp"
#include "momentkit/dynamics.hpp"
#include "momentkit/fit.hpp"
#include "momentkit/kernel_basis.hpp"

namespace momentkit {

// One part of the agent dynamics, either a named catalog entry or a DSL
// expression; exactly one of the two is set on a nonempty spec.
struct FieldSpec {
  std::string catalog;
  std::string expr;

  bool empty() const { return catalog.empty() && expr.empty(); }
  bool operator==(const FieldSpec&) const = default;
};

struct LeaderTrackSpec {
  enum class Kind { Sinusoid, Waypoints };
  Kind kind = Kind::Sinusoid;
  // Sinusoid: straight traverse from -> to over [t0, t1] with a lateral
  // sinusoidal detour of the given amplitude and cycle count.
  std::vector<double> from;
  std::vector<double> to;
  double t0 = 0.0;
  double t1 = 0.0;
  double amplitude = 0.0;
  double cycles = 0.0;
  // Waypoints: piecewise-linear interpolation of points.row(i) at times[i].
  std::vector<double> times;
  std::vector<std::vector<double>> points;

  bool operator==(const LeaderTrackSpec&) const = default;
};

struct DynamicsConfig {
  FieldSpec field;             // per-agent drift f(x)
  FieldSpec interaction;       // mean-field pair term g(x, y)
  FieldSpec leader_influence;  // leader pull eta(x, y)
  std::vector<LeaderTrackSpec> leaders;

  bool operator==(const DynamicsConfig&) const = default;
};

struct FitConfig {
  FitNorm norm = FitNorm::L2;
  std::optional<double> kappa0;  // cap on nu_2[A]; unset = unconstrained
  std::vector<double> kappa;     // per-kernel caps; empty = unconstrained,
                                 // one entry broadcasts, +inf skips an index
  int grid = 0;                  // one-sided fit points per axis; 0 = default
  int pair_grid = 0;             // pair-fit points per axis; 0 = default

  bool operator==(const FitConfig&) const = default;
};

struct ReconstructionConfig {
  double lambda = 1e3;
  std::vector<int> cells;     // per-axis cell counts; empty = default grid
  std::vector<double> times;  // when to reconstruct; empty disables the stage

  bool operator==(const ReconstructionConfig&) const = default;
};

struct MassBoundsConfig {
  std::vector<double> lower;  // corners of the queried subregion
  std::vector<double> upper;
  double time = 0.0;

  bool operator==(const MassBoundsConfig&) const = default;
};

struct OutputConfig {
  std::string prefix = "run";  // artifact file name prefix
  int decimation = 1;          // snapshot stride for stored trajectories

  bool operator==(const OutputConfig&) const = default;
};

// Complete declarative description of one experiment. Structural validation
// lives in validate_config; runtime objects are built by the *_from_config
// helpers below.
struct ExperimentConfig {
  std::string title;
  BoxDomain domain = BoxDomain::interval(-1.0, 1.0);   // approximation region
  BoxDomain initial = BoxDomain::interval(-1.0, 1.0);  // initial-state box
  BasisSpec basis;                                     // moment family phi
  std::optional<BasisSpec> leader_basis;               // psi; defaults to phi
  DynamicsConfig dynamics;
  int n_agents = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;    // T
  double step = 0.0;       // particle integration step
  double flow_step = 0.0;  // reduced-model step; 0 = same as step
  FitConfig fit;
  ReconstructionConfig reconstruction;
  std::optional<MassBoundsConfig> mass_bounds;
  OutputConfig outputs;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates a JSON config document. Syntax errors, unknown keys,
// type mismatches, inconsistent shapes, and unparsable DSL expressions raise
// ConfigError carrying the offending path.
ExperimentConfig parse_config(const std::string& text);

// Canonical JSON rendering with blocks equal to their defaults omitted;
// parse_config(serialize_config(c)) == c for every valid config.
std::string serialize_config(const ExperimentConfig& config);

// Full structural validation; throws ConfigError at the offending path.
void validate_config(const ExperimentConfig& config);

// Desk-scale reduction: multiplies the agent count and any explicit grid
// resolutions by `scale` (with floors keeping the problems well posed); the
// time window, step sizes, and seed stay put so the scenario keeps its
// meaning. Requires 0 < scale <= 1.
ExperimentConfig scaled_config(const ExperimentConfig& config, double scale);

// Runtime objects for a validated config.
KernelBasis basis_from_config(const ExperimentConfig& config);
KernelBasis leader_basis_from_config(const ExperimentConfig& config);
DynamicsSpec dynamics_from_config(const ExperimentConfig& config);
LeaderTrack track_from_spec(const LeaderTrackSpec& spec);

}  // namespace momentkit
