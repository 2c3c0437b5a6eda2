#include "momentkit/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "momentkit/csv.hpp"
#include "momentkit/ensemble.hpp"
#include "momentkit/log_norm.hpp"
#include "momentkit/model_io.hpp"
#include "momentkit/moment_flow.hpp"
#include "momentkit/reconstruction.hpp"
#include "momentkit/types.hpp"

namespace momentkit {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> order = {
      "simulate", "moments", "fit",        "flow",
      "bound",    "reconstruct", "massbounds"};
  return order;
}

const std::map<std::string, std::vector<std::string>>& stage_deps() {
  static const std::map<std::string, std::vector<std::string>> deps = {
      {"simulate", {}},
      {"moments", {"simulate"}},
      {"fit", {}},
      {"flow", {"moments", "fit"}},
      {"bound", {"moments", "fit", "flow"}},
      {"reconstruct", {"moments", "flow"}},
      {"massbounds", {"moments"}}};
  return deps;
}

std::string hash_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(h));
  return buffer;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// File tag for a time stamp: t1.5 -> "t1p5".
std::string time_tag(double t) {
  std::string text = "t" + format_double(t);
  std::replace(text.begin(), text.end(), '.', 'p');
  std::replace(text.begin(), text.end(), '-', 'm');
  return text;
}

long nearest_index(const Vector& times, double t) {
  long best = 0;
  double gap = std::abs(times[0] - t);
  for (long p = 1; p < times.size(); ++p) {
    const double d = std::abs(times[p] - t);
    if (d < gap) {
      gap = d;
      best = p;
    }
  }
  return best;
}

// Linear interpolation of a dense trajectory onto arbitrary query times
// (clamped at the ends).
Matrix interpolate_track(const MomentTrajectory& track, const Vector& query) {
  Matrix out(query.size(), track.values.cols());
  for (long p = 0; p < query.size(); ++p) {
    const double t = query[p];
    if (t <= track.times[0]) {
      out.row(p) = track.values.row(0);
      continue;
    }
    const long last = track.times.size() - 1;
    if (t >= track.times[last]) {
      out.row(p) = track.values.row(last);
      continue;
    }
    long hi = 1;
    {
      long lo = 0, up = last;
      while (lo + 1 < up) {
        const long mid = (lo + up) / 2;
        if (track.times[mid] <= t)
          lo = mid;
        else
          up = mid;
      }
      hi = up;
    }
    const double t0 = track.times[hi - 1];
    const double t1 = track.times[hi];
    const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
    out.row(p) = (1.0 - w) * track.values.row(hi - 1) + w * track.values.row(hi);
  }
  return out;
}

std::vector<std::string> moment_header(long m_count) {
  std::vector<std::string> header;
  header.reserve(m_count + 1);
  header.push_back("t");
  for (long k = 0; k < m_count; ++k)
    header.push_back("m" + std::to_string(k));
  return header;
}

struct RunState {
  const ExperimentConfig& config;
  std::filesystem::path out_dir;

  KernelBasis basis;
  std::optional<KernelBasis> psi;
  DynamicsSpec dynamics;

  std::optional<Trajectory> trajectory;
  std::optional<MomentTrajectory> true_moments;

  std::optional<LinearModel> linear;
  std::optional<QuadraticModel> quadratic;
  std::optional<LeaderModel> leader;
  FitReport linear_report;
  FitReport quadratic_report;
  FitReport leader_report;

  std::optional<MomentTrajectory> reduced_full;  // flow resolution
  Matrix reduced_sampled;                        // at the empirical times

  explicit RunState(const ExperimentConfig& c,
                    const std::filesystem::path& dir)
      : config(c),
        out_dir(dir),
        basis(basis_from_config(c)),
        dynamics(dynamics_from_config(c)) {
    if (!c.dynamics.leader_influence.empty())
      psi = leader_basis_from_config(c);
  }

  std::filesystem::path file(const std::string& suffix) const {
    return out_dir / (config.outputs.prefix + "_" + suffix);
  }

  CellGrid reconstruction_grid() const {
    return config.reconstruction.cells.empty()
               ? default_cell_grid(config.domain)
               : make_cell_grid(config.domain, config.reconstruction.cells);
  }
};

void emit_csv(RunState& state, StageResult& stage, const std::string& suffix,
              const std::vector<std::string>& header, const Matrix& rows) {
  const auto path = state.file(suffix);
  write_csv(path, header, rows);
  stage.outputs.push_back(path.filename().string());
}

void emit_json(RunState& state, StageResult& stage, const std::string& suffix,
               const json& j) {
  const auto path = state.file(suffix);
  write_json_file(path, j);
  stage.outputs.push_back(path.filename().string());
}

void stage_simulate(RunState& state, StageResult& stage) {
  const ExperimentConfig& config = state.config;
  AgentEnsemble ensemble =
      sample_uniform_box(config.n_agents, config.initial, config.seed);
  ensemble.domain = config.domain;
  state.trajectory = simulate(ensemble, state.dynamics, config.horizon,
                              config.step, config.outputs.decimation);

  const Trajectory& traj = *state.trajectory;
  const int dim = config.domain.dim();
  const long stored = traj.times.size();
  const long n = config.n_agents;

  std::vector<std::string> header = {"t", "agent_id"};
  for (int a = 0; a < dim; ++a)
    header.push_back("x" + std::to_string(a + 1));
  Matrix rows(stored * n, 2 + dim);
  for (long p = 0; p < stored; ++p)
    for (long i = 0; i < n; ++i) {
      const long r = p * n + i;
      rows(r, 0) = traj.times[p];
      rows(r, 1) = static_cast<double>(i);
      for (int a = 0; a < dim; ++a)
        rows(r, 2 + a) = traj.snapshots[p](i, a);
    }
  emit_csv(state, stage, "states.csv", header, rows);

  if (!state.dynamics.leaders.empty()) {
    const long n_leaders = static_cast<long>(state.dynamics.leaders.size());
    std::vector<std::string> lheader = {"t", "leader_id"};
    for (int a = 0; a < dim; ++a)
      lheader.push_back("x" + std::to_string(a + 1));
    Matrix lrows(stored * n_leaders, 2 + dim);
    double position[2] = {0.0, 0.0};
    for (long p = 0; p < stored; ++p)
      for (long j = 0; j < n_leaders; ++j) {
        state.dynamics.leaders[j].position(traj.times[p], position);
        const long r = p * n_leaders + j;
        lrows(r, 0) = traj.times[p];
        lrows(r, 1) = static_cast<double>(j);
        for (int a = 0; a < dim; ++a) lrows(r, 2 + a) = position[a];
      }
    emit_csv(state, stage, "leaders.csv", lheader, lrows);
  }
}

void stage_moments(RunState& state, StageResult& stage) {
  const Trajectory& traj = *state.trajectory;
  Matrix values = empirical_moment_track(traj, state.basis);
  state.true_moments = MomentTrajectory{traj.times, values};

  Matrix rows(values.rows(), values.cols() + 1);
  rows.col(0) = traj.times;
  rows.rightCols(values.cols()) = values;
  emit_csv(state, stage, "moments_true.csv", moment_header(values.cols()),
           rows);
}

void stage_fit(RunState& state, StageResult& stage) {
  const ExperimentConfig& config = state.config;
  const QuadratureGrid grid =
      config.fit.grid > 0 ? make_quadrature(config.domain, config.fit.grid)
                          : default_fit_grid(config.domain, false);

  FitOptions linear_options;
  linear_options.norm = config.fit.norm;
  linear_options.kappa0 = config.fit.kappa0;
  FitOptions pair_options;
  pair_options.norm = config.fit.norm;
  pair_options.kappa = config.fit.kappa;
  if (pair_options.kappa.size() == 1)
    pair_options.kappa.assign(state.basis.size(), pair_options.kappa[0]);

  if (state.dynamics.field) {
    auto [model, report] =
        fit_linear(state.basis, *state.dynamics.field, grid, linear_options);
    state.linear = std::move(model);
    state.linear_report = report;
    stage.converged = stage.converged && report.converged;
    emit_json(state, stage, "model_linear.json",
              model_to_json(*state.linear, config.basis, report));
  }
  if (state.dynamics.interaction || state.dynamics.leader_influence) {
    const QuadratureGrid pair_grid =
        config.fit.pair_grid > 0
            ? make_quadrature(config.domain, config.fit.pair_grid)
            : default_fit_grid(config.domain, true);
    if (state.dynamics.interaction) {
      auto [model, report] = fit_quadratic(
          state.basis, *state.dynamics.interaction, pair_grid, pair_options);
      state.quadratic = std::move(model);
      state.quadratic_report = report;
      stage.converged = stage.converged && report.converged;
      emit_json(state, stage, "model_quadratic.json",
                model_to_json(*state.quadratic, config.basis, report));
    }
    if (state.dynamics.leader_influence) {
      auto [model, report] =
          fit_leader(state.basis, *state.psi, *state.dynamics.leader_influence,
                     pair_grid, pair_options);
      state.leader = std::move(model);
      state.leader_report = report;
      stage.converged = stage.converged && report.converged;
      emit_json(state, stage, "model_leader.json",
                model_to_json(*state.leader, config.basis, report));
    }
  }
}

void stage_flow(RunState& state, StageResult& stage) {
  const ExperimentConfig& config = state.config;
  const MomentTrajectory& truth = *state.true_moments;
  const Vector m0 = truth.values.row(0);
  const double h = config.flow_step > 0.0 ? config.flow_step : config.step;

  state.reduced_full = integrate_reduced(
      state.linear ? &*state.linear : nullptr,
      state.quadratic ? &*state.quadratic : nullptr,
      state.leader ? &*state.leader : nullptr, state.dynamics.leaders, m0,
      config.horizon, h);
  state.reduced_sampled = interpolate_track(*state.reduced_full, truth.times);

  Matrix rows(state.reduced_sampled.rows(), state.reduced_sampled.cols() + 1);
  rows.col(0) = truth.times;
  rows.rightCols(state.reduced_sampled.cols()) = state.reduced_sampled;
  emit_csv(state, stage, "moments_reduced.csv",
           moment_header(state.reduced_sampled.cols()), rows);
}

void stage_bound(RunState& state, StageResult& stage) {
  const ExperimentConfig& config = state.config;
  const MomentTrajectory& truth = *state.true_moments;

  double rate = 0.0;
  double eps = 0.0;
  json breakdown;
  if (state.linear) {
    const double nu = log_norm_2(state.linear->a);
    rate += nu;
    eps += state.linear_report.eps_total;
    breakdown["linear"] = {{"log_norm", nu},
                           {"eps", state.linear_report.eps_total}};
  }
  if (state.quadratic) {
    const MomentBox hull = moment_hull(*state.reduced_full, 0.1);
    const double beta = estimate_beta(*state.quadratic, hull);
    rate += beta;
    eps += state.quadratic_report.eps_total;
    breakdown["quadratic"] = {{"beta", beta},
                              {"eps", state.quadratic_report.eps_total}};
  }
  if (state.leader) {
    const double tau =
        leader_rate(*state.leader, state.dynamics.leaders, config.horizon);
    const double n_leaders =
        static_cast<double>(state.dynamics.leaders.size());
    rate += tau;
    eps += n_leaders * state.leader_report.eps_total;
    breakdown["leader"] = {{"tau", tau},
                           {"eps", state.leader_report.eps_total},
                           {"n_leaders", n_leaders}};
  }

  const ErrorBound bound = bound_series(rate, eps, 0.0, truth.times);
  Matrix rows(truth.times.size(), 3);
  for (long p = 0; p < truth.times.size(); ++p) {
    rows(p, 0) = truth.times[p];
    rows(p, 1) =
        (truth.values.row(p) - state.reduced_sampled.row(p)).norm();
    rows(p, 2) = bound.values[p];
  }
  emit_csv(state, stage, "bound.csv", {"t", "delta", "bound"}, rows);

  json summary;
  summary["rate"] = rate;
  summary["eps_total"] = eps;
  summary["dm0"] = 0.0;
  summary["parts"] = breakdown;
  emit_json(state, stage, "bound.json", summary);
}

void stage_reconstruct(RunState& state, StageResult& stage) {
  const ExperimentConfig& config = state.config;
  const MomentTrajectory& truth = *state.true_moments;
  const CellGrid grid = state.reconstruction_grid();
  const int dim = config.domain.dim();

  std::vector<std::string> header;
  for (int a = 0; a < dim; ++a) header.push_back("x" + std::to_string(a + 1));
  header.push_back("density");

  json entries = json::array();
  for (double requested : config.reconstruction.times) {
    const long p = nearest_index(truth.times, requested);
    const double used = truth.times[p];
    const std::string tag = time_tag(used);

    const ReconstructionResult from_true =
        reconstruct_tv(truth.values.row(p), state.basis, grid,
                       config.reconstruction.lambda);
    const ReconstructionResult from_reduced =
        reconstruct_tv(state.reduced_sampled.row(p), state.basis, grid,
                       config.reconstruction.lambda);
    stage.converged =
        stage.converged && from_true.converged && from_reduced.converged;

    Matrix rows(grid.size(), dim + 1);
    rows.leftCols(dim) = grid.centers;
    rows.col(dim) = from_true.measure.density;
    emit_csv(state, stage, "density_true_" + tag + ".csv", header, rows);
    rows.col(dim) = from_reduced.measure.density;
    emit_csv(state, stage, "density_reduced_" + tag + ".csv", header, rows);

    // L1 distance after normalizing both densities to unit mass.
    double l1_diff = 0.0;
    const double mass_true = from_true.measure.mass();
    const double mass_reduced = from_reduced.measure.mass();
    if (mass_true > 0.0 && mass_reduced > 0.0) {
      l1_diff = (from_true.measure.density / mass_true -
                 from_reduced.measure.density / mass_reduced)
                    .cwiseAbs()
                    .sum() *
                grid.cell_volume;
    }

    json entry;
    entry["time_requested"] = requested;
    entry["time_used"] = used;
    entry["true"] = {{"epsilon", from_true.epsilon},
                     {"tv", from_true.tv_value},
                     {"gap", from_true.duality_gap},
                     {"converged", from_true.converged},
                     {"mass", mass_true}};
    entry["reduced"] = {{"epsilon", from_reduced.epsilon},
                        {"tv", from_reduced.tv_value},
                        {"gap", from_reduced.duality_gap},
                        {"converged", from_reduced.converged},
                        {"mass", mass_reduced}};
    if (!from_true.warning.empty()) entry["true"]["warning"] = from_true.warning;
    if (!from_reduced.warning.empty())
      entry["reduced"]["warning"] = from_reduced.warning;
    entry["l1_diff"] = l1_diff;
    entries.push_back(std::move(entry));
  }
  emit_json(state, stage, "reconstruct.json", entries);
}

void stage_massbounds(RunState& state, StageResult& stage) {
  const ExperimentConfig& config = state.config;
  const MassBoundsConfig& mb = *config.mass_bounds;
  const MomentTrajectory& truth = *state.true_moments;
  const long p = nearest_index(truth.times, mb.time);
  const CellGrid grid = state.reconstruction_grid();

  const int dim = config.domain.dim();
  Vector lower(dim), upper(dim);
  for (int a = 0; a < dim; ++a) {
    lower[a] = mb.lower[a];
    upper[a] = mb.upper[a];
  }
  const BoxDomain region(lower, upper);
  const MassBoundResult result =
      mass_bounds(truth.values.row(p), state.basis, grid, region);

  json j;
  j["time_requested"] = mb.time;
  j["time_used"] = truth.times[p];
  j["region"] = {{"lower", mb.lower}, {"upper", mb.upper}};
  j["min_mass"] = result.min_mass;
  j["max_mass"] = result.max_mass;
  j["relaxation"] = result.relaxation;
  emit_json(state, stage, "massbounds.json", j);
}

}  // namespace

std::vector<std::string> known_stages() { return stage_order(); }

RunManifest run_experiment(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir,
                           const std::vector<std::string>& stages) {
  validate_config(config);

  // Which stages the configuration enables at all.
  const bool has_reconstruct = !config.reconstruction.times.empty();
  const bool has_massbounds = config.mass_bounds.has_value();
  auto configured = [&](const std::string& name) {
    if (name == "reconstruct") return has_reconstruct;
    if (name == "massbounds") return has_massbounds;
    return true;
  };

  std::set<std::string> selected;
  if (stages.empty()) {
    for (const std::string& name : stage_order())
      if (configured(name)) selected.insert(name);
  } else {
    std::vector<std::string> frontier;
    for (const std::string& name : stages) {
      if (stage_deps().find(name) == stage_deps().end())
        throw ConfigError("stages", "unknown stage '" + name + "'");
      if (!configured(name))
        throw ConfigError("stages", "stage '" + name +
                                        "' is not enabled by this config");
      frontier.push_back(name);
    }
    while (!frontier.empty()) {
      const std::string name = frontier.back();
      frontier.pop_back();
      if (!selected.insert(name).second) continue;
      for (const std::string& dep : stage_deps().at(name))
        frontier.push_back(dep);
    }
  }

  std::filesystem::create_directories(out_dir);

  RunManifest manifest;
  manifest.config_hash = hash_hex(serialize_config(config));
  manifest.version = kVersion;

  RunState state(config, out_dir);
  std::map<std::string, std::function<void(RunState&, StageResult&)>> bodies =
      {{"simulate", stage_simulate},     {"moments", stage_moments},
       {"fit", stage_fit},               {"flow", stage_flow},
       {"bound", stage_bound},           {"reconstruct", stage_reconstruct},
       {"massbounds", stage_massbounds}};

  std::set<std::string> completed;
  const auto run_start = std::chrono::steady_clock::now();
  for (const std::string& name : stage_order()) {
    StageResult stage;
    stage.name = name;
    if (selected.find(name) == selected.end()) {
      stage.skipped = true;
      stage.note = configured(name) ? "not requested" : "not configured";
      manifest.stages.push_back(std::move(stage));
      continue;
    }
    std::string failed_dep;
    for (const std::string& dep : stage_deps().at(name))
      if (completed.find(dep) == completed.end()) failed_dep = dep;
    if (!failed_dep.empty()) {
      stage.skipped = true;
      stage.note = "upstream failure: " + failed_dep;
      manifest.stages.push_back(std::move(stage));
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      bodies.at(name)(state, stage);
      stage.ok = true;
    } catch (const std::exception& e) {
      stage.ok = false;
      stage.note = e.what();
    }
    stage.ran = true;
    stage.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (stage.ok) completed.insert(name);
    manifest.ok = manifest.ok && stage.ok;
    manifest.converged = manifest.converged && (!stage.ok || stage.converged);
    manifest.stages.push_back(std::move(stage));
  }
  manifest.ok = manifest.ok && [&] {
    for (const StageResult& stage : manifest.stages)
      if (stage.skipped && stage.note.rfind("upstream", 0) == 0) return false;
    return true;
  }();
  manifest.wall_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - run_start)
                              .count();

  write_json_file(out_dir / "manifest.json",
                  json::parse(manifest_to_json(manifest)));
  return manifest;
}

std::string manifest_to_json(const RunManifest& manifest) {
  json j;
  j["config_hash"] = manifest.config_hash;
  j["version"] = manifest.version;
  j["ok"] = manifest.ok;
  j["converged"] = manifest.converged;
  j["wall_seconds"] = manifest.wall_seconds;
  j["stages"] = json::array();
  for (const StageResult& stage : manifest.stages) {
    json s;
    s["name"] = stage.name;
    s["ran"] = stage.ran;
    s["ok"] = stage.ok;
    s["skipped"] = stage.skipped;
    s["note"] = stage.note;
    s["outputs"] = stage.outputs;
    s["wall_seconds"] = stage.wall_seconds;
    s["converged"] = stage.converged;
    j["stages"].push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

}  // namespace momentkit
