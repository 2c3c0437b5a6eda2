#include "momentkit/experiment_config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "momentkit/expression.hpp"
#include "momentkit/model_io.hpp"
#include "momentkit/types.hpp"

namespace momentkit {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path, what);
}

std::string sub(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) fail(sub(path, it.key()), "unknown key");
  }
}

// Missing keys and explicit nulls both mean "use the default".
const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

const json& require(const json& j, const char* key, const std::string& path) {
  const json* value = find(j, key);
  if (value == nullptr) fail(sub(path, key), "missing field");
  return *value;
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number())
    fail(path, std::string("expected a number, got ") + j.type_name());
  return j.get<double>();
}

double as_finite(const json& j, const std::string& path) {
  const double v = as_double(j, path);
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer())
    fail(path, std::string("expected an integer, got ") + j.type_name());
  const auto wide = j.get<std::int64_t>();
  if (wide < std::numeric_limits<int>::min() ||
      wide > std::numeric_limits<int>::max())
    fail(path, "integer out of range");
  return static_cast<int>(wide);
}

std::uint64_t as_uint64(const json& j, const std::string& path) {
  if (!j.is_number_integer())
    fail(path, std::string("expected an integer, got ") + j.type_name());
  if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)
    fail(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean())
    fail(path, std::string("expected a boolean, got ") + j.type_name());
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string())
    fail(path, std::string("expected a string, got ") + j.type_name());
  return j.get<std::string>();
}

std::vector<double> as_double_array(const json& j, const std::string& path) {
  if (!j.is_array())
    fail(path, std::string("expected an array, got ") + j.type_name());
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_finite(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> as_int_array(const json& j, const std::string& path) {
  if (!j.is_array())
    fail(path, std::string("expected an array, got ") + j.type_name());
  std::vector<int> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<long>(v.size()));
}

BoxDomain parse_box(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  reject_unknown(j, path, {"lower", "upper"});
  const auto lower = as_double_array(require(j, "lower", path), sub(path, "lower"));
  const auto upper = as_double_array(require(j, "upper", path), sub(path, "upper"));
  if (lower.size() != upper.size())
    fail(path, "lower and upper must have the same length");
  try {
    return BoxDomain(to_vector(lower), to_vector(upper));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

json box_to_json(const BoxDomain& box) {
  json j;
  j["lower"] = json::array();
  j["upper"] = json::array();
  for (int a = 0; a < box.dim(); ++a) {
    j["lower"].push_back(box.lower(a));
    j["upper"].push_back(box.upper(a));
  }
  return j;
}

BasisSpec parse_basis(const json& j, const std::string& path,
                      const BoxDomain& domain) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  BasisSpec spec;
  spec.domain = domain;
  spec.kind = basis_kind_from_name(
      as_string(require(j, "kind", path), sub(path, "kind")), sub(path, "kind"));
  if (spec.kind == BasisKind::GaussianMonomial) {
    reject_unknown(j, path,
                   {"kind", "centers", "sigma", "orders", "constant_kernel"});
    spec.centers =
        as_double_array(require(j, "centers", path), sub(path, "centers"));
    spec.sigma = as_finite(require(j, "sigma", path), sub(path, "sigma"));
    if (const json* orders = find(j, "orders"))
      spec.orders = as_int_array(*orders, sub(path, "orders"));
    if (const json* constant = find(j, "constant_kernel"))
      spec.constant_kernel = as_bool(*constant, sub(path, "constant_kernel"));
  } else {
    reject_unknown(j, path, {"kind", "degree"});
    spec.degree = as_int(require(j, "degree", path), sub(path, "degree"));
  }
  return spec;
}

json basis_to_json(const BasisSpec& spec) {
  json j;
  j["kind"] = basis_kind_name(spec.kind);
  if (spec.kind == BasisKind::GaussianMonomial) {
    j["centers"] = spec.centers;
    j["sigma"] = spec.sigma;
    j["orders"] = spec.orders;
    j["constant_kernel"] = spec.constant_kernel;
  } else {
    j["degree"] = spec.degree;
  }
  return j;
}

FieldSpec parse_field(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  reject_unknown(j, path, {"catalog", "expr"});
  FieldSpec spec;
  if (const json* catalog = find(j, "catalog"))
    spec.catalog = as_string(*catalog, sub(path, "catalog"));
  if (const json* expr = find(j, "expr"))
    spec.expr = as_string(*expr, sub(path, "expr"));
  if (spec.catalog.empty() == spec.expr.empty())
    fail(path, "exactly one of 'catalog' and 'expr' is required");
  return spec;
}

json field_to_json(const FieldSpec& spec) {
  json j;
  if (!spec.catalog.empty())
    j["catalog"] = spec.catalog;
  else
    j["expr"] = spec.expr;
  return j;
}

LeaderTrackSpec parse_track(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  LeaderTrackSpec spec;
  const std::string kind =
      as_string(require(j, "kind", path), sub(path, "kind"));
  if (kind == "sinusoid") {
    spec.kind = LeaderTrackSpec::Kind::Sinusoid;
    reject_unknown(j, path,
                   {"kind", "from", "to", "t0", "t1", "amplitude", "cycles"});
    spec.from = as_double_array(require(j, "from", path), sub(path, "from"));
    spec.to = as_double_array(require(j, "to", path), sub(path, "to"));
    if (const json* t0 = find(j, "t0")) spec.t0 = as_finite(*t0, sub(path, "t0"));
    spec.t1 = as_finite(require(j, "t1", path), sub(path, "t1"));
    if (const json* amp = find(j, "amplitude"))
      spec.amplitude = as_finite(*amp, sub(path, "amplitude"));
    if (const json* cycles = find(j, "cycles"))
      spec.cycles = as_finite(*cycles, sub(path, "cycles"));
  } else if (kind == "waypoints") {
    spec.kind = LeaderTrackSpec::Kind::Waypoints;
    reject_unknown(j, path, {"kind", "times", "points"});
    spec.times = as_double_array(require(j, "times", path), sub(path, "times"));
    const json& points = require(j, "points", path);
    if (!points.is_array())
      fail(sub(path, "points"), "expected an array of points");
    for (std::size_t i = 0; i < points.size(); ++i)
      spec.points.push_back(as_double_array(
          points[i], sub(path, "points") + "[" + std::to_string(i) + "]"));
  } else {
    fail(sub(path, "kind"), "expected 'sinusoid' or 'waypoints', got '" + kind + "'");
  }
  return spec;
}

json track_to_json(const LeaderTrackSpec& spec) {
  json j;
  if (spec.kind == LeaderTrackSpec::Kind::Sinusoid) {
    j["kind"] = "sinusoid";
    j["from"] = spec.from;
    j["to"] = spec.to;
    j["t0"] = spec.t0;
    j["t1"] = spec.t1;
    j["amplitude"] = spec.amplitude;
    j["cycles"] = spec.cycles;
  } else {
    j["kind"] = "waypoints";
    j["times"] = spec.times;
    j["points"] = spec.points;
  }
  return j;
}

DynamicsConfig parse_dynamics(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  reject_unknown(j, path,
                 {"field", "interaction", "leader_influence", "leaders"});
  DynamicsConfig dyn;
  if (const json* field = find(j, "field"))
    dyn.field = parse_field(*field, sub(path, "field"));
  if (const json* interaction = find(j, "interaction"))
    dyn.interaction = parse_field(*interaction, sub(path, "interaction"));
  if (const json* leader = find(j, "leader_influence"))
    dyn.leader_influence = parse_field(*leader, sub(path, "leader_influence"));
  if (const json* leaders = find(j, "leaders")) {
    if (!leaders->is_array())
      fail(sub(path, "leaders"), "expected an array of tracks");
    for (std::size_t i = 0; i < leaders->size(); ++i)
      dyn.leaders.push_back(parse_track(
          (*leaders)[i], sub(path, "leaders") + "[" + std::to_string(i) + "]"));
  }
  return dyn;
}

json dynamics_to_json(const DynamicsConfig& dyn) {
  json j = json::object();
  if (!dyn.field.empty()) j["field"] = field_to_json(dyn.field);
  if (!dyn.interaction.empty())
    j["interaction"] = field_to_json(dyn.interaction);
  if (!dyn.leader_influence.empty())
    j["leader_influence"] = field_to_json(dyn.leader_influence);
  if (!dyn.leaders.empty()) {
    json tracks = json::array();
    for (const LeaderTrackSpec& track : dyn.leaders)
      tracks.push_back(track_to_json(track));
    j["leaders"] = std::move(tracks);
  }
  return j;
}

FitConfig parse_fit(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  reject_unknown(j, path, {"norm", "kappa0", "kappa", "grid", "pair_grid"});
  FitConfig fit;
  if (const json* norm = find(j, "norm")) {
    const std::string name = as_string(*norm, sub(path, "norm"));
    if (name == "l2")
      fit.norm = FitNorm::L2;
    else if (name == "linf")
      fit.norm = FitNorm::Linf;
    else
      fail(sub(path, "norm"), "expected 'l2' or 'linf', got '" + name + "'");
  }
  if (const json* kappa0 = find(j, "kappa0"))
    fit.kappa0 = as_finite(*kappa0, sub(path, "kappa0"));
  if (const json* kappa = find(j, "kappa")) {
    const std::string kappa_path = sub(path, "kappa");
    if (kappa->is_number()) {
      fit.kappa = {as_double(*kappa, kappa_path)};
    } else if (kappa->is_array()) {
      for (std::size_t i = 0; i < kappa->size(); ++i) {
        const json& cell = (*kappa)[i];
        // null entries leave that kernel unconstrained
        fit.kappa.push_back(
            cell.is_null()
                ? kInf
                : as_double(cell, kappa_path + "[" + std::to_string(i) + "]"));
      }
    } else {
      fail(kappa_path, "expected a number or an array");
    }
  }
  if (const json* grid = find(j, "grid"))
    fit.grid = as_int(*grid, sub(path, "grid"));
  if (const json* pair_grid = find(j, "pair_grid"))
    fit.pair_grid = as_int(*pair_grid, sub(path, "pair_grid"));
  return fit;
}

json fit_to_json(const FitConfig& fit) {
  json j;
  j["norm"] = fit.norm == FitNorm::L2 ? "l2" : "linf";
  if (fit.kappa0) j["kappa0"] = *fit.kappa0;
  if (!fit.kappa.empty()) {
    json kappa = json::array();
    for (double value : fit.kappa) {
      if (std::isinf(value))
        kappa.push_back(nullptr);
      else
        kappa.push_back(value);
    }
    j["kappa"] = std::move(kappa);
  }
  if (fit.grid != 0) j["grid"] = fit.grid;
  if (fit.pair_grid != 0) j["pair_grid"] = fit.pair_grid;
  return j;
}

ReconstructionConfig parse_reconstruction(const json& j,
                                          const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  reject_unknown(j, path, {"lambda", "cells", "times"});
  ReconstructionConfig reco;
  if (const json* lambda = find(j, "lambda"))
    reco.lambda = as_finite(*lambda, sub(path, "lambda"));
  if (const json* cells = find(j, "cells")) {
    if (cells->is_number_integer())
      reco.cells = {as_int(*cells, sub(path, "cells"))};
    else
      reco.cells = as_int_array(*cells, sub(path, "cells"));
  }
  if (const json* times = find(j, "times"))
    reco.times = as_double_array(*times, sub(path, "times"));
  return reco;
}

json reconstruction_to_json(const ReconstructionConfig& reco) {
  json j;
  j["lambda"] = reco.lambda;
  if (!reco.cells.empty()) j["cells"] = reco.cells;
  if (!reco.times.empty()) j["times"] = reco.times;
  return j;
}

MassBoundsConfig parse_mass_bounds(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  reject_unknown(j, path, {"lower", "upper", "time"});
  MassBoundsConfig mb;
  mb.lower = as_double_array(require(j, "lower", path), sub(path, "lower"));
  mb.upper = as_double_array(require(j, "upper", path), sub(path, "upper"));
  mb.time = as_finite(require(j, "time", path), sub(path, "time"));
  return mb;
}

json mass_bounds_to_json(const MassBoundsConfig& mb) {
  json j;
  j["lower"] = mb.lower;
  j["upper"] = mb.upper;
  j["time"] = mb.time;
  return j;
}

OutputConfig parse_outputs(const json& j, const std::string& path) {
  if (!j.is_object())
    fail(path, std::string("expected an object, got ") + j.type_name());
  reject_unknown(j, path, {"prefix", "decimation"});
  OutputConfig out;
  if (const json* prefix = find(j, "prefix"))
    out.prefix = as_string(*prefix, sub(path, "prefix"));
  if (const json* decimation = find(j, "decimation"))
    out.decimation = as_int(*decimation, sub(path, "decimation"));
  return out;
}

json outputs_to_json(const OutputConfig& out) {
  json j;
  j["prefix"] = out.prefix;
  j["decimation"] = out.decimation;
  return j;
}

void validate_field_spec(const FieldSpec& spec, const std::string& path,
                         int dim, bool pair) {
  if (spec.empty()) return;
  if (!spec.catalog.empty()) {
    try {
      if (pair)
        make_catalog_pair_field(spec.catalog, dim);
      else
        make_catalog_field(spec.catalog, dim);
    } catch (const std::invalid_argument& e) {
      fail(sub(path, "catalog"), e.what());
    }
    return;
  }
  Expression expr;
  try {
    expr = Expression::parse(spec.expr, dim);
  } catch (const ParseError& e) {
    fail(sub(path, "expr"), e.what());
  }
  if (expr.value_size() != dim)
    fail(sub(path, "expr"), "expression must produce " + std::to_string(dim) +
                                " component(s), produces " +
                                std::to_string(expr.value_size()));
  if (!pair && expr.uses_y())
    fail(sub(path, "expr"), "drift must not reference y");
}

void validate_track(const LeaderTrackSpec& spec, const std::string& path,
                    int dim) {
  if (spec.kind == LeaderTrackSpec::Kind::Sinusoid) {
    if (static_cast<int>(spec.from.size()) != dim)
      fail(sub(path, "from"), "expected " + std::to_string(dim) + " entries");
    if (static_cast<int>(spec.to.size()) != dim)
      fail(sub(path, "to"), "expected " + std::to_string(dim) + " entries");
    if (!(spec.t1 > spec.t0)) fail(path, "t1 must exceed t0");
  } else {
    if (spec.times.empty()) fail(sub(path, "times"), "expected waypoint times");
    for (std::size_t i = 1; i < spec.times.size(); ++i)
      if (!(spec.times[i] > spec.times[i - 1]))
        fail(sub(path, "times"), "times must be strictly increasing");
    if (spec.points.size() != spec.times.size())
      fail(sub(path, "points"), "expected one point per time");
    for (std::size_t i = 0; i < spec.points.size(); ++i)
      if (static_cast<int>(spec.points[i].size()) != dim)
        fail(sub(path, "points") + "[" + std::to_string(i) + "]",
             "expected " + std::to_string(dim) + " entries");
  }
  try {
    track_from_spec(spec);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", e.what());
  }
  if (!j.is_object())
    throw ConfigError("$", std::string("expected a JSON object, got ") +
                               j.type_name());
  reject_unknown(j, "",
                 {"title", "domain", "initial", "basis", "leader_basis",
                  "dynamics", "n_agents", "n_leaders", "seed", "horizon",
                  "step", "flow_step", "fit", "reconstruction", "mass_bounds",
                  "outputs"});

  ExperimentConfig config;
  if (const json* title = find(j, "title"))
    config.title = as_string(*title, "title");
  config.domain = parse_box(require(j, "domain", ""), "domain");
  config.initial = config.domain;
  if (const json* initial = find(j, "initial"))
    config.initial = parse_box(*initial, "initial");
  config.basis =
      parse_basis(require(j, "basis", ""), "basis", config.domain);
  if (const json* psi = find(j, "leader_basis"))
    config.leader_basis = parse_basis(*psi, "leader_basis", config.domain);
  config.dynamics = parse_dynamics(require(j, "dynamics", ""), "dynamics");
  config.n_agents = as_int(require(j, "n_agents", ""), "n_agents");
  if (const json* n_leaders = find(j, "n_leaders")) {
    const int declared = as_int(*n_leaders, "n_leaders");
    if (declared != static_cast<int>(config.dynamics.leaders.size()))
      fail("n_leaders", "does not match dynamics.leaders (" +
                            std::to_string(config.dynamics.leaders.size()) +
                            " tracks)");
  }
  if (const json* seed = find(j, "seed"))
    config.seed = as_uint64(*seed, "seed");
  config.horizon = as_finite(require(j, "horizon", ""), "horizon");
  config.step = as_finite(require(j, "step", ""), "step");
  if (const json* flow_step = find(j, "flow_step"))
    config.flow_step = as_finite(*flow_step, "flow_step");
  if (const json* fit = find(j, "fit")) config.fit = parse_fit(*fit, "fit");
  if (const json* reco = find(j, "reconstruction"))
    config.reconstruction = parse_reconstruction(*reco, "reconstruction");
  if (const json* mb = find(j, "mass_bounds"))
    config.mass_bounds = parse_mass_bounds(*mb, "mass_bounds");
  if (const json* outputs = find(j, "outputs"))
    config.outputs = parse_outputs(*outputs, "outputs");

  validate_config(config);
  return config;
}

std::string serialize_config(const ExperimentConfig& config) {
  json j;
  if (!config.title.empty()) j["title"] = config.title;
  j["domain"] = box_to_json(config.domain);
  if (!(config.initial == config.domain))
    j["initial"] = box_to_json(config.initial);
  j["basis"] = basis_to_json(config.basis);
  if (config.leader_basis)
    j["leader_basis"] = basis_to_json(*config.leader_basis);
  j["dynamics"] = dynamics_to_json(config.dynamics);
  j["n_agents"] = config.n_agents;
  j["seed"] = config.seed;
  j["horizon"] = config.horizon;
  j["step"] = config.step;
  if (config.flow_step != 0.0) j["flow_step"] = config.flow_step;
  if (!(config.fit == FitConfig{})) j["fit"] = fit_to_json(config.fit);
  if (!(config.reconstruction == ReconstructionConfig{}))
    j["reconstruction"] = reconstruction_to_json(config.reconstruction);
  if (config.mass_bounds)
    j["mass_bounds"] = mass_bounds_to_json(*config.mass_bounds);
  if (!(config.outputs == OutputConfig{}))
    j["outputs"] = outputs_to_json(config.outputs);
  return j.dump(2) + "\n";
}

void validate_config(const ExperimentConfig& config) {
  const int dim = config.domain.dim();
  if (dim < 1 || dim > 2) fail("domain", "dimension must be 1 or 2");
  if (config.initial.dim() != dim)
    fail("initial", "dimension does not match the domain");
  for (int a = 0; a < dim; ++a)
    if (config.initial.lower(a) < config.domain.lower(a) ||
        config.initial.upper(a) > config.domain.upper(a))
      fail("initial", "must lie inside the domain");

  if (!(config.basis.domain == config.domain))
    fail("basis", "family domain must equal the experiment domain");
  int basis_size = 0;
  try {
    basis_size = make_basis(config.basis).size();
  } catch (const std::invalid_argument& e) {
    fail("basis", e.what());
  }
  if (config.leader_basis) {
    if (!(config.leader_basis->domain == config.domain))
      fail("leader_basis", "family domain must equal the experiment domain");
    try {
      make_basis(*config.leader_basis);
    } catch (const std::invalid_argument& e) {
      fail("leader_basis", e.what());
    }
  }

  const DynamicsConfig& dyn = config.dynamics;
  if (dyn.field.empty() && dyn.interaction.empty() &&
      dyn.leader_influence.empty())
    fail("dynamics",
         "at least one of field, interaction, leader_influence is required");
  validate_field_spec(dyn.field, "dynamics.field", dim, false);
  validate_field_spec(dyn.interaction, "dynamics.interaction", dim, true);
  validate_field_spec(dyn.leader_influence, "dynamics.leader_influence", dim,
                      true);
  if (dyn.leader_influence.empty() != dyn.leaders.empty())
    fail("dynamics", "leader_influence and leaders must be given together");
  for (std::size_t i = 0; i < dyn.leaders.size(); ++i)
    validate_track(dyn.leaders[i],
                   "dynamics.leaders[" + std::to_string(i) + "]", dim);

  if (config.n_agents < 1) fail("n_agents", "must be at least 1");
  if (!(config.horizon > 0.0) || !std::isfinite(config.horizon))
    fail("horizon", "must be positive");
  if (!(config.step > 0.0) || !std::isfinite(config.step))
    fail("step", "must be positive");
  if (config.flow_step < 0.0 || !std::isfinite(config.flow_step))
    fail("flow_step", "must be nonnegative");

  const FitConfig& fit = config.fit;
  if (fit.kappa0 && !std::isfinite(*fit.kappa0))
    fail("fit.kappa0", "must be finite");
  const std::size_t nk = fit.kappa.size();
  if (nk != 0 && nk != 1 && nk != static_cast<std::size_t>(basis_size))
    fail("fit.kappa", "expected 0, 1, or " + std::to_string(basis_size) +
                          " entries, got " + std::to_string(nk));
  for (std::size_t i = 0; i < nk; ++i)
    if (std::isnan(fit.kappa[i]) || fit.kappa[i] == -kInf)
      fail("fit.kappa[" + std::to_string(i) + "]",
           "entries must be finite or +inf");
  if (fit.grid != 0 && fit.grid < 2) fail("fit.grid", "must be 0 or >= 2");
  if (fit.pair_grid != 0 && fit.pair_grid < 2)
    fail("fit.pair_grid", "must be 0 or >= 2");

  const ReconstructionConfig& reco = config.reconstruction;
  if (!(reco.lambda > 0.0) || !std::isfinite(reco.lambda))
    fail("reconstruction.lambda", "must be positive");
  if (!reco.cells.empty()) {
    if (static_cast<int>(reco.cells.size()) != dim)
      fail("reconstruction.cells",
           "expected " + std::to_string(dim) + " per-axis counts");
    for (std::size_t i = 0; i < reco.cells.size(); ++i)
      if (reco.cells[i] < 2)
        fail("reconstruction.cells[" + std::to_string(i) + "]",
             "must be at least 2");
  }
  for (std::size_t i = 0; i < reco.times.size(); ++i)
    if (!(reco.times[i] >= 0.0) || !(reco.times[i] <= config.horizon))
      fail("reconstruction.times[" + std::to_string(i) + "]",
           "must lie in [0, horizon]");

  if (config.mass_bounds) {
    const MassBoundsConfig& mb = *config.mass_bounds;
    if (static_cast<int>(mb.lower.size()) != dim ||
        static_cast<int>(mb.upper.size()) != dim)
      fail("mass_bounds", "region corners must have " + std::to_string(dim) +
                              " entries");
    for (int a = 0; a < dim; ++a)
      if (!(mb.lower[a] < mb.upper[a]))
        fail("mass_bounds", "region has lower >= upper");
    if (!(mb.time >= 0.0) || !(mb.time <= config.horizon))
      fail("mass_bounds.time", "must lie in [0, horizon]");
  }

  if (config.outputs.prefix.empty())
    fail("outputs.prefix", "must be nonempty");
  for (char c : config.outputs.prefix)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      fail("outputs.prefix", "only letters, digits, '_' and '-' are allowed");
  if (config.outputs.decimation < 1)
    fail("outputs.decimation", "must be at least 1");
}

ExperimentConfig scaled_config(const ExperimentConfig& config, double scale) {
  if (!(scale > 0.0) || scale > 1.0)
    throw std::invalid_argument("scale must lie in (0, 1]");
  ExperimentConfig out = config;
  out.n_agents = static_cast<int>(
      std::max<long>(8, std::lround(config.n_agents * scale)));
  if (out.fit.grid > 0)
    out.fit.grid = static_cast<int>(
        std::max<long>(9, std::lround(config.fit.grid * scale)));
  if (out.fit.pair_grid > 0)
    out.fit.pair_grid = static_cast<int>(
        std::max<long>(9, std::lround(config.fit.pair_grid * scale)));
  for (int& cells : out.reconstruction.cells)
    cells = static_cast<int>(std::max<long>(40, std::lround(cells * scale)));
  return out;
}

KernelBasis basis_from_config(const ExperimentConfig& config) {
  return make_basis(config.basis);
}

KernelBasis leader_basis_from_config(const ExperimentConfig& config) {
  return make_basis(config.leader_basis ? *config.leader_basis : config.basis);
}

DynamicsSpec dynamics_from_config(const ExperimentConfig& config) {
  const int dim = config.domain.dim();
  DynamicsSpec dyn;
  const DynamicsConfig& spec = config.dynamics;
  if (!spec.field.empty()) {
    dyn.field = !spec.field.catalog.empty()
                    ? make_catalog_field(spec.field.catalog, dim)
                    : std::make_shared<ExpressionField>(
                          Expression::parse(spec.field.expr, dim));
  }
  if (!spec.interaction.empty()) {
    dyn.interaction =
        !spec.interaction.catalog.empty()
            ? make_catalog_pair_field(spec.interaction.catalog, dim)
            : std::make_shared<ExpressionPairField>(
                  Expression::parse(spec.interaction.expr, dim));
  }
  if (!spec.leader_influence.empty()) {
    dyn.leader_influence =
        !spec.leader_influence.catalog.empty()
            ? make_catalog_pair_field(spec.leader_influence.catalog, dim)
            : std::make_shared<ExpressionPairField>(
                  Expression::parse(spec.leader_influence.expr, dim));
  }
  for (const LeaderTrackSpec& track : spec.leaders)
    dyn.leaders.push_back(track_from_spec(track));
  return dyn;
}

LeaderTrack track_from_spec(const LeaderTrackSpec& spec) {
  if (spec.kind == LeaderTrackSpec::Kind::Sinusoid)
    return LeaderTrack::sinusoid(to_vector(spec.from), to_vector(spec.to),
                                 spec.t0, spec.t1, spec.amplitude,
                                 spec.cycles);
  const long rows = static_cast<long>(spec.points.size());
  const long cols = rows > 0 ? static_cast<long>(spec.points[0].size()) : 0;
  Matrix points(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (static_cast<long>(spec.points[i].size()) != cols)
      throw std::invalid_argument("waypoints must all have the same size");
    for (long c = 0; c < cols; ++c) points(i, c) = spec.points[i][c];
  }
  return LeaderTrack::waypoints(to_vector(spec.times), points);
}

}  // namespace momentkit
