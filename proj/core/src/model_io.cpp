#include "momentkit/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <utility>
#include <vector>

#include "momentkit/types.hpp"

namespace momentkit {
namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

double parse_double(const std::string& text, const std::string& path) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError(path, "not a decimal number: '" + text + "'");
  return value;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out.push_back(format_double(m(i, j)));
  return out;
}

Matrix matrix_from_json(const json& j, int rows, int cols,
                        const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
    throw ConfigError(path, "expected a flattened matrix with " +
                                std::to_string(rows * cols) + " entries");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) {
      const json& cell = j[i * cols + c];
      const std::string cell_path =
          path + "[" + std::to_string(i * cols + c) + "]";
      if (cell.is_string())
        m(i, c) = parse_double(cell.get<std::string>(), cell_path);
      else if (cell.is_number())
        m(i, c) = cell.get<double>();
      else
        throw ConfigError(cell_path, "expected decimal text");
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& cell = j[i];
    if (!cell.is_number())
      throw ConfigError(path + "[" + std::to_string(i) + "]",
                        "expected a number");
    v[static_cast<int>(i)] = cell.get<double>();
  }
  return v;
}

const json& require(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing field");
  return *it;
}

}  // namespace

std::string basis_kind_name(BasisKind kind) {
  switch (kind) {
    case BasisKind::Monomial: return "monomial";
    case BasisKind::NormalizedMonomial: return "normalized_monomial";
    case BasisKind::Chebyshev: return "chebyshev";
    case BasisKind::GaussianMonomial: return "gaussian_monomial";
    case BasisKind::Poly2D: return "poly2d";
  }
  return "monomial";
}

BasisKind basis_kind_from_name(const std::string& name, const std::string& path) {
  if (name == "monomial") return BasisKind::Monomial;
  if (name == "normalized_monomial") return BasisKind::NormalizedMonomial;
  if (name == "chebyshev") return BasisKind::Chebyshev;
  if (name == "gaussian_monomial") return BasisKind::GaussianMonomial;
  if (name == "poly2d") return BasisKind::Poly2D;
  throw ConfigError(path, "unknown kernel family '" + name + "'");
}

json basis_spec_to_json(const BasisSpec& spec) {
  json j;
  j["kind"] = basis_kind_name(spec.kind);
  j["lower"] = json::array();
  j["upper"] = json::array();
  for (int a = 0; a < spec.domain.dim(); ++a) {
    j["lower"].push_back(spec.domain.lower()[a]);
    j["upper"].push_back(spec.domain.upper()[a]);
  }
  j["degree"] = spec.degree;
  if (spec.kind == BasisKind::GaussianMonomial) {
    j["centers"] = spec.centers;
    j["sigma"] = spec.sigma;
    j["orders"] = spec.orders;
    j["constant_kernel"] = spec.constant_kernel;
  }
  return j;
}

BasisSpec basis_spec_from_json(const json& j) {
  const std::string path = "basis";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  BasisSpec spec;
  spec.kind = basis_kind_from_name(
      require(j, "kind", path).get<std::string>(), path + ".kind");
  const Vector lower = vector_from_json(require(j, "lower", path), path + ".lower");
  const Vector upper = vector_from_json(require(j, "upper", path), path + ".upper");
  if (lower.size() != upper.size() || lower.size() == 0)
    throw ConfigError(path, "lower/upper bounds disagree");
  spec.domain = BoxDomain(lower, upper);
  spec.degree = require(j, "degree", path).get<int>();
  if (spec.kind == BasisKind::GaussianMonomial) {
    spec.centers =
        require(j, "centers", path).get<std::vector<double>>();
    spec.sigma = require(j, "sigma", path).get<double>();
    if (j.contains("orders")) spec.orders = j["orders"].get<std::vector<int>>();
    if (j.contains("constant_kernel"))
      spec.constant_kernel = j["constant_kernel"].get<bool>();
  }
  return spec;
}

json report_to_json(const FitReport& report) {
  json j;
  j["sup_residuals"] = vector_to_json(report.sup_residuals);
  j["l2_residuals"] = vector_to_json(report.l2_residuals);
  j["eps_total"] = report.eps_total;
  j["log_norms"] = vector_to_json(report.log_norms);
  j["objective"] = report.objective;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["constraint_violation"] = report.constraint_violation;
  return j;
}

FitReport report_from_json(const json& j) {
  const std::string path = "report";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  FitReport report;
  report.sup_residuals =
      vector_from_json(require(j, "sup_residuals", path), path + ".sup_residuals");
  report.l2_residuals =
      vector_from_json(require(j, "l2_residuals", path), path + ".l2_residuals");
  report.eps_total = require(j, "eps_total", path).get<double>();
  report.log_norms =
      vector_from_json(require(j, "log_norms", path), path + ".log_norms");
  report.objective = require(j, "objective", path).get<double>();
  report.iterations = require(j, "iterations", path).get<long>();
  report.converged = require(j, "converged", path).get<bool>();
  report.constraint_violation =
      require(j, "constraint_violation", path).get<double>();
  return report;
}

namespace {

json model_header(const char* kind, const BasisSpec& basis,
                  const FitReport& report) {
  json j;
  j["kind"] = kind;
  j["basis"] = basis_spec_to_json(basis);
  j["report"] = report_to_json(report);
  return j;
}

}  // namespace

json model_to_json(const LinearModel& model, const BasisSpec& basis,
                   const FitReport& report) {
  json j = model_header("linear", basis, report);
  j["dimensions"] = {{"state", basis.domain.dim()},
                     {"kernels", static_cast<int>(model.a.rows())}};
  j["matrices"] = {{"a", matrix_to_json(model.a)}};
  return j;
}

json model_to_json(const QuadraticModel& model, const BasisSpec& basis,
                   const FitReport& report) {
  json j = model_header("quadratic", basis, report);
  j["dimensions"] = {{"state", basis.domain.dim()},
                     {"kernels", static_cast<int>(model.b.size())}};
  json slices = json::array();
  for (const Matrix& b : model.b) slices.push_back(matrix_to_json(b));
  j["matrices"] = {{"b", std::move(slices)}};
  return j;
}

json model_to_json(const LeaderModel& model, const BasisSpec& basis,
                   const FitReport& report) {
  json j = model_header("leader", basis, report);
  j["dimensions"] = {
      {"state", basis.domain.dim()},
      {"kernels", model.gamma.empty() ? 0 : static_cast<int>(model.gamma[0].rows())},
      {"leader_kernels", static_cast<int>(model.gamma.size())}};
  j["psi_basis"] = basis_spec_to_json(model.psi.spec());
  json slices = json::array();
  for (const Matrix& g : model.gamma) slices.push_back(matrix_to_json(g));
  j["matrices"] = {{"gamma", std::move(slices)}};
  return j;
}

StoredModel model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model", "expected an object");
  StoredModel stored;
  const std::string kind = require(j, "kind", "model").get<std::string>();
  stored.basis = basis_spec_from_json(require(j, "basis", "model"));
  stored.report = report_from_json(require(j, "report", "model"));
  const json& dims = require(j, "dimensions", "model");
  const int m = require(dims, "kernels", "model.dimensions").get<int>();
  const json& matrices = require(j, "matrices", "model");

  if (kind == "linear") {
    stored.kind = ModelKind::Linear;
    stored.linear = LinearModel{matrix_from_json(
        require(matrices, "a", "model.matrices"), m, m, "model.matrices.a")};
  } else if (kind == "quadratic") {
    stored.kind = ModelKind::Quadratic;
    const json& slices = require(matrices, "b", "model.matrices");
    if (!slices.is_array() || static_cast<int>(slices.size()) != m)
      throw ConfigError("model.matrices.b", "expected one slice per kernel");
    std::vector<Matrix> b;
    b.reserve(m);
    for (int k = 0; k < m; ++k)
      b.push_back(matrix_from_json(slices[k], m, m,
                                   "model.matrices.b[" + std::to_string(k) + "]"));
    stored.quadratic = make_quadratic_model(std::move(b));
  } else if (kind == "leader") {
    stored.kind = ModelKind::Leader;
    const int ml =
        require(dims, "leader_kernels", "model.dimensions").get<int>();
    const BasisSpec psi_spec =
        basis_spec_from_json(require(j, "psi_basis", "model"));
    const json& slices = require(matrices, "gamma", "model.matrices");
    if (!slices.is_array() || static_cast<int>(slices.size()) != ml)
      throw ConfigError("model.matrices.gamma",
                        "expected one slice per leader kernel");
    std::vector<Matrix> gamma;
    gamma.reserve(ml);
    for (int r = 0; r < ml; ++r)
      gamma.push_back(
          matrix_from_json(slices[r], m, m,
                           "model.matrices.gamma[" + std::to_string(r) + "]"));
    stored.leader = LeaderModel{std::move(gamma), make_basis(psi_spec)};
  } else {
    throw ConfigError("model.kind", "unknown model kind '" + kind + "'");
  }
  return stored;
}

}  // namespace momentkit
