#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "momentkit/kernel_basis.hpp"
#include "momentkit/reduced_model.hpp"

namespace momentkit {

// Serialized form of a fitted model: kind, dimensions, the defining kernel
// family (and the psi family for leader models), flattened matrices in
// row-major order as decimal text with 17 significant digits, and the fit
// report. Derived data (btilde) is rebuilt on load so its consistency with
// the slices stays exact.
nlohmann::json basis_spec_to_json(const BasisSpec& spec);
BasisSpec basis_spec_from_json(const nlohmann::json& j);

// Canonical family names used in serialized documents ("monomial",
// "normalized_monomial", "chebyshev", "gaussian_monomial", "poly2d").
std::string basis_kind_name(BasisKind kind);
// Throws ConfigError at `path` for unknown names.
BasisKind basis_kind_from_name(const std::string& name, const std::string& path);

nlohmann::json report_to_json(const FitReport& report);
FitReport report_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const LinearModel& model, const BasisSpec& basis,
                             const FitReport& report);
nlohmann::json model_to_json(const QuadraticModel& model, const BasisSpec& basis,
                             const FitReport& report);
nlohmann::json model_to_json(const LeaderModel& model, const BasisSpec& basis,
                             const FitReport& report);

enum class ModelKind { Linear, Quadratic, Leader };

struct StoredModel {
  ModelKind kind = ModelKind::Linear;
  BasisSpec basis;
  std::optional<LinearModel> linear;
  std::optional<QuadraticModel> quadratic;
  std::optional<LeaderModel> leader;
  FitReport report;
};

// Parses any of the three documents; throws ConfigError naming the offending
// path on malformed input.
StoredModel model_from_json(const nlohmann::json& j);

}  // namespace momentkit
