#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <momentkit/dynamics.hpp>
#include <momentkit/fit.hpp>
#include <momentkit/model_io.hpp>

#include <nlohmann/json.hpp>

using momentkit::BasisKind;
using momentkit::BasisSpec;
using momentkit::BoxDomain;
using momentkit::ConfigError;
using momentkit::Expression;
using momentkit::ExpressionPairField;
using momentkit::KernelBasis;
using momentkit::Matrix;
using momentkit::ModelKind;
using momentkit::QuadratureGrid;
using momentkit::StoredModel;

namespace {

BasisSpec monomials(int degree) {
  BasisSpec spec;
  spec.kind = BasisKind::Monomial;
  spec.domain = BoxDomain::interval(-1.0, 1.0);
  spec.degree = degree;
  return spec;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("basis descriptors survive a serialization round trip") {
  BasisSpec spec;
  spec.kind = BasisKind::GaussianMonomial;
  spec.domain = BoxDomain::interval(-1.5, 1.5);
  spec.centers = BasisSpec::equidistant_centers(-1.5, 1.5, 7);
  spec.sigma = 2.0 / 3.0;
  spec.orders = {0, 1};
  spec.constant_kernel = true;

  const nlohmann::json j = momentkit::basis_spec_to_json(spec);
  const BasisSpec back = momentkit::basis_spec_from_json(j);
  CHECK(back.kind == spec.kind);
  CHECK(back.domain.lower() == spec.domain.lower());
  CHECK(back.domain.upper() == spec.domain.upper());
  CHECK(back.centers == spec.centers);
  CHECK(back.sigma == spec.sigma);
  CHECK(back.orders == spec.orders);
  CHECK(back.constant_kernel == spec.constant_kernel);
  CHECK(momentkit::make_basis(back).size() == momentkit::make_basis(spec).size());
}

TEST_CASE("linear models round trip bitwise through document text") {
  const KernelBasis basis = momentkit::make_basis(monomials(3));
  const auto field = momentkit::make_catalog_field("linear_decay", 1);
  const QuadratureGrid grid = momentkit::make_quadrature(basis.domain(), 101);
  const auto [model, report] = momentkit::fit_linear(basis, *field, grid);

  const nlohmann::json doc = momentkit::model_to_json(model, basis.spec(), report);
  CHECK(doc.at("matrices").at("a").at(0).is_string());

  // Round trip through serialized text, the way files move between runs.
  const nlohmann::json reparsed = nlohmann::json::parse(doc.dump());
  const StoredModel stored = momentkit::model_from_json(reparsed);
  REQUIRE(stored.kind == ModelKind::Linear);
  REQUIRE(stored.linear.has_value());
  CHECK(bitwise_equal(stored.linear->a, model.a));
  CHECK(stored.report.eps_total == report.eps_total);
  CHECK(stored.report.converged == report.converged);
  CHECK(stored.report.iterations == report.iterations);
  CHECK((stored.report.sup_residuals.array() ==
         report.sup_residuals.array()).all());
}

TEST_CASE("interaction models rebuild their paired slices exactly") {
  const KernelBasis basis = momentkit::make_basis(monomials(2));
  const ExpressionPairField g(Expression::parse("x - y", 1));
  const QuadratureGrid grid = momentkit::make_quadrature(basis.domain(), 31);
  const auto [model, report] = momentkit::fit_quadratic(basis, g, grid);

  const nlohmann::json doc = momentkit::model_to_json(model, basis.spec(), report);
  const StoredModel stored =
      momentkit::model_from_json(nlohmann::json::parse(doc.dump()));
  REQUIRE(stored.kind == ModelKind::Quadratic);
  REQUIRE(stored.quadratic.has_value());
  REQUIRE(stored.quadratic->b.size() == model.b.size());
  for (std::size_t k = 0; k < model.b.size(); ++k)
    CHECK(bitwise_equal(stored.quadratic->b[k], model.b[k]));
  for (std::size_t l = 0; l < model.btilde.size(); ++l)
    CHECK(bitwise_equal(stored.quadratic->btilde[l], model.btilde[l]));
}

TEST_CASE("leader models keep both kernel families") {
  const KernelBasis phi = momentkit::make_basis(monomials(2));
  const KernelBasis psi = momentkit::make_basis(monomials(1));
  const ExpressionPairField eta(Expression::parse("y - x", 1));
  const QuadratureGrid grid = momentkit::make_quadrature(phi.domain(), 31);
  const auto [model, report] = momentkit::fit_leader(phi, psi, eta, grid);

  const nlohmann::json doc = momentkit::model_to_json(model, phi.spec(), report);
  const StoredModel stored =
      momentkit::model_from_json(nlohmann::json::parse(doc.dump()));
  REQUIRE(stored.kind == ModelKind::Leader);
  REQUIRE(stored.leader.has_value());
  REQUIRE(stored.leader->gamma.size() == model.gamma.size());
  for (std::size_t r = 0; r < model.gamma.size(); ++r)
    CHECK(bitwise_equal(stored.leader->gamma[r], model.gamma[r]));
  CHECK(stored.leader->psi.size() == psi.size());
  CHECK(stored.leader->psi.spec().degree == psi.spec().degree);
}

TEST_CASE("malformed documents raise errors that name the field") {
  const KernelBasis basis = momentkit::make_basis(monomials(1));
  const auto field = momentkit::make_catalog_field("zero", 1);
  const QuadratureGrid grid = momentkit::make_quadrature(basis.domain(), 31);
  const auto [model, report] = momentkit::fit_linear(basis, *field, grid);
  const nlohmann::json doc = momentkit::model_to_json(model, basis.spec(), report);

  SUBCASE("missing kind") {
    nlohmann::json broken = doc;
    broken.erase("kind");
    CHECK_THROWS_WITH_AS(momentkit::model_from_json(broken),
                         doctest::Contains("model.kind"), ConfigError);
  }
  SUBCASE("unknown kind") {
    nlohmann::json broken = doc;
    broken["kind"] = "cubic";
    CHECK_THROWS_AS(momentkit::model_from_json(broken), ConfigError);
  }
  SUBCASE("missing matrices") {
    nlohmann::json broken = doc;
    broken.erase("matrices");
    CHECK_THROWS_WITH_AS(momentkit::model_from_json(broken),
                         doctest::Contains("model.matrices"), ConfigError);
  }
  SUBCASE("entry that is not a decimal number") {
    nlohmann::json broken = doc;
    broken["matrices"]["a"][0] = "not-a-number";
    CHECK_THROWS_WITH_AS(momentkit::model_from_json(broken),
                         doctest::Contains("matrices.a[0]"), ConfigError);
  }
  SUBCASE("wrong entry count") {
    nlohmann::json broken = doc;
    broken["matrices"]["a"].erase(0);
    CHECK_THROWS_AS(momentkit::model_from_json(broken), ConfigError);
  }
  SUBCASE("basis with an unknown family name") {
    nlohmann::json broken = doc;
    broken["basis"]["kind"] = "splines";
    CHECK_THROWS_AS(momentkit::model_from_json(broken), ConfigError);
  }
}
