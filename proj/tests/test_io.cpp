#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nclp/json_io.hpp"

using namespace nclp;

TEST_CASE("algebra and element round trips") {
  FiniteVNA alg({{2, 1.0}, {3, 0.25}});
  Json aj = algebra_to_json(alg);
  FiniteVNA back = algebra_from_json(aj);
  CHECK(back.same_structure(alg));

  std::mt19937_64 rng(1);
  AlgElement x = random_element(alg, rng);
  AlgElement xe = element_from_json(alg, element_to_json(x));
  CHECK(inf_norm(xe - x) < 1e-15);
}

TEST_CASE("parsers reject malformed input") {
  CHECK_THROWS(algebra_from_json(Json{{"blocks", Json::array()}}));
  CHECK_THROWS(algebra_from_json(Json::parse(R"({"blocks":[{"dim":2,"weight":0.0}]})")));

  FiniteVNA alg({{2, 1.0}});
  // non-square block
  CHECK_THROWS(element_from_json(alg, Json::parse(R"([[[[1,0],[0,0]]]])")));
  // NaN / Inf rejected
  Json bad = element_to_json(AlgElement::identity(alg));
  bad[0][0][0][0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(element_from_json(alg, bad));
  Json inf = element_to_json(AlgElement::identity(alg));
  inf[0][0][0][0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS(element_from_json(alg, inf));
}

TEST_CASE("operator descriptors round trip by action") {
  std::mt19937_64 rng(2);
  FiniteVNA alg({{2, 1.0}, {2, 2.0}});

  std::vector<LpOperator> ops;
  ops.push_back(LpOperator::from_conjugation(random_element(alg, rng)));
  ops.push_back(LpOperator::from_kraus({random_element(alg, rng)},
                                       {random_element(alg, rng)}));
  ops.push_back(LpOperator::from_schur(random_element(alg, rng)));
  ops.push_back(LpOperator::from_dense(alg, random_ginibre(alg.element_dim(), rng)));
  {
    AlgElement u = random_unitary(alg, rng);
    Matrix j = LpOperator::from_conjugation(u).matrix();
    ops.push_back(LpOperator::from_wbj(AlgElement::identity(alg),
                                       AlgElement::identity(alg), j));
  }
  for (const auto& t : ops) {
    LpOperator back = operator_from_json(operator_to_json(t));
    CHECK((back.matrix() - t.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(back.form().index() == t.form().index());
  }

  CHECK_THROWS(operator_from_json(Json{{"kind", "nonsense"}}));
}

TEST_CASE("report serializations carry the schema version") {
  FiniteVNA alg({{2, 1.0}});
  LpOperator id = LpOperator::identity(alg);

  Json a = analysis_to_json(decompose(id, 2.0));
  CHECK(a["schema_version"] == kSchemaVersion);
  CHECK(a["status"] == "lamperti");
  CHECK(a["classification"] == "hom");

  std::mt19937_64 rng(3);
  AlgElement x = random_psd(alg, rng);
  Json m = maximal_result_to_json(maximal_norm_pos({x}, 2.0));
  CHECK(m["schema_version"] == kSchemaVersion);
  CHECK(m["upper"].get<double>() >= m["lower"].get<double>() - 1e-12);

  Json e = ergodic_report_to_json(maximal_ergodic_report(id, x, 4, 2.0, false));
  CHECK(e["schema_version"] == kSchemaVersion);
  CHECK(e["ratio"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(e["profile"].size() >= 2);
}
