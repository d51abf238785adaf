#include "nclp/json_io.hpp"

#include <cmath>

namespace nclp {

namespace {

double finite_number(const Json& j, const char* what) {
  if (!j.is_number()) throw std::invalid_argument(std::string("expected a number for ") + what);
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string("non-finite value for ") + what);
  return v;
}

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("matrix entries must be [re, im] pairs");
  return Complex(finite_number(j[0], "re"), finite_number(j[1], "im"));
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Matrix matrix_from_json(const Json& j, int expected) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected)
    throw std::invalid_argument("block is not square of the declared dimension");
  Matrix m(expected, expected);
  for (int r = 0; r < expected; ++r) {
    const Json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != expected)
      throw std::invalid_argument("block is not square of the declared dimension");
    for (int c = 0; c < expected; ++c) m(r, c) = complex_from_json(row[static_cast<size_t>(c)]);
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json dense_to_json(const Matrix& m) { return matrix_to_json(m); }

Matrix dense_from_json(const Json& j, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw std::invalid_argument("dense matrix must be D x D");
  Matrix m(d, d);
  for (int r = 0; r < d; ++r) {
    const Json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      throw std::invalid_argument("dense matrix must be D x D");
    for (int c = 0; c < d; ++c) m(r, c) = complex_from_json(row[static_cast<size_t>(c)]);
  }
  return m;
}

}  // namespace

Json algebra_to_json(const FiniteVNA& algebra) {
  Json blocks = Json::array();
  for (const auto& b : algebra.blocks()) blocks.push_back({{"dim", b.dim}, {"weight", b.weight}});
  return Json{{"blocks", std::move(blocks)}};
}

FiniteVNA algebra_from_json(const Json& j) {
  if (!j.contains("blocks") || !j["blocks"].is_array() || j["blocks"].empty())
    throw std::invalid_argument("algebra descriptor needs a nonempty blocks array");
  std::vector<BlockSpec> blocks;
  for (const auto& bj : j["blocks"]) {
    BlockSpec b;
    if (!bj.contains("dim") || !bj["dim"].is_number_integer())
      throw std::invalid_argument("block dim must be an integer");
    b.dim = bj["dim"].get<int>();
    b.weight = finite_number(bj.at("weight"), "weight");
    blocks.push_back(b);
  }
  return FiniteVNA(std::move(blocks));
}

Json element_to_json(const AlgElement& x) {
  Json blocks = Json::array();
  for (int k = 0; k < x.block_count(); ++k) blocks.push_back(matrix_to_json(x.block(k)));
  return blocks;
}

AlgElement element_from_json(const FiniteVNA& algebra, const Json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != algebra.block_count())
    throw std::invalid_argument("element must list one matrix per block");
  std::vector<Matrix> blocks;
  for (int k = 0; k < algebra.block_count(); ++k)
    blocks.push_back(matrix_from_json(j[static_cast<size_t>(k)], algebra.dim(k)));
  return AlgElement(algebra, std::move(blocks));
}

Json operator_to_json(const LpOperator& t) {
  Json j{{"algebra", algebra_to_json(t.algebra())}};
  if (const auto* c = std::get_if<ConjugationForm>(&t.form())) {
    j["kind"] = "conjugation";
    j["r"] = element_to_json(c->r);
  } else if (const auto* k = std::get_if<KrausForm>(&t.form())) {
    j["kind"] = "kraus";
    Json as = Json::array(), bs = Json::array();
    for (const auto& e : k->a) as.push_back(element_to_json(e));
    for (const auto& e : k->b) bs.push_back(element_to_json(e));
    j["a"] = std::move(as);
    j["b"] = std::move(bs);
  } else if (const auto* s = std::get_if<SchurForm>(&t.form())) {
    j["kind"] = "schur";
    j["m"] = element_to_json(s->m);
  } else if (const auto* w = std::get_if<WbjForm>(&t.form())) {
    j["kind"] = "wbj";
    j["w"] = element_to_json(w->w);
    j["b"] = element_to_json(w->b);
    j["j_matrix"] = dense_to_json(w->j);
  } else {
    j["kind"] = "dense";
    j["matrix"] = dense_to_json(t.matrix());
  }
  return j;
}

LpOperator operator_from_json(const Json& j) {
  FiniteVNA alg = algebra_from_json(j.at("algebra"));
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "conjugation")
    return LpOperator::from_conjugation(element_from_json(alg, j.at("r")));
  if (kind == "kraus") {
    std::vector<AlgElement> as, bs;
    for (const auto& e : j.at("a")) as.push_back(element_from_json(alg, e));
    for (const auto& e : j.at("b")) bs.push_back(element_from_json(alg, e));
    return LpOperator::from_kraus(std::move(as), std::move(bs));
  }
  if (kind == "schur") return LpOperator::from_schur(element_from_json(alg, j.at("m")));
  if (kind == "wbj")
    return LpOperator::from_wbj(element_from_json(alg, j.at("w")),
                                element_from_json(alg, j.at("b")),
                                dense_from_json(j.at("j_matrix"), alg.element_dim()));
  if (kind == "dense")
    return LpOperator::from_dense(alg, dense_from_json(j.at("matrix"), alg.element_dim()));
  throw std::invalid_argument("unknown operator kind: " + kind);
}

Json analysis_to_json(const LampertiAnalysis& a) {
  Json j{{"schema_version", kSchemaVersion}};
  switch (a.status) {
    case LampertiStatus::lamperti:
      j["status"] = "lamperti";
      break;
    case LampertiStatus::not_lamperti:
      j["status"] = "not_lamperti";
      break;
    default:
      j["status"] = "indeterminate";
  }
  j["degenerate_unit_image"] = a.degenerate_unit_image;
  if (a.decomposition) {
    const auto& d = *a.decomposition;
    Json dj;
    dj["w"] = element_to_json(d.w);
    dj["b"] = element_to_json(d.b);
    dj["j_matrix"] = dense_to_json(d.J.mat);
    dj["classification"] = d.classification == JordanClass::hom      ? "hom"
                           : d.classification == JordanClass::antihom ? "antihom"
                                                                      : "mixed";
    dj["residuals"] = {{"reconstruction", d.residuals.reconstruction},
                       {"commutation", d.residuals.commutation},
                       {"jordan", d.residuals.jordan},
                       {"support_identity", d.residuals.support_identity}};
    dj["norm_domination"] = d.norm_domination;
    j["decomposition"] = std::move(dj);
    j["classification"] = j["decomposition"]["classification"];
  }
  if (a.witness) {
    j["witness"] = {{"e", element_to_json(a.witness->e)},
                    {"f", element_to_json(a.witness->f)},
                    {"violation", a.witness->violation}};
  }
  return j;
}

Json maximal_result_to_json(const MaximalNormResult& r) {
  Json j{{"schema_version", kSchemaVersion}};
  j["upper"] = r.upper;
  j["lower"] = r.lower;
  j["gap"] = r.upper - r.lower;
  j["feasibility_slack"] = r.feasibility_slack;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  if (r.a_star) j["a_star"] = element_to_json(*r.a_star);
  return j;
}

Json ergodic_report_to_json(const ErgodicReport& r) {
  Json j{{"schema_version", kSchemaVersion}};
  j["two_sided"] = r.two_sided;
  j["x_norm"] = r.x_norm;
  j["ratio"] = r.ratio;
  j["projection_distance"] = r.projection_distance;
  j["profile"] = Json::array();
  for (size_t i = 0; i < r.profile_grid.size(); ++i)
    j["profile"].push_back({{"N", r.profile_grid[i]},
                            {"ratio_upper", r.profile_upper[i]},
                            {"ratio_lower", r.profile_lower[i]}});
  j["maximal"] = maximal_result_to_json(r.maximal);
  return j;
}

Json tensor_verification_to_json(const TensorVerification& v) {
  Json j{{"schema_version", kSchemaVersion}};
  j["residuals"] = v.residuals;
  j["qj_identity"] = v.qj_identity;
  j["isometry_deviation"] = v.isometry_deviation;
  j["dimensions"] = v.total_dim;
  return j;
}

Json check_results_to_json(const std::string& case_name,
                           const std::vector<CheckResult>& results) {
  Json j{{"schema_version", kSchemaVersion}, {"case", case_name}};
  Json arr = Json::array();
  bool all = true;
  for (const auto& r : results) {
    arr.push_back({{"name", r.name},
                   {"passed", r.passed},
                   {"observed", r.observed},
                   {"target", r.target},
                   {"tol", r.tol},
                   {"detail", r.detail}});
    all = all && r.passed;
  }
  j["checks"] = std::move(arr);
  j["all_passed"] = all;
  return j;
}

}  // namespace nclp
