#pragma once

#include <json.hpp>

#include "nclp/dilation.hpp"
#include "nclp/gallery.hpp"
#include "nclp/lamperti.hpp"
#include "nclp/maximal.hpp"

namespace nclp {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json algebra_to_json(const FiniteVNA& algebra);
FiniteVNA algebra_from_json(const Json& j);

/// Elements serialize as one row-major matrix per block, every entry [re, im].
Json element_to_json(const AlgElement& x);
AlgElement element_from_json(const FiniteVNA& algebra, const Json& j);

/// Operator descriptors: {"algebra": ..., "kind": "conjugation" | "kraus" |
/// "schur" | "dense" | "wbj", <fields per kind>}.
Json operator_to_json(const LpOperator& t);
LpOperator operator_from_json(const Json& j);

Json analysis_to_json(const LampertiAnalysis& a);
Json maximal_result_to_json(const MaximalNormResult& r);
Json ergodic_report_to_json(const ErgodicReport& r);
Json tensor_verification_to_json(const TensorVerification& v);
Json check_results_to_json(const std::string& case_name,
                           const std::vector<CheckResult>& results);

}  // namespace nclp
