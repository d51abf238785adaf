#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "nclp/json_io.hpp"

namespace {

using nclp::Json;

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << std::endl;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << j.dump(2) << std::endl;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-dimensional noncommutative Lp toolkit: Lamperti analysis, "
               "dilations, and maximal ergodic verification"};
  app.require_subcommand(1);

  double tol = 1e-8;
  unsigned seed = 7;
  int max_iter = 10000;
  app.add_option("--tol", tol, "residual tolerance");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--max-iter", max_iter, "solver iteration budget");

  std::string in_path, out_path;

  auto* gallery = app.add_subcommand("gallery", "list or run built-in cases");
  auto* gallery_list = gallery->add_subcommand("list", "print case names");
  auto* gallery_run = gallery->add_subcommand("run", "run one case");
  std::string case_name;
  gallery_run->add_option("name", case_name, "case name")->required();
  gallery_run->add_option("--json", out_path, "write the report to this file");

  auto* analyze = app.add_subcommand("analyze", "Lamperti analysis of an operator");
  analyze->add_option("--in", in_path, "operator descriptor JSON")->required();
  analyze->add_option("--out", out_path, "certificate output path");
  double analyze_p = 2.0;
  analyze->add_option("--p", analyze_p, "exponent");

  auto* dilate = app.add_subcommand("dilate", "N-dilation of a convex combination");
  dilate->add_option("--in", in_path, "JSON with operators, lambda, N, p")->required();
  dilate->add_option("--out", out_path, "report output path");

  auto* maxnorm = app.add_subcommand("maxnorm", "positive-sequence maximal norm");
  maxnorm->add_option("--in", in_path, "JSON with algebra, elements, p")->required();
  maxnorm->add_option("--out", out_path, "result output path");

  auto* ergodic = app.add_subcommand("ergodic", "maximal ergodic report");
  ergodic->add_option("--in", in_path, "JSON with operator, x, N, p, two_sided")
      ->required();
  ergodic->add_option("--out", out_path, "report output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gallery_list->parsed()) {
      for (const auto& n : nclp::gallery_case_names()) std::cout << n << "\n";
      return 0;
    }
    if (gallery_run->parsed()) {
      nclp::GalleryCase c = nclp::make_gallery_case(case_name);
      auto results = nclp::run_case(c);
      Json j = nclp::check_results_to_json(c.name, results);
      emit(j, out_path);
      return j["all_passed"].get<bool>() ? 0 : 1;
    }
    if (analyze->parsed()) {
      nclp::LpOperator t = nclp::operator_from_json(read_json_file(in_path));
      nclp::LampertiOptions opts;
      opts.tol = tol;
      opts.seed = seed;
      emit(nclp::analysis_to_json(nclp::decompose(t, analyze_p, opts)), out_path);
      return 0;
    }
    if (dilate->parsed()) {
      Json j = read_json_file(in_path);
      std::vector<nclp::LpOperator> ops;
      for (const auto& oj : j.at("operators")) ops.push_back(nclp::operator_from_json(oj));
      std::vector<double> lambda = j.at("lambda").get<std::vector<double>>();
      const int n_steps = j.at("N").get<int>();
      const double p = j.at("p").get<double>();
      nclp::TensorDilationOptions topts;
      topts.lamperti.tol = tol;
      topts.lamperti.seed = seed;
      nclp::TensorDilation sys = nclp::convex_n_dilation(lambda, ops, n_steps, p, topts);
      emit(nclp::tensor_verification_to_json(nclp::verify_tensor_dilation(sys, 10, seed)),
           out_path);
      return 0;
    }
    if (maxnorm->parsed()) {
      Json j = read_json_file(in_path);
      nclp::FiniteVNA alg = nclp::algebra_from_json(j.at("algebra"));
      std::vector<nclp::AlgElement> xs;
      for (const auto& ej : j.at("elements")) xs.push_back(nclp::element_from_json(alg, ej));
      const double p = j.at("p").get<double>();
      nclp::MaxNormOptions opts;
      opts.max_iter = max_iter;
      opts.seed = seed;
      if (j.contains("gap_tol")) opts.gap_tol = j["gap_tol"].get<double>();
      emit(nclp::maximal_result_to_json(nclp::maximal_norm_pos(xs, p, opts)), out_path);
      return 0;
    }
    if (ergodic->parsed()) {
      Json j = read_json_file(in_path);
      nclp::LpOperator t = nclp::operator_from_json(j.at("operator"));
      nclp::AlgElement x = nclp::element_from_json(t.algebra(), j.at("x"));
      const int n = j.at("N").get<int>();
      const double p = j.at("p").get<double>();
      const bool two_sided = j.value("two_sided", false);
      nclp::MaxNormOptions opts;
      opts.max_iter = max_iter;
      opts.seed = seed;
      emit(nclp::ergodic_report_to_json(
               nclp::maximal_ergodic_report(t, x, n, p, two_sided, opts)),
           out_path);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
