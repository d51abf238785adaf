#include "nclp/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace nclp {

namespace {

const char* class_name(JordanClass c) {
  switch (c) {
    case JordanClass::hom:
      return "hom";
    case JordanClass::antihom:
      return "antihom";
    default:
      return "mixed";
  }
}

}  // namespace

GalleryCase example_7_2() {
  FiniteVNA alg({{2, 1.0}});
  Matrix r(2, 2);
  r << Complex(1, 0), Complex(1, 0), Complex(0, 0), Complex(-1, 0);
  AlgElement rel(alg, {r});
  GalleryCase c{"example_7_2", alg, LpOperator::from_conjugation(rel), 2.0, 1, {}};

  CheckSpec witness{CheckKind::not_lamperti_witness, "witness_e11_e22"};
  witness.target = std::sqrt(2.0);
  witness.tol = 1e-10;
  c.checks.push_back(witness);

  c.checks.push_back({CheckKind::involution, "squares_to_identity", 0.0, 1e-12});
  c.checks.push_back({CheckKind::cp, "completely_positive", 0.0, 1e-10});
  c.checks.push_back({CheckKind::positivity_evidence, "positive_on_samples", 0.0, 1e-9, 50});

  CheckSpec norm{CheckKind::element_norm, "image_norm_e22"};
  norm.target = 2.0;
  norm.tol = 1e-10;
  norm.p_values = {1.5, 2.0, 3.0};
  norm.element = AlgElement::matrix_unit(alg, 0, 1, 1);
  c.checks.push_back(norm);

  CheckSpec opn{CheckKind::opnorm_at_least, "not_a_contraction"};
  opn.target = 2.0;
  opn.tol = 1e-6;
  opn.p_values = {2.0};
  c.checks.push_back(opn);
  return c;
}

GalleryCase jlm_operator(int k, double p) {
  if (k < 2) throw std::invalid_argument("jlm_operator: k >= 2");
  FiniteVNA alg({{k, 1.0}});
  const double beta = std::pow(static_cast<double>(k), -1.0 / (2.0 * p));
  std::vector<AlgElement> kraus;
  for (int i = 0; i < k; ++i) {
    AlgElement c = AlgElement::matrix_unit(alg, 0, i, i) +
                   beta * AlgElement::matrix_unit(alg, 0, 0, i);
    kraus.push_back(0.5 * c);
  }
  GalleryCase c{"jlm_k" + std::to_string(k), alg, LpOperator::from_kraus(kraus, kraus),
                p, 2, {}};
  c.checks.push_back({CheckKind::cp, "completely_positive", 0.0, 1e-10});
  c.checks.push_back({CheckKind::diagonality, "diagonal_range", 0.0, 1e-12, 50});
  CheckSpec contr{CheckKind::contraction_opnorm, "complete_contraction_evidence"};
  contr.tol = 1e-6;
  contr.p_values = {p};
  c.checks.push_back(contr);
  CheckSpec erg{CheckKind::ergodic_stabilization, "ergodic_ratio_stabilizes"};
  erg.tol = 1e-2;
  erg.count = 16;  // profile horizon
  erg.p_values = {p};
  c.checks.push_back(erg);
  return c;
}

GalleryCase schur_mixed_unitary(const std::vector<Complex>& z) {
  if (z.empty()) throw std::invalid_argument("schur_mixed_unitary: empty phase vector");
  for (const auto& zi : z)
    if (std::abs(std::abs(zi) - 1.0) > 1e-10)
      throw std::domain_error("schur_mixed_unitary: phases must be unimodular");
  const int n = static_cast<int>(z.size());
  FiniteVNA alg({{n, 1.0}});
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = z[static_cast<size_t>(i)] * std::conj(z[static_cast<size_t>(j)]);
  GalleryCase c{"schur_mixed_unitary", alg, LpOperator::from_schur(AlgElement(alg, {m})),
                2.0, 3, {}};
  CheckSpec cls{CheckKind::decompose_class, "conjugation_by_diagonal_unitary"};
  cls.expected_class = "hom";
  cls.tol = 1e-9;
  c.checks.push_back(cls);
  c.checks.push_back({CheckKind::b_identity, "b_is_identity", 0.0, 1e-9});
  CheckSpec iso{CheckKind::isometric_sampled, "isometric_on_samples"};
  iso.tol = 1e-9;
  iso.count = 20;
  iso.p_values = {1.5, 2.0, 3.0};
  c.checks.push_back(iso);
  return c;
}

RandomLamperti random_lamperti_operator(const FiniteVNA& alg, unsigned seed,
                                        JordanClass cls, bool contractive, double p,
                                        bool isometric, int dropped_legs) {
  std::mt19937_64 rng(seed);
  const int m = alg.block_count();

  // Legs: a dim-preserving permutation target <- source, built per dim group.
  std::vector<int> source_of(static_cast<size_t>(m), -1);
  std::map<int, std::vector<int>> by_dim;
  for (int k = 0; k < m; ++k) by_dim[alg.dim(k)].push_back(k);
  for (auto& [dim, group] : by_dim) {
    std::vector<int> perm = group;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (size_t i = 0; i < group.size(); ++i) source_of[static_cast<size_t>(group[i])] = perm[i];
  }
  for (int d = 0; d < dropped_legs; ++d) {
    std::vector<int> alive;
    for (int k = 0; k < m; ++k)
      if (source_of[static_cast<size_t>(k)] >= 0) alive.push_back(k);
    if (alive.size() <= 1) break;
    source_of[alive[rng() % alive.size()]] = -1;
  }
  if (isometric) {
    // An isometry needs every source block to survive into the image.
    dropped_legs = 0;
  }

  // Transposition pattern per the requested classification.
  std::vector<int> noncomm;  // legs on blocks of dim >= 2
  for (int k = 0; k < m; ++k)
    if (source_of[static_cast<size_t>(k)] >= 0 && alg.dim(k) >= 2) noncomm.push_back(k);
  std::vector<bool> transposed(static_cast<size_t>(m), false);
  switch (cls) {
    case JordanClass::hom:
      break;
    case JordanClass::antihom:
      if (noncomm.empty())
        throw std::invalid_argument(
            "random_lamperti_operator: antihom needs a block of dim >= 2");
      for (int k : noncomm) transposed[static_cast<size_t>(k)] = true;
      break;
    case JordanClass::mixed:
      if (noncomm.size() < 2)
        throw std::invalid_argument(
            "random_lamperti_operator: mixed needs two blocks of dim >= 2");
      transposed[static_cast<size_t>(noncomm.front())] = true;
      break;
  }

  AlgElement u = random_unitary(alg, rng);
  auto j_action = [&](const AlgElement& x) {
    AlgElement out = AlgElement::zero(alg);
    std::vector<Matrix> blocks;
    for (int k = 0; k < m; ++k) {
      const int src = source_of[static_cast<size_t>(k)];
      if (src < 0) {
        blocks.push_back(Matrix::Zero(alg.dim(k), alg.dim(k)));
        continue;
      }
      Matrix inner = transposed[static_cast<size_t>(k)]
                         ? Matrix(x.block(src).transpose())
                         : x.block(src);
      blocks.push_back(u.block(k) * inner * u.block(k).adjoint());
    }
    return AlgElement(alg, std::move(blocks));
  };
  Matrix jmat = dense_matrix_of(alg, j_action);

  std::uniform_real_distribution<double> cdist(contractive ? 0.2 : 0.4,
                                               contractive ? 1.0 : 2.5);
  std::vector<Matrix> bblocks, wblocks;
  for (int k = 0; k < m; ++k) {
    const int src = source_of[static_cast<size_t>(k)];
    if (src < 0) {
      bblocks.push_back(Matrix::Zero(alg.dim(k), alg.dim(k)));
      wblocks.push_back(Matrix::Zero(alg.dim(k), alg.dim(k)));
      continue;
    }
    const double target_c = isometric ? 1.0 : cdist(rng);
    const double beta = std::pow(
        target_c * alg.weight(src) * alg.dim(src) / (alg.weight(k) * alg.dim(k)),
        1.0 / p);
    bblocks.push_back(beta * Matrix::Identity(alg.dim(k), alg.dim(k)));
    wblocks.push_back(Matrix::Identity(alg.dim(k), alg.dim(k)));
  }
  AlgElement b(alg, std::move(bblocks));
  AlgElement w(alg, std::move(wblocks));
  return RandomLamperti{LpOperator::from_wbj(w, b, jmat), w, b, jmat, cls, contractive};
}

GalleryCase random_lamperti(const FiniteVNA& alg, unsigned seed, JordanClass cls,
                            bool contractive, double p) {
  RandomLamperti rl = random_lamperti_operator(alg, seed, cls, contractive, p);
  std::ostringstream name;
  name << "random_" << class_name(cls) << "_seed" << seed;
  GalleryCase c{name.str(), alg, rl.op, p, seed, {}};
  c.checks.push_back({CheckKind::roundtrip_residual, "decompose_roundtrip", 0.0, 1e-8});
  CheckSpec cc{CheckKind::decompose_class, "classification_matches"};
  cc.expected_class = class_name(cls);
  cc.tol = 1e-8;
  c.checks.push_back(cc);
  c.checks.push_back({CheckKind::cp_iff_hom, "cp_iff_hom", 0.0, 1e-8});
  if (contractive) {
    c.checks.push_back({CheckKind::rho_contraction, "rho_at_most_one", 0.0, 1e-10});
    CheckSpec co{CheckKind::contraction_opnorm, "contraction_evidence"};
    co.tol = 1e-8;
    co.p_values = {p};
    c.checks.push_back(co);
  }
  return c;
}

namespace {

CheckResult run_check(const GalleryCase& c, const CheckSpec& spec) {
  CheckResult res{spec.name, false, 0.0, spec.target, spec.tol, ""};
  const LpOperator& t = c.op;
  const FiniteVNA& alg = c.algebra;
  switch (spec.kind) {
    case CheckKind::not_lamperti_witness: {
      LampertiAnalysis a = decompose(t, c.p);
      if (a.status != LampertiStatus::not_lamperti || !a.witness) {
        res.detail = "expected a refutation witness";
        break;
      }
      AlgElement e11 = AlgElement::matrix_unit(alg, 0, 0, 0);
      AlgElement e22 = AlgElement::matrix_unit(alg, 0, 1, 1);
      res.observed = a.witness->violation;
      res.passed = inf_norm(a.witness->e - e11) <= 1e-12 &&
                   inf_norm(a.witness->f - e22) <= 1e-12 &&
                   std::abs(a.witness->violation - spec.target) <= spec.tol;
      break;
    }
    case CheckKind::involution: {
      res.observed =
          (compose(t, t).matrix() - LpOperator::identity(alg).matrix()).cwiseAbs().maxCoeff();
      res.passed = res.observed <= spec.tol;
      break;
    }
    case CheckKind::cp: {
      ChoiReport rep = choi_cp_check(t, spec.tol);
      res.observed = rep.min_eig;
      res.passed = rep.is_cp;
      break;
    }
    case CheckKind::positivity_evidence: {
      auto wit = falsify_positivity(t, spec.count, c.seed, spec.tol);
      res.passed = !wit.has_value();
      if (wit) res.detail = "positivity counterexample found";
      break;
    }
    case CheckKind::element_norm: {
      double worst = 0.0;
      for (double p : spec.p_values)
        worst = std::max(worst, std::abs(lp_norm(t.apply(*spec.element), p) - spec.target));
      res.observed = worst;
      res.passed = worst <= spec.tol;
      break;
    }
    case CheckKind::opnorm_at_least: {
      res.observed = opnorm_lower(t, spec.p_values.at(0), 60, c.seed).lower;
      res.passed = res.observed >= spec.target - spec.tol;
      break;
    }
    case CheckKind::contraction_opnorm: {
      res.observed = opnorm_lower(t, spec.p_values.at(0), 60, c.seed).lower;
      res.passed = res.observed <= 1.0 + spec.tol;
      break;
    }
    case CheckKind::diagonality: {
      std::mt19937_64 rng(c.seed);
      double worst = 0.0;
      for (int i = 0; i < spec.count; ++i) {
        AlgElement y = t.apply(random_psd(alg, rng));
        for (int k = 0; k < alg.block_count(); ++k)
          for (int r = 0; r < alg.dim(k); ++r)
            for (int cc2 = 0; cc2 < alg.dim(k); ++cc2)
              if (r != cc2) worst = std::max(worst, std::abs(y.block(k)(r, cc2)));
      }
      res.observed = worst;
      res.passed = worst <= spec.tol;
      break;
    }
    case CheckKind::decompose_class: {
      LampertiAnalysis a = decompose(t, c.p);
      if (a.status != LampertiStatus::lamperti || !a.decomposition) {
        res.detail = "decomposition failed";
        break;
      }
      res.passed = class_name(a.decomposition->classification) == spec.expected_class;
      if (!res.passed) res.detail = class_name(a.decomposition->classification);
      break;
    }
    case CheckKind::roundtrip_residual: {
      LampertiAnalysis a = decompose(t, c.p);
      if (a.status != LampertiStatus::lamperti || !a.decomposition) {
        res.detail = "decomposition failed";
        break;
      }
      const auto& r = a.decomposition->residuals;
      res.observed =
          std::max({r.reconstruction, r.commutation, r.jordan, r.support_identity});
      res.passed = res.observed <= spec.tol;
      break;
    }
    case CheckKind::cp_iff_hom: {
      LampertiAnalysis a = decompose(t, c.p);
      if (a.status != LampertiStatus::lamperti || !a.decomposition) {
        res.detail = "decomposition failed";
        break;
      }
      const bool hom = a.decomposition->classification == JordanClass::hom;
      const bool cp = choi_cp_check(t, 1e-9).is_cp;
      const bool cl = is_completely_lamperti(*a.decomposition, spec.tol);
      res.passed = (cp == hom) && (cl == hom);
      break;
    }
    case CheckKind::rho_contraction: {
      AlgElement rho = rho_of(t, c.p);
      double worst = 0.0;
      for (int k = 0; k < rho.block_count(); ++k)
        worst = std::max(worst, rho.block(k).real().diagonal().maxCoeff());
      res.observed = worst;
      res.passed = worst <= 1.0 + spec.tol;
      break;
    }
    case CheckKind::b_identity: {
      LampertiAnalysis a = decompose(t, c.p);
      if (a.status != LampertiStatus::lamperti || !a.decomposition) {
        res.detail = "decomposition failed";
        break;
      }
      res.observed = inf_norm(a.decomposition->b - AlgElement::identity(alg));
      res.passed = res.observed <= spec.tol;
      break;
    }
    case CheckKind::isometric_sampled: {
      std::mt19937_64 rng(c.seed);
      double worst = 0.0;
      for (int i = 0; i < spec.count; ++i) {
        AlgElement x = random_element(alg, rng);
        for (double p : spec.p_values)
          worst = std::max(worst, std::abs(lp_norm(t.apply(x), p) - lp_norm(x, p)));
      }
      res.observed = worst;
      res.passed = worst <= spec.tol;
      break;
    }
    case CheckKind::ergodic_stabilization: {
      std::mt19937_64 rng(c.seed);
      const double p = spec.p_values.at(0);
      double worst_increment = 0.0;
      bool monotone = true;
      for (int rep = 0; rep < 3; ++rep) {
        AlgElement x = random_psd(alg, rng);
        ErgodicReport er = maximal_ergodic_report(t, x, spec.count, p, false);
        const size_t last = er.profile_upper.size() - 1;
        worst_increment = std::max(
            worst_increment, er.profile_upper[last] - er.profile_lower[last - 1]);
        for (size_t i = 1; i < er.profile_upper.size(); ++i)
          if (er.profile_upper[i] < er.profile_lower[i - 1] - 1e-12) monotone = false;
      }
      res.observed = worst_increment;
      res.passed = monotone && worst_increment <= spec.tol;
      break;
    }
  }
  return res;
}

}  // namespace

std::vector<CheckResult> run_case(const GalleryCase& c) {
  std::vector<CheckResult> out;
  out.reserve(c.checks.size());
  for (const auto& spec : c.checks) out.push_back(run_check(c, spec));
  return out;
}

std::vector<std::string> gallery_case_names() {
  return {"example_7_2",    "jlm_k2",          "jlm_k3",           "jlm_k4",
          "schur_alternating", "schur_quarter", "random_hom_m2",    "random_antihom_m2",
          "random_mixed_m2m2", "random_hom_lp4"};
}

GalleryCase make_gallery_case(const std::string& name) {
  if (name == "example_7_2") return example_7_2();
  if (name == "jlm_k2") return jlm_operator(2, 2.0);
  if (name == "jlm_k3") return jlm_operator(3, 2.0);
  if (name == "jlm_k4") return jlm_operator(4, 2.0);
  if (name == "schur_alternating")
    return schur_mixed_unitary({Complex(1, 0), Complex(-1, 0)});
  if (name == "schur_quarter") return schur_mixed_unitary({Complex(1, 0), Complex(0, 1)});
  if (name == "random_hom_m2")
    return random_lamperti(FiniteVNA({{2, 1.0}}), 41, JordanClass::hom, true);
  if (name == "random_antihom_m2")
    return random_lamperti(FiniteVNA({{2, 1.0}}), 42, JordanClass::antihom, true);
  if (name == "random_mixed_m2m2")
    return random_lamperti(FiniteVNA({{2, 1.0}, {2, 0.5}}), 43, JordanClass::mixed, true);
  if (name == "random_hom_lp4")
    return random_lamperti(FiniteVNA({{1, 1.0}, {1, 1.0}, {1, 1.0}, {1, 1.0}}), 44,
                           JordanClass::hom, true);
  throw std::invalid_argument("unknown gallery case: " + name);
}

}  // namespace nclp
