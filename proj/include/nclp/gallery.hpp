#pragma once

#include <string>

#include "nclp/lamperti.hpp"
#include "nclp/maximal.hpp"

namespace nclp {

enum class CheckKind {
  not_lamperti_witness,   // witness = (e11, e22) with the stated violation
  involution,             // T composed with itself equals the identity
  cp,                     // Choi minimum eigenvalue >= -tol
  positivity_evidence,    // falsify_positivity returns no counterexample
  element_norm,           // ||T(element)||_p = target for each listed p
  opnorm_at_least,        // certified lower bound >= target
  contraction_opnorm,     // certified lower bound <= 1 + tol
  diagonality,            // |(Tx)_{ij}| <= tol for i != j on random PSD inputs
  decompose_class,        // decomposition succeeds with the expected class
  roundtrip_residual,     // all decomposition residuals <= tol
  cp_iff_hom,             // complete positivity matches the hom classification
  rho_contraction,        // rho <= 1 + tol
  b_identity,             // recovered b equals 1
  isometric_sampled,      // | ||Tx||_p - ||x||_p | <= tol on random inputs
  ergodic_stabilization,  // ratio(N) increments fall below tol at the last step
};

struct CheckSpec {
  CheckKind kind;
  std::string name;
  double target = 0.0;
  double tol = 1e-8;
  int count = 20;
  std::vector<double> p_values;
  std::optional<AlgElement> element;
  std::string expected_class;  // "hom" | "antihom" | "mixed"
};

struct GalleryCase {
  std::string name;
  FiniteVNA algebra;
  LpOperator op;
  double p = 2.0;
  unsigned seed = 1;
  std::vector<CheckSpec> checks;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double target = 0.0;
  double tol = 0.0;
  std::string detail;
};

/// T(x) = r x r^* on M_2 with r = [[1, 1], [0, -1]]: positive, invertible with
/// positive inverse, an involution, completely positive, yet not Lamperti and
/// not a contraction.
GalleryCase example_7_2();

/// The averaged Kraus operator on M_k built from a_i = e_ii and
/// b_i = k^(-1/(2p)) e_{1i}: a completely positive complete contraction whose
/// range lies in the diagonal subalgebra.
GalleryCase jlm_operator(int k, double p);

/// Schur multiplier with m = (z_i conj(z_j)) for unimodular z: conjugation by
/// the diagonal unitary u = sum z_i e_ii, a completely Lamperti isometry.
GalleryCase schur_mixed_unitary(const std::vector<Complex>& z);

struct RandomLamperti {
  LpOperator op;
  AlgElement w;
  AlgElement b;
  Matrix jmat;
  JordanClass requested = JordanClass::hom;
  bool contractive = true;
};

/// Sample a Lamperti operator in structured (w, b, J) form: J is a dim-matched
/// block permutation composed with per-block unitary conjugation and optional
/// transposition, b is central on the image blocks and scaled so that
/// tau(b^p J(z)) <= tau(z) on central projections when contractive.
/// `dropped_legs` removes that many blocks from the permutation, producing a
/// nontrivial kernel. Throws std::invalid_argument when the block structure
/// cannot host the requested classification.
RandomLamperti random_lamperti_operator(const FiniteVNA& algebra, unsigned seed,
                                        JordanClass cls, bool contractive, double p,
                                        bool isometric = false, int dropped_legs = 0);

GalleryCase random_lamperti(const FiniteVNA& algebra, unsigned seed, JordanClass cls,
                            bool contractive, double p = 2.0);

std::vector<CheckResult> run_case(const GalleryCase& c);

std::vector<std::string> gallery_case_names();
GalleryCase make_gallery_case(const std::string& name);

}  // namespace nclp
