#pragma once

#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "nclp/algebra.hpp"

namespace nclp {

struct KrausForm {
  std::vector<AlgElement> a;
  std::vector<AlgElement> b;
};  // T(x) = sum_i a_i^* x b_i

struct ConjugationForm {
  AlgElement r;
};  // T(x) = r x r^*

struct SchurForm {
  AlgElement m;
};  // (T x)_k = m_k .* x_k entrywise

struct WbjForm {
  AlgElement w;
  AlgElement b;
  Matrix j;  // dense matrix of the Jordan map on vectorized coordinates
};  // T(x) = w b J(x)

struct GenericForm {};

using StructuredForm =
    std::variant<GenericForm, KrausForm, ConjugationForm, SchurForm, WbjForm>;

/// A linear map on L_p(M), held as a dense D x D matrix over the vectorized
/// element space (block-major, row-major within block). A structured form tag
/// is kept when the operator was built from one; the dense matrix is always
/// authoritative and agrees with the structured action on the basis.
class LpOperator {
public:
  LpOperator(FiniteVNA algebra, Matrix mat, StructuredForm form = GenericForm{});

  static LpOperator identity(const FiniteVNA& algebra);
  static LpOperator zero(const FiniteVNA& algebra);
  static LpOperator from_dense(const FiniteVNA& algebra, Matrix mat);
  static LpOperator from_kraus(std::vector<AlgElement> a, std::vector<AlgElement> b);
  static LpOperator from_conjugation(AlgElement r);
  static LpOperator from_schur(AlgElement m);
  static LpOperator from_wbj(const AlgElement& w, const AlgElement& b, const Matrix& j);
  /// Blockwise transpose as a map; Lamperti with J = transpose.
  static LpOperator transpose_map(const FiniteVNA& algebra);
  /// Left multiplication x -> v x.
  static LpOperator left_multiplication(const AlgElement& v);

  const FiniteVNA& algebra() const { return algebra_; }
  const Matrix& matrix() const { return mat_; }
  const StructuredForm& form() const { return form_; }
  bool has_structured_form() const {
    return !std::holds_alternative<GenericForm>(form_);
  }

  AlgElement apply(const AlgElement& x) const;

private:
  FiniteVNA algebra_;
  Matrix mat_;
  StructuredForm form_;
};

/// Dense D x D matrix of a linear action, assembled column-by-column on the
/// matrix-unit basis.
Matrix dense_matrix_of(const FiniteVNA& algebra,
                       const std::function<AlgElement(const AlgElement&)>& action);

/// Trace-duality adjoint: tau(T(x) y) = tau(x T*(y)) for the bilinear pairing.
/// Structured forms are carried through where the adjoint stays in the family.
LpOperator adjoint(const LpOperator& t);

LpOperator compose(const LpOperator& s, const LpOperator& t);
LpOperator scale(Complex alpha, const LpOperator& t);
LpOperator power(const LpOperator& t, int n);

/// Convex combination sum lambda_i T_i; requires lambda_i >= 0 summing to 1.
LpOperator convex_combine(const std::vector<double>& lambda,
                          const std::vector<LpOperator>& ops);

struct ChoiReport {
  bool is_cp = false;
  double min_eig = 0.0;
  double herm_residual = 0.0;  // departure of the Choi matrix from Hermitian
};

/// Complete positivity via the Choi matrix of T composed with the
/// block-diagonal conditional expectation of the containing M_N, N = sum dims.
/// T is CP iff that composition is CP iff the Choi matrix is PSD.
ChoiReport choi_cp_check(const LpOperator& t, double tol = 1e-10);

/// Randomized positivity falsifier: samples Wishart-style PSD elements and
/// returns the first x whose image has an eigenvalue below -tol, else nullopt.
/// A nullopt is evidence only, except when choi_cp_check already passes.
std::optional<AlgElement> falsify_positivity(const LpOperator& t, int trials,
                                             unsigned seed, double tol = 1e-9);

struct OpNormEstimate {
  double lower = 0.0;
  AlgElement witness;
};

/// Certified lower bound on ||T||_{Lp->Lp} by nonlinear power iteration from
/// deterministic starts (identity, block coordinate projections) plus seeded
/// random starts. The returned witness x satisfies ||T x||_p >= lower * ||x||_p
/// up to roundoff; the bound is re-evaluated directly before returning.
OpNormEstimate opnorm_lower(const LpOperator& t, double p, int iterations = 60,
                            unsigned seed = 1);

/// Residual profile of a candidate Jordan map held as a dense matrix.
struct JordanMap {
  FiniteVNA algebra;
  Matrix mat;
  double star_residual = 0.0;     // max ||J(x^*) - J(x)^*|| over basis
  double jordan_residual = 0.0;   // max ||J(xy+yx) - J(x)J(y) - J(y)J(x)||
  double hom_residual = 0.0;      // max ||J(xy) - J(x)J(y)||
  double antihom_residual = 0.0;  // max ||J(xy) - J(y)J(x)||
  bool is_hom = false;
  bool is_antihom = false;
  bool is_jordan = false;

  AlgElement apply(const AlgElement& x) const;
};

/// Evaluate the residuals above on all basis pairs (both identities polarize
/// to bilinear ones, so basis coverage is exhaustive).
JordanMap analyze_jordan(const FiniteVNA& algebra, const Matrix& j, double tol = 1e-8);

/// Random generators used across tests and the gallery; all take explicit
/// seeds and are deterministic.
Matrix random_ginibre(int n, std::mt19937_64& rng);
AlgElement random_element(const FiniteVNA& algebra, std::mt19937_64& rng);
AlgElement random_hermitian(const FiniteVNA& algebra, std::mt19937_64& rng);
AlgElement random_psd(const FiniteVNA& algebra, std::mt19937_64& rng);
AlgElement random_unitary(const FiniteVNA& algebra, std::mt19937_64& rng);

}  // namespace nclp
