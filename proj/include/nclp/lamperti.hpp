#pragma once

#include <optional>

#include "nclp/operators.hpp"

namespace nclp {

/// Raised when a stated hypothesis fails; carries the refuting pair if one
/// was located.
class hypothesis_error : public std::runtime_error {
public:
  hypothesis_error(const std::string& msg, std::optional<std::pair<AlgElement, AlgElement>> w)
      : std::runtime_error(msg), witness(std::move(w)) {}
  std::optional<std::pair<AlgElement, AlgElement>> witness;
};

/// Raised when a computed certificate fails its own consistency check.
class verification_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class JordanClass { hom, antihom, mixed };

struct LampertiResiduals {
  double reconstruction = 0.0;    // max ||T(x) - w b J(x)|| over basis
  double commutation = 0.0;       // max ||b J(x) - J(x) b|| over basis
  double jordan = 0.0;            // polarized Jordan + star residual
  double support_identity = 0.0;  // ||w^* w - J(1)|| and ||J(1) - s(b)||
};

struct LampertiDecomposition {
  AlgElement w;
  AlgElement b;
  JordanMap J;
  LampertiResiduals residuals;
  JordanClass classification = JordanClass::hom;
  /// sup_k tau(b^p J(z_k)) / tau(z_k) over minimal central projections; equals
  /// ||T||^p for a valid decomposition of a positive Lamperti operator.
  double norm_domination = 0.0;
};

struct LampertiWitness {
  AlgElement e;
  AlgElement f;
  double violation = 0.0;  // max(||(Te)^* Tf||_inf, ||Te (Tf)^*||_inf)
};

enum class LampertiStatus { lamperti, not_lamperti, indeterminate };

struct LampertiAnalysis {
  LampertiStatus status = LampertiStatus::indeterminate;
  std::optional<LampertiDecomposition> decomposition;
  std::optional<LampertiWitness> witness;
  /// Set when T(1) = 0 with T != 0, where the canonical recovery of w is
  /// unavailable and only witness search was attempted.
  bool degenerate_unit_image = false;
};

struct LampertiOptions {
  double tol = 1e-8;            // residual tolerance, scaled by the operator size
  double rank_tol_rel = 1e-10;  // eigenvalue cutoff for supports and pseudo-inverses
  int witness_trials = 32;      // random Hermitians tried during witness search
  unsigned seed = 7;
};

/// Decide the Lamperti property constructively: polar-decompose T(1) into w b,
/// recover J(x) = pinv(b) w^* T(x) on the basis, and check the four structural
/// residuals. On failure, search coordinate projection pairs and spectral
/// projections of random Hermitians for a support-separation witness.
LampertiAnalysis decompose(const LpOperator& t, double p,
                           const LampertiOptions& opts = {});

/// True iff the recovered J is multiplicative (then T is completely Lamperti,
/// and for positive T also completely positive).
bool is_completely_lamperti(const LampertiDecomposition& d, double tol = 1e-8);

/// The central density with ||T x||_p^p = tau(rho |x|^p), computed blockwise
/// as tau(b^p J(z_k)) / tau(z_k) and verified on sampled elements.
AlgElement rho_of(const LpOperator& t, double p, const LampertiDecomposition& d,
                  double verify_tol = 1e-7, unsigned seed = 11);
AlgElement rho_of(const LpOperator& t, double p, const LampertiOptions& opts = {});

struct KernelProjections {
  AlgElement p0;        // 1 - s(rho): T vanishes on p0 M p0
  AlgElement p1;        // s(rho)
  AlgElement p0_tilde;  // 1 - s(1 - rho): T is isometric on p0_tilde M p0_tilde
};

KernelProjections kernel_projections(const AlgElement& rho, double rank_tol_rel = 1e-10);
/// Convenience overload that also verifies the vanishing / isometry claims on
/// sampled elements.
KernelProjections kernel_projections(const LpOperator& t, double p,
                                     const LampertiOptions& opts = {});

struct DoublyLampertiFactorization {
  AlgElement theta;
  LpOperator S;
  AlgElement p0, p1, rho;
  std::vector<double> power_residuals;    // ||T^n - theta_n S^n||, n = 1..N
  std::vector<double> commute_residuals;  // ||theta_n S^n(x) - S^n(x) theta_n||
  std::vector<double> theta_inf_norms;    // ||theta_n||_inf
  std::vector<double> opnorm_lowers;      // certified lower bounds on ||T^n||
  double s_vanishing = 0.0;               // max ||S(p0 x p0)|| over samples
  double s_isometry_deviation = 0.0;      // max | ||S(p1 x p1)||_p - ||p1 x p1||_p |
};

/// Factor a positive Lamperti operator whose adjoint is also Lamperti as
/// T^n = theta_n S^n with S a positive Lamperti contraction, theta_n =
/// theta J(theta) ... J^{n-1}(theta). Throws hypothesis_error (with the
/// witness) when the adjoint fails to be Lamperti.
DoublyLampertiFactorization doubly_lamperti_factor(const LpOperator& t, double p,
                                                   int n_check,
                                                   const LampertiOptions& opts = {});

/// Decompose the composition of two Lamperti operators and return its
/// classification; throws verification_error if the product fails to decompose.
JordanClass lamperti_product_check(const LpOperator& t1, const LpOperator& t2, double p,
                                   const LampertiOptions& opts = {});

}  // namespace nclp
