#pragma once

#include "nclp/lamperti.hpp"

namespace nclp {

/// Raised when a requested construction exceeds the configured size budget.
class resource_error : public std::runtime_error {
public:
  resource_error(const std::string& msg, long required)
      : std::runtime_error(msg), required_dimension(required) {}
  long required_dimension = 0;
};

/// An element of the l_p-direct sum of countably many copies of L_p(M) with
/// finite support. Slots are stored explicitly; applications of the shift
/// isometry grow the support by at most one slot, so arithmetic stays exact.
class SeqElement {
public:
  SeqElement(FiniteVNA algebra, std::vector<AlgElement> slots);
  static SeqElement embed(const AlgElement& x);  // (x, 0, 0, ...)

  const FiniteVNA& algebra() const { return algebra_; }
  int slot_count() const { return static_cast<int>(slots_.size()); }
  const AlgElement& slot(int i) const { return slots_[static_cast<size_t>(i)]; }
  AlgElement head() const;  // slot 0, or zero when empty

  double lp_norm(double p) const;  // (sum_n ||x_n||_p^p)^(1/p)

private:
  FiniteVNA algebra_;
  std::vector<AlgElement> slots_;
};

/// The single-operator shift dilation of a positive-density Lamperti
/// contraction: U_T(x0, x1, ...) = (T x0, S_T x0, x1, ...) with the defect
/// S_T(x) = (1 - rho)^(1/p) x balancing ||Tx||_p^p + ||S_T x||_p^p = ||x||_p^p.
struct ShiftDilation {
  LpOperator T;
  LpOperator S_T;
  AlgElement rho;
  double p = 2.0;

  SeqElement embed(const AlgElement& x) const { return SeqElement::embed(x); }
  AlgElement compress(const SeqElement& v) const { return v.head(); }
  SeqElement apply_isometry(const SeqElement& v) const;
};

/// Build the shift dilation; requires decompose(T) to succeed with rho <= 1
/// within tolerance (the operator must be a Lamperti contraction).
ShiftDilation shift_dilation(const LpOperator& t, double p,
                             const LampertiOptions& opts = {});

/// j(U_{w_1} ... U_{w_m} i(x)) for a word of operator indices; if residual is
/// non-null it receives || result - T_{w_1} ... T_{w_m}(x) ||_p.
AlgElement simultaneous_apply(const std::vector<ShiftDilation>& systems,
                              const std::vector<int>& word, const AlgElement& x,
                              double* residual = nullptr);

struct TensorDilationOptions {
  long max_total_dim = 1000000;
  /// When false, strictly contractive inputs are used as-is (diagnostic mode:
  /// the dilation space operator is then not an isometry).
  bool lift_non_isometric = true;
  LampertiOptions lamperti;
};

/// The N-dilation of a convex combination sum lambda_i T_i over the space
/// Y = l_p^{n^N}( l_p^N( X ) ), where X is L_p(M) when every T_i is already
/// isometric and otherwise the (N+1)-slot truncation of the shift-dilation
/// space of each lifted T_i. Vectors of Y are held flat in block order
/// (tuple-major, then cycle position, then inner slot, then element coords).
class TensorDilation {
public:
  TensorDilation(std::vector<double> lambda, std::vector<LpOperator> ops, int n_steps,
                 double p, const TensorDilationOptions& opts);

  const FiniteVNA& algebra() const { return algebra_; }
  int cycle_length() const { return n_steps_; }
  double exponent() const { return p_; }
  bool lifted() const { return lifted_; }
  int inner_slots() const { return inner_slots_; }
  long total_dim() const { return total_dim_; }
  const std::vector<double>& lambda() const { return lambda_; }
  const std::vector<LpOperator>& operators() const { return ops_; }
  LpOperator average() const;

  Vector embed(const AlgElement& x) const;       // J
  AlgElement compress(const Vector& v) const;    // Q
  Vector apply_isometry(const Vector& v) const;  // U

  double lp_norm_Y(const Vector& v) const;
  /// Random Y vector inside the exact isometric domain (last inner slot zero
  /// when lifted); `positive` requests slot-wise PSD components.
  Vector sample(std::mt19937_64& rng, bool positive = false) const;
  bool slotwise_psd(const Vector& v, double tol = 1e-9) const;

  /// Dense D x D matrix of Q U^m J assembled column-by-column.
  Matrix compressed_power(int m) const;

private:
  AlgElement inner_component(const Vector& v, long tuple, int k, int slot) const;
  void set_inner_component(Vector& v, long tuple, int k, int slot,
                           const AlgElement& x) const;
  void apply_inner_op(int op, const Vector& in, long tuple_in, int k_in, Vector& out,
                      long tuple_out, int k_out) const;

  FiniteVNA algebra_;
  std::vector<double> lambda_;
  std::vector<LpOperator> ops_;
  std::vector<ShiftDilation> lifts_;
  int n_steps_ = 0;
  double p_ = 2.0;
  bool lifted_ = false;
  int inner_slots_ = 1;
  long tuple_count_ = 0;
  long total_dim_ = 0;
};

TensorDilation convex_n_dilation(const std::vector<double>& lambda,
                                 const std::vector<LpOperator>& ops, int n_steps,
                                 double p, const TensorDilationOptions& opts = {});

struct TensorVerification {
  std::vector<double> residuals;  // ||T^m - Q U^m J||, m = 0..N
  double qj_identity = 0.0;       // ||Q J - I||
  double isometry_deviation = 0.0;
  long total_dim = 0;
};

TensorVerification verify_tensor_dilation(const TensorDilation& sys, int samples,
                                          unsigned seed);

double verify_isometry(const ShiftDilation& sys, int samples, unsigned seed);
double verify_isometry(const TensorDilation& sys, int samples, unsigned seed);

}  // namespace nclp
