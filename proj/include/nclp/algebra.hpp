#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace nclp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Thrown when two objects live over incompatible block structures.
class shape_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct BlockSpec {
  int dim = 1;
  double weight = 1.0;
};

/// A finite von Neumann algebra modelled as a direct sum of full matrix
/// blocks M_{n_1} ⊕ ... ⊕ M_{n_m}, with trace tau(x) = sum_k weight_k Tr(x_k).
/// All dims are >= 1 and all weights > 0, so tau is finite and faithful.
class FiniteVNA {
public:
  explicit FiniteVNA(std::vector<BlockSpec> blocks);

  int block_count() const { return static_cast<int>(blocks_.size()); }
  int dim(int k) const { return blocks_[static_cast<size_t>(k)].dim; }
  double weight(int k) const { return blocks_[static_cast<size_t>(k)].weight; }
  const std::vector<BlockSpec>& blocks() const { return blocks_; }

  /// N = sum of block dims (size of the containing full matrix algebra).
  int total_dim() const { return total_dim_; }
  /// D = sum of dim_k^2, the dimension of the vectorized element space.
  int element_dim() const { return element_dim_; }
  /// Offset of block k into vectorized coordinates (block-major layout).
  int block_offset(int k) const { return offsets_[static_cast<size_t>(k)]; }
  /// Offset of block k into the N x N embedding.
  int embed_offset(int k) const { return embed_offsets_[static_cast<size_t>(k)]; }

  double trace_of_identity() const;
  bool same_structure(const FiniteVNA& other) const;

private:
  std::vector<BlockSpec> blocks_;
  std::vector<int> offsets_;
  std::vector<int> embed_offsets_;
  int total_dim_ = 0;
  int element_dim_ = 0;
};

/// An element of the algebra (equivalently of every L_p over it): one complex
/// dim_k x dim_k matrix per block. Immutable value type.
class AlgElement {
public:
  AlgElement(FiniteVNA algebra, std::vector<Matrix> blocks);

  static AlgElement zero(const FiniteVNA& algebra);
  static AlgElement identity(const FiniteVNA& algebra);
  /// Matrix unit E_{rc} of block k, zero elsewhere.
  static AlgElement matrix_unit(const FiniteVNA& algebra, int k, int r, int c);

  const FiniteVNA& algebra() const { return algebra_; }
  const Matrix& block(int k) const { return blocks_[static_cast<size_t>(k)]; }
  int block_count() const { return static_cast<int>(blocks_.size()); }

  AlgElement adjoint() const;
  AlgElement transpose_blocks() const;

  friend AlgElement operator+(const AlgElement& a, const AlgElement& b);
  friend AlgElement operator-(const AlgElement& a, const AlgElement& b);
  friend AlgElement operator*(const AlgElement& a, const AlgElement& b);
  friend AlgElement operator*(Complex s, const AlgElement& a);
  friend AlgElement operator*(double s, const AlgElement& a);
  AlgElement operator-() const;

  /// Largest absolute entry, a cheap scale estimate.
  double max_abs() const;

private:
  FiniteVNA algebra_;
  std::vector<Matrix> blocks_;
};

/// Vectorization is block-major and row-major within each block:
/// vec(x)[offset_k + r * dim_k + c] = x_k(r, c). Every dense operator matrix
/// in this library acts on coordinates in exactly this order.
Vector vectorize(const AlgElement& x);
AlgElement devectorize(const FiniteVNA& algebra, const Vector& v);

/// tau(x) = sum_k weight_k Tr(x_k).
Complex trace(const AlgElement& x);
/// tau(x y), the bilinear (not sesquilinear) duality pairing.
Complex trace_pair(const AlgElement& x, const AlgElement& y);

/// Schatten p-norm with trace weights: tau(|x|^p)^(1/p) for p < inf,
/// largest singular value for p = inf. Requires p >= 1.
double lp_norm(const AlgElement& x, double p);
double inf_norm(const AlgElement& x);

bool is_hermitian(const AlgElement& x, double tol = 1e-10);
bool is_psd(const AlgElement& x, double tol = 1e-10);
bool is_projection(const AlgElement& x, double tol = 1e-10);
bool is_partial_isometry(const AlgElement& x, double tol = 1e-10);

/// Spectral functional calculus of a Hermitian element: eigendecompose each
/// block, apply f to the eigenvalues, reassemble. Throws std::domain_error on
/// non-Hermitian input.
AlgElement funcalc(const AlgElement& x, const std::function<double(double)>& f,
                   double herm_tol = 1e-8);

/// |x| = (x^* x)^(1/2).
AlgElement abs_element(const AlgElement& x);

/// Support projection s(x) of a PSD element: the spectral projection onto
/// ran(x). Eigenvalues below rank_tol_rel * lambda_max count as zero.
AlgElement support(const AlgElement& x, double rank_tol_rel = 1e-10);

/// Moore-Penrose inverse of a PSD element via t -> 1/t on t > cutoff.
AlgElement psd_pinv(const AlgElement& x, double rank_tol_rel = 1e-10);

struct PolarDecomposition {
  AlgElement w;  // partial isometry with w^* w = s(b)
  AlgElement b;  // |x|
};

/// x = w b with b = |x| and w^* w = s(b); computed per block from the SVD.
PolarDecomposition polar(const AlgElement& x, double rank_tol_rel = 1e-10);

/// Minimal central projections z_k (the block identities); they sum to 1.
std::vector<AlgElement> center_basis(const FiniteVNA& algebra);

}  // namespace nclp
