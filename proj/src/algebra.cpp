#include "nclp/algebra.hpp"

#include <algorithm>
#include <cmath>

namespace nclp {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> herm_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("algebra: Hermitian eigendecomposition failed");
  return es;
}

}  // namespace

FiniteVNA::FiniteVNA(std::vector<BlockSpec> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw std::invalid_argument("FiniteVNA: no blocks");
  offsets_.reserve(blocks_.size());
  embed_offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.dim < 1) throw std::invalid_argument("FiniteVNA: block dim must be >= 1");
    if (!(b.weight > 0.0) || !std::isfinite(b.weight))
      throw std::invalid_argument("FiniteVNA: block weight must be positive and finite");
    offsets_.push_back(element_dim_);
    embed_offsets_.push_back(total_dim_);
    element_dim_ += b.dim * b.dim;
    total_dim_ += b.dim;
  }
}

double FiniteVNA::trace_of_identity() const {
  double t = 0.0;
  for (const auto& b : blocks_) t += b.weight * b.dim;
  return t;
}

bool FiniteVNA::same_structure(const FiniteVNA& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (size_t k = 0; k < blocks_.size(); ++k)
    if (blocks_[k].dim != other.blocks_[k].dim || blocks_[k].weight != other.blocks_[k].weight)
      return false;
  return true;
}

AlgElement::AlgElement(FiniteVNA algebra, std::vector<Matrix> blocks)
    : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != algebra_.block_count())
    throw shape_error("AlgElement: block count mismatch");
  for (int k = 0; k < algebra_.block_count(); ++k) {
    const auto& m = blocks_[static_cast<size_t>(k)];
    if (m.rows() != algebra_.dim(k) || m.cols() != algebra_.dim(k))
      throw shape_error("AlgElement: block shape mismatch");
  }
}

AlgElement AlgElement::zero(const FiniteVNA& algebra) {
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(algebra.block_count()));
  for (int k = 0; k < algebra.block_count(); ++k)
    blocks.push_back(Matrix::Zero(algebra.dim(k), algebra.dim(k)));
  return AlgElement(algebra, std::move(blocks));
}

AlgElement AlgElement::identity(const FiniteVNA& algebra) {
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(algebra.block_count()));
  for (int k = 0; k < algebra.block_count(); ++k)
    blocks.push_back(Matrix::Identity(algebra.dim(k), algebra.dim(k)));
  return AlgElement(algebra, std::move(blocks));
}

AlgElement AlgElement::matrix_unit(const FiniteVNA& algebra, int k, int r, int c) {
  if (k < 0 || k >= algebra.block_count() || r < 0 || r >= algebra.dim(k) || c < 0 ||
      c >= algebra.dim(k))
    throw shape_error("matrix_unit: index out of range");
  AlgElement e = zero(algebra);
  e.blocks_[static_cast<size_t>(k)](r, c) = Complex(1.0, 0.0);
  return e;
}

AlgElement AlgElement::adjoint() const {
  std::vector<Matrix> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& m : blocks_) blocks.push_back(m.adjoint());
  return AlgElement(algebra_, std::move(blocks));
}

AlgElement AlgElement::transpose_blocks() const {
  std::vector<Matrix> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& m : blocks_) blocks.push_back(m.transpose());
  return AlgElement(algebra_, std::move(blocks));
}

namespace {
void require_same(const AlgElement& a, const AlgElement& b) {
  if (!a.algebra().same_structure(b.algebra()))
    throw shape_error("AlgElement: incompatible algebras");
}
}  // namespace

AlgElement operator+(const AlgElement& a, const AlgElement& b) {
  require_same(a, b);
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(a.block_count()));
  for (int k = 0; k < a.block_count(); ++k) blocks.push_back(a.block(k) + b.block(k));
  return AlgElement(a.algebra(), std::move(blocks));
}

AlgElement operator-(const AlgElement& a, const AlgElement& b) {
  require_same(a, b);
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(a.block_count()));
  for (int k = 0; k < a.block_count(); ++k) blocks.push_back(a.block(k) - b.block(k));
  return AlgElement(a.algebra(), std::move(blocks));
}

AlgElement operator*(const AlgElement& a, const AlgElement& b) {
  require_same(a, b);
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(a.block_count()));
  for (int k = 0; k < a.block_count(); ++k) blocks.push_back(a.block(k) * b.block(k));
  return AlgElement(a.algebra(), std::move(blocks));
}

AlgElement operator*(Complex s, const AlgElement& a) {
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(a.block_count()));
  for (int k = 0; k < a.block_count(); ++k) blocks.push_back(s * a.block(k));
  return AlgElement(a.algebra(), std::move(blocks));
}

AlgElement operator*(double s, const AlgElement& a) { return Complex(s, 0.0) * a; }

AlgElement AlgElement::operator-() const { return Complex(-1.0, 0.0) * *this; }

double AlgElement::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

Vector vectorize(const AlgElement& x) {
  const auto& alg = x.algebra();
  Vector v(alg.element_dim());
  for (int k = 0; k < alg.block_count(); ++k) {
    const int n = alg.dim(k), off = alg.block_offset(k);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) v[off + r * n + c] = x.block(k)(r, c);
  }
  return v;
}

AlgElement devectorize(const FiniteVNA& algebra, const Vector& v) {
  if (v.size() != algebra.element_dim())
    throw shape_error("devectorize: coordinate length mismatch");
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(algebra.block_count()));
  for (int k = 0; k < algebra.block_count(); ++k) {
    const int n = algebra.dim(k), off = algebra.block_offset(k);
    Matrix m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = v[off + r * n + c];
    blocks.push_back(std::move(m));
  }
  return AlgElement(algebra, std::move(blocks));
}

Complex trace(const AlgElement& x) {
  Complex t(0.0, 0.0);
  for (int k = 0; k < x.block_count(); ++k) t += x.algebra().weight(k) * x.block(k).trace();
  return t;
}

Complex trace_pair(const AlgElement& x, const AlgElement& y) { return trace(x * y); }

double lp_norm(const AlgElement& x, double p) {
  if (!(p >= 1.0)) throw std::domain_error("lp_norm: requires p >= 1");
  if (std::isinf(p)) return inf_norm(x);
  double acc = 0.0;
  for (int k = 0; k < x.block_count(); ++k) {
    Eigen::JacobiSVD<Matrix> svd(x.block(k));
    const auto& sv = svd.singularValues();
    double s = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) s += std::pow(sv[i], p);
    acc += x.algebra().weight(k) * s;
  }
  return std::pow(acc, 1.0 / p);
}

double inf_norm(const AlgElement& x) {
  double m = 0.0;
  for (int k = 0; k < x.block_count(); ++k) {
    Eigen::JacobiSVD<Matrix> svd(x.block(k));
    if (svd.singularValues().size() > 0) m = std::max(m, svd.singularValues()[0]);
  }
  return m;
}

bool is_hermitian(const AlgElement& x, double tol) {
  for (int k = 0; k < x.block_count(); ++k)
    if ((x.block(k) - x.block(k).adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

bool is_psd(const AlgElement& x, double tol) {
  if (!is_hermitian(x, tol)) return false;
  for (int k = 0; k < x.block_count(); ++k) {
    auto es = herm_eig(0.5 * (x.block(k) + x.block(k).adjoint()));
    if (es.eigenvalues().minCoeff() < -tol) return false;
  }
  return true;
}

bool is_projection(const AlgElement& x, double tol) {
  if (!is_hermitian(x, tol)) return false;
  return inf_norm(x * x - x) <= tol;
}

bool is_partial_isometry(const AlgElement& x, double tol) {
  return is_projection(x.adjoint() * x, tol);
}

AlgElement funcalc(const AlgElement& x, const std::function<double(double)>& f,
                   double herm_tol) {
  const double scale = std::max(x.max_abs(), 1.0);
  if (!is_hermitian(x, herm_tol * scale))
    throw std::domain_error("funcalc: input is not Hermitian");
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<size_t>(x.block_count()));
  for (int k = 0; k < x.block_count(); ++k) {
    auto es = herm_eig(0.5 * (x.block(k) + x.block(k).adjoint()));
    Eigen::VectorXd vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = f(vals[i]);
    blocks.push_back(es.eigenvectors() * vals.asDiagonal().toDenseMatrix().cast<Complex>() *
                     es.eigenvectors().adjoint());
  }
  return AlgElement(x.algebra(), std::move(blocks));
}

AlgElement abs_element(const AlgElement& x) {
  AlgElement xx = x.adjoint() * x;
  return funcalc(xx, [](double t) { return std::sqrt(std::max(t, 0.0)); });
}

AlgElement support(const AlgElement& x, double rank_tol_rel) {
  const double scale = std::max(x.max_abs(), 0.0);
  if (!is_psd(x, 1e-8 * std::max(scale, 1.0)))
    throw std::domain_error("support: input is not PSD");
  const double cut = rank_tol_rel * std::max(scale, 1e-300);
  return funcalc(x, [cut](double t) { return t > cut ? 1.0 : 0.0; });
}

AlgElement psd_pinv(const AlgElement& x, double rank_tol_rel) {
  const double scale = std::max(x.max_abs(), 0.0);
  const double cut = rank_tol_rel * std::max(scale, 1e-300);
  return funcalc(x, [cut](double t) { return t > cut ? 1.0 / t : 0.0; });
}

PolarDecomposition polar(const AlgElement& x, double rank_tol_rel) {
  std::vector<Matrix> wblocks, bblocks;
  wblocks.reserve(static_cast<size_t>(x.block_count()));
  bblocks.reserve(static_cast<size_t>(x.block_count()));
  for (int k = 0; k < x.block_count(); ++k) {
    Eigen::JacobiSVD<Matrix> svd(x.block(k), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = rank_tol_rel * std::max(sv.size() > 0 ? sv[0] : 0.0, 1e-300);
    const int n = x.algebra().dim(k);
    Matrix w = Matrix::Zero(n, n);
    Matrix b = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      b += Complex(sv[i], 0.0) * svd.matrixV().col(i) * svd.matrixV().col(i).adjoint();
      if (sv[i] > cut)
        w += svd.matrixU().col(i) * svd.matrixV().col(i).adjoint();
    }
    wblocks.push_back(std::move(w));
    bblocks.push_back(std::move(b));
  }
  return PolarDecomposition{AlgElement(x.algebra(), std::move(wblocks)),
                            AlgElement(x.algebra(), std::move(bblocks))};
}

std::vector<AlgElement> center_basis(const FiniteVNA& algebra) {
  std::vector<AlgElement> zs;
  zs.reserve(static_cast<size_t>(algebra.block_count()));
  for (int k = 0; k < algebra.block_count(); ++k) {
    std::vector<Matrix> blocks;
    for (int l = 0; l < algebra.block_count(); ++l)
      blocks.push_back(l == k ? Matrix(Matrix::Identity(algebra.dim(l), algebra.dim(l)))
                              : Matrix(Matrix::Zero(algebra.dim(l), algebra.dim(l))));
    zs.emplace_back(algebra, std::move(blocks));
  }
  return zs;
}

}  // namespace nclp
