#include "nclp/operators.hpp"

#include <cmath>
#include <random>

namespace nclp {

namespace {

int swap_index(const FiniteVNA& alg, int idx) {
  for (int k = 0; k < alg.block_count(); ++k) {
    const int off = alg.block_offset(k), n = alg.dim(k);
    if (idx < off + n * n) {
      const int r = (idx - off) / n, c = (idx - off) % n;
      return off + c * n + r;
    }
  }
  throw shape_error("swap_index: out of range");
}

double weight_of_index(const FiniteVNA& alg, int idx) {
  for (int k = 0; k < alg.block_count(); ++k) {
    const int off = alg.block_offset(k), n = alg.dim(k);
    if (idx < off + n * n) return alg.weight(k);
  }
  throw shape_error("weight_of_index: out of range");
}

}  // namespace

Matrix dense_matrix_of(const FiniteVNA& alg,
                       const std::function<AlgElement(const AlgElement&)>& action) {
  const int d = alg.element_dim();
  Matrix m(d, d);
  for (int k = 0; k < alg.block_count(); ++k) {
    const int n = alg.dim(k), off = alg.block_offset(k);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        m.col(off + r * n + c) = vectorize(action(AlgElement::matrix_unit(alg, k, r, c)));
  }
  return m;
}

namespace {
Matrix dense_from_action(const FiniteVNA& alg,
                         const std::function<AlgElement(const AlgElement&)>& action) {
  return dense_matrix_of(alg, action);
}
}  // namespace

LpOperator::LpOperator(FiniteVNA algebra, Matrix mat, StructuredForm form)
    : algebra_(std::move(algebra)), mat_(std::move(mat)), form_(std::move(form)) {
  const int d = algebra_.element_dim();
  if (mat_.rows() != d || mat_.cols() != d)
    throw shape_error("LpOperator: dense matrix must be D x D");
}

LpOperator LpOperator::identity(const FiniteVNA& algebra) {
  const int d = algebra.element_dim();
  return LpOperator(algebra, Matrix::Identity(d, d));
}

LpOperator LpOperator::zero(const FiniteVNA& algebra) {
  const int d = algebra.element_dim();
  return LpOperator(algebra, Matrix::Zero(d, d));
}

LpOperator LpOperator::from_dense(const FiniteVNA& algebra, Matrix mat) {
  return LpOperator(algebra, std::move(mat));
}

LpOperator LpOperator::from_kraus(std::vector<AlgElement> a, std::vector<AlgElement> b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("from_kraus: need equally many a_i and b_i");
  const FiniteVNA alg = a.front().algebra();
  for (const auto& e : a)
    if (!e.algebra().same_structure(alg)) throw shape_error("from_kraus: mixed algebras");
  for (const auto& e : b)
    if (!e.algebra().same_structure(alg)) throw shape_error("from_kraus: mixed algebras");
  auto action = [&](const AlgElement& x) {
    AlgElement y = AlgElement::zero(alg);
    for (size_t i = 0; i < a.size(); ++i) y = y + a[i].adjoint() * x * b[i];
    return y;
  };
  Matrix m = dense_from_action(alg, action);
  return LpOperator(alg, std::move(m), KrausForm{std::move(a), std::move(b)});
}

LpOperator LpOperator::from_conjugation(AlgElement r) {
  const FiniteVNA alg = r.algebra();
  auto action = [&](const AlgElement& x) { return r * x * r.adjoint(); };
  Matrix m = dense_from_action(alg, action);
  return LpOperator(alg, std::move(m), ConjugationForm{std::move(r)});
}

LpOperator LpOperator::from_schur(AlgElement mult) {
  const FiniteVNA alg = mult.algebra();
  auto action = [&](const AlgElement& x) {
    std::vector<Matrix> blocks;
    for (int k = 0; k < alg.block_count(); ++k)
      blocks.push_back(mult.block(k).cwiseProduct(x.block(k)));
    return AlgElement(alg, std::move(blocks));
  };
  Matrix m = dense_from_action(alg, action);
  return LpOperator(alg, std::move(m), SchurForm{std::move(mult)});
}

LpOperator LpOperator::from_wbj(const AlgElement& w, const AlgElement& b, const Matrix& j) {
  const FiniteVNA& alg = w.algebra();
  if (!b.algebra().same_structure(alg)) throw shape_error("from_wbj: mixed algebras");
  if (j.rows() != alg.element_dim() || j.cols() != alg.element_dim())
    throw shape_error("from_wbj: Jordan matrix must be D x D");
  auto action = [&](const AlgElement& x) { return w * b * devectorize(alg, j * vectorize(x)); };
  Matrix m = dense_from_action(alg, action);
  return LpOperator(alg, std::move(m), WbjForm{w, b, j});
}

LpOperator LpOperator::transpose_map(const FiniteVNA& algebra) {
  Matrix m = dense_from_action(algebra,
                               [](const AlgElement& x) { return x.transpose_blocks(); });
  return LpOperator(algebra, std::move(m));
}

LpOperator LpOperator::left_multiplication(const AlgElement& v) {
  Matrix m = dense_from_action(v.algebra(), [&](const AlgElement& x) { return v * x; });
  return LpOperator(v.algebra(), std::move(m));
}

AlgElement LpOperator::apply(const AlgElement& x) const {
  if (!x.algebra().same_structure(algebra_))
    throw shape_error("LpOperator::apply: algebra mismatch");
  return devectorize(algebra_, mat_ * vectorize(x));
}

LpOperator adjoint(const LpOperator& t) {
  const FiniteVNA& alg = t.algebra();
  const int d = alg.element_dim();
  Matrix b(d, d);
  // tau(T(x) y) = tau(x T*(y)) in the bilinear pairing tau(xy) forces
  // B[i, j] = (w(j) / w(i)) * A[swap(j), swap(i)], swap = within-block transpose.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      b(i, j) = (weight_of_index(alg, j) / weight_of_index(alg, i)) *
                t.matrix()(swap_index(alg, j), swap_index(alg, i));

  StructuredForm form = GenericForm{};
  if (const auto* c = std::get_if<ConjugationForm>(&t.form())) {
    form = ConjugationForm{c->r.adjoint()};
  } else if (const auto* k = std::get_if<KrausForm>(&t.form())) {
    // adjoint of sum a_i^* x b_i is sum (b_i^*)^* y (a_i^*)
    std::vector<AlgElement> na, nb;
    for (size_t i = 0; i < k->a.size(); ++i) {
      na.push_back(k->b[i].adjoint());
      nb.push_back(k->a[i].adjoint());
    }
    form = KrausForm{std::move(na), std::move(nb)};
  } else if (const auto* s = std::get_if<SchurForm>(&t.form())) {
    form = SchurForm{s->m.transpose_blocks()};
  }
  return LpOperator(alg, std::move(b), std::move(form));
}

LpOperator compose(const LpOperator& s, const LpOperator& t) {
  if (!s.algebra().same_structure(t.algebra()))
    throw shape_error("compose: algebra mismatch");
  StructuredForm form = GenericForm{};
  const auto* cs = std::get_if<ConjugationForm>(&s.form());
  const auto* ct = std::get_if<ConjugationForm>(&t.form());
  if (cs && ct) form = ConjugationForm{cs->r * ct->r};
  return LpOperator(s.algebra(), s.matrix() * t.matrix(), std::move(form));
}

LpOperator scale(Complex alpha, const LpOperator& t) {
  return LpOperator(t.algebra(), alpha * t.matrix());
}

LpOperator power(const LpOperator& t, int n) {
  if (n < 0) throw std::invalid_argument("power: negative exponent");
  LpOperator acc = LpOperator::identity(t.algebra());
  for (int i = 0; i < n; ++i) acc = compose(t, acc);
  return acc;
}

LpOperator convex_combine(const std::vector<double>& lambda,
                          const std::vector<LpOperator>& ops) {
  if (lambda.size() != ops.size() || ops.empty())
    throw std::invalid_argument("convex_combine: weight/operator count mismatch");
  double sum = 0.0;
  for (double l : lambda) {
    if (l < 0.0) throw std::domain_error("convex_combine: negative weight");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::domain_error("convex_combine: weights must sum to 1");
  const FiniteVNA& alg = ops.front().algebra();
  Matrix m = Matrix::Zero(alg.element_dim(), alg.element_dim());
  for (size_t i = 0; i < ops.size(); ++i) {
    if (!ops[i].algebra().same_structure(alg))
      throw shape_error("convex_combine: algebra mismatch");
    m += lambda[i] * ops[i].matrix();
  }
  return LpOperator(alg, std::move(m));
}

ChoiReport choi_cp_check(const LpOperator& t, double tol) {
  const FiniteVNA& alg = t.algebra();
  const int n = alg.total_dim();
  Matrix choi = Matrix::Zero(n * n, n * n);
  // Choi matrix of T o E, where E is the block-diagonal conditional
  // expectation of M_N: grid block (i, j) holds (T o E)(E_ij) embedded in M_N.
  for (int k = 0; k < alg.block_count(); ++k) {
    const int nk = alg.dim(k), ek = alg.embed_offset(k);
    for (int r = 0; r < nk; ++r)
      for (int c = 0; c < nk; ++c) {
        AlgElement img = t.apply(AlgElement::matrix_unit(alg, k, r, c));
        const int gi = ek + r, gj = ek + c;
        for (int l = 0; l < alg.block_count(); ++l) {
          const int nl = alg.dim(l), el = alg.embed_offset(l);
          choi.block(gi * n + el, gj * n + el, nl, nl) += img.block(l);
        }
      }
  }
  ChoiReport rep;
  rep.herm_residual = (choi - choi.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (choi + choi.adjoint()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("choi_cp_check: eigendecomposition failed");
  rep.min_eig = es.eigenvalues().minCoeff();
  rep.is_cp = rep.min_eig >= -tol && rep.herm_residual <= tol;
  return rep;
}

Matrix random_ginibre(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = Complex(g(rng), g(rng));
  return m;
}

AlgElement random_element(const FiniteVNA& algebra, std::mt19937_64& rng) {
  std::vector<Matrix> blocks;
  for (int k = 0; k < algebra.block_count(); ++k)
    blocks.push_back(random_ginibre(algebra.dim(k), rng));
  return AlgElement(algebra, std::move(blocks));
}

AlgElement random_hermitian(const FiniteVNA& algebra, std::mt19937_64& rng) {
  AlgElement g = random_element(algebra, rng);
  return 0.5 * (g + g.adjoint());
}

AlgElement random_psd(const FiniteVNA& algebra, std::mt19937_64& rng) {
  AlgElement g = random_element(algebra, rng);
  return g.adjoint() * g;
}

AlgElement random_unitary(const FiniteVNA& algebra, std::mt19937_64& rng) {
  std::vector<Matrix> blocks;
  for (int k = 0; k < algebra.block_count(); ++k) {
    Matrix g = random_ginibre(algebra.dim(k), rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < algebra.dim(k); ++i) {
      Complex d = r(i, i);
      q.col(i) *= (std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0, 0.0));
    }
    blocks.push_back(std::move(q));
  }
  return AlgElement(algebra, std::move(blocks));
}

std::optional<AlgElement> falsify_positivity(const LpOperator& t, int trials,
                                             unsigned seed, double tol) {
  if (trials < 1) throw std::invalid_argument("falsify_positivity: trials >= 1");
  std::mt19937_64 rng(seed);
  for (int i = 0; i < trials; ++i) {
    AlgElement x = random_psd(t.algebra(), rng);
    const double nx = inf_norm(x);
    if (nx > 0) x = (1.0 / nx) * x;
    AlgElement y = t.apply(x);
    const double scale = std::max(1.0, y.max_abs());
    bool bad = false;
    for (int k = 0; k < y.block_count() && !bad; ++k) {
      Matrix h = 0.5 * (y.block(k) + y.block(k).adjoint());
      Matrix a = 0.5 * (y.block(k) - y.block(k).adjoint());
      if (a.cwiseAbs().maxCoeff() > tol * scale) bad = true;
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      if (es.eigenvalues().minCoeff() < -tol * scale) bad = true;
    }
    if (bad) return x;
  }
  return std::nullopt;
}

namespace {

// Norming element of y in the bilinear pairing: tau(y g) = ||y||_p, ||g||_p' = 1.
AlgElement norming_element(const AlgElement& y, double p) {
  auto pd = polar(y);
  AlgElement ypow = funcalc(pd.b, [p](double s) { return std::pow(std::max(s, 0.0), p - 1.0); });
  const double np = lp_norm(y, p);
  const double pp = p / (p - 1.0);
  return std::pow(np, -p / pp) * (ypow * pd.w.adjoint());
}

}  // namespace

OpNormEstimate opnorm_lower(const LpOperator& t, double p, int iterations, unsigned seed) {
  if (!(p > 1.0) || std::isinf(p))
    throw std::domain_error("opnorm_lower: requires p in (1, inf)");
  const FiniteVNA& alg = t.algebra();
  const double pprime = p / (p - 1.0);
  LpOperator tstar = adjoint(t);

  std::vector<AlgElement> starts;
  starts.push_back(AlgElement::identity(alg));
  for (int k = 0; k < alg.block_count(); ++k)
    for (int i = 0; i < alg.dim(k); ++i)
      starts.push_back(AlgElement::matrix_unit(alg, k, i, i));
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 4; ++s) starts.push_back(random_psd(alg, rng));
  for (int s = 0; s < 4; ++s) starts.push_back(random_element(alg, rng));

  double best = 0.0;
  AlgElement witness = AlgElement::identity(alg);
  for (auto& x0 : starts) {
    double nx = lp_norm(x0, p);
    if (nx <= 0) continue;
    AlgElement x = (1.0 / nx) * x0;
    for (int it = 0; it < iterations; ++it) {
      AlgElement y = t.apply(x);
      const double ny = lp_norm(y, p);
      if (ny > best) {
        best = ny;
        witness = x;
      }
      if (ny <= 1e-300) break;
      AlgElement g = norming_element(y, p);
      AlgElement z = tstar.apply(g);
      const double nz = lp_norm(z, pprime);
      if (nz <= 1e-300) break;
      AlgElement xn = norming_element(z, pprime);
      const double nxn = lp_norm(xn, p);
      if (nxn <= 1e-300) break;
      x = (1.0 / nxn) * xn;
    }
  }
  // Re-evaluate directly so the reported bound is certified by the witness.
  const double nw = lp_norm(witness, p);
  const double certified = nw > 0 ? lp_norm(t.apply(witness), p) / nw : 0.0;
  return OpNormEstimate{certified, witness};
}

AlgElement JordanMap::apply(const AlgElement& x) const {
  return devectorize(algebra, mat * vectorize(x));
}

JordanMap analyze_jordan(const FiniteVNA& algebra, const Matrix& j, double tol) {
  if (j.rows() != algebra.element_dim() || j.cols() != algebra.element_dim())
    throw shape_error("analyze_jordan: matrix must be D x D");
  JordanMap jm{algebra, j};

  std::vector<AlgElement> basis;
  std::vector<AlgElement> images;
  for (int k = 0; k < algebra.block_count(); ++k)
    for (int r = 0; r < algebra.dim(k); ++r)
      for (int c = 0; c < algebra.dim(k); ++c) {
        basis.push_back(AlgElement::matrix_unit(algebra, k, r, c));
        images.push_back(devectorize(algebra, j * vectorize(basis.back())));
      }

  for (size_t a = 0; a < basis.size(); ++a) {
    AlgElement jstar = devectorize(algebra, j * vectorize(basis[a].adjoint()));
    jm.star_residual = std::max(jm.star_residual, inf_norm(jstar - images[a].adjoint()));
  }
  for (size_t a = 0; a < basis.size(); ++a) {
    for (size_t b = 0; b < basis.size(); ++b) {
      AlgElement xy = basis[a] * basis[b];
      AlgElement jxy = devectorize(algebra, j * vectorize(xy));
      AlgElement prod_ab = images[a] * images[b];
      AlgElement prod_ba = images[b] * images[a];
      jm.hom_residual = std::max(jm.hom_residual, inf_norm(jxy - prod_ab));
      jm.antihom_residual = std::max(jm.antihom_residual, inf_norm(jxy - prod_ba));
      AlgElement yx = basis[b] * basis[a];
      AlgElement jyx = devectorize(algebra, j * vectorize(yx));
      jm.jordan_residual =
          std::max(jm.jordan_residual, inf_norm((jxy + jyx) - (prod_ab + prod_ba)));
    }
  }
  jm.is_hom = jm.hom_residual <= tol && jm.star_residual <= tol;
  jm.is_antihom = jm.antihom_residual <= tol && jm.star_residual <= tol;
  jm.is_jordan = jm.jordan_residual <= tol && jm.star_residual <= tol;
  return jm;
}

}  // namespace nclp
