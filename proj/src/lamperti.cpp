#include "nclp/lamperti.hpp"

#include <cmath>

namespace nclp {

namespace {

std::vector<AlgElement> matrix_unit_basis(const FiniteVNA& alg) {
  std::vector<AlgElement> basis;
  basis.reserve(static_cast<size_t>(alg.element_dim()));
  for (int k = 0; k < alg.block_count(); ++k)
    for (int r = 0; r < alg.dim(k); ++r)
      for (int c = 0; c < alg.dim(k); ++c)
        basis.push_back(AlgElement::matrix_unit(alg, k, r, c));
  return basis;
}

double operator_scale(const LpOperator& t) {
  return std::max(1.0, t.matrix().cwiseAbs().maxCoeff());
}

double witness_violation(const LpOperator& t, const AlgElement& e, const AlgElement& f) {
  AlgElement te = t.apply(e), tf = t.apply(f);
  return std::max(inf_norm(te.adjoint() * tf), inf_norm(te * tf.adjoint()));
}

std::optional<LampertiWitness> search_witness(const LpOperator& t, double threshold,
                                              const LampertiOptions& opts) {
  const FiniteVNA& alg = t.algebra();
  // Coordinate diagonal units first, in lexicographic order.
  std::vector<AlgElement> coords;
  for (int k = 0; k < alg.block_count(); ++k)
    for (int i = 0; i < alg.dim(k); ++i)
      coords.push_back(AlgElement::matrix_unit(alg, k, i, i));
  for (size_t a = 0; a < coords.size(); ++a)
    for (size_t b = a + 1; b < coords.size(); ++b) {
      const double v = witness_violation(t, coords[a], coords[b]);
      if (v > threshold) return LampertiWitness{coords[a], coords[b], v};
    }
  // Spectral projections of random Hermitians.
  std::mt19937_64 rng(opts.seed);
  for (int trial = 0; trial < opts.witness_trials; ++trial) {
    AlgElement h = random_hermitian(alg, rng);
    std::vector<AlgElement> projs;
    for (int k = 0; k < alg.block_count(); ++k) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(h.block(k));
      for (int i = 0; i < alg.dim(k); ++i) {
        AlgElement pr = AlgElement::zero(alg);
        std::vector<Matrix> blocks;
        for (int l = 0; l < alg.block_count(); ++l)
          blocks.push_back(Matrix::Zero(alg.dim(l), alg.dim(l)));
        blocks[static_cast<size_t>(k)] =
            es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
        projs.emplace_back(alg, std::move(blocks));
      }
    }
    for (size_t a = 0; a < projs.size(); ++a)
      for (size_t b = a + 1; b < projs.size(); ++b) {
        const double v = witness_violation(t, projs[a], projs[b]);
        if (v > threshold) return LampertiWitness{projs[a], projs[b], v};
      }
  }
  return std::nullopt;
}

}  // namespace

LampertiAnalysis decompose(const LpOperator& t, double p, const LampertiOptions& opts) {
  const FiniteVNA& alg = t.algebra();
  const double scale = operator_scale(t);
  const double tol = opts.tol * scale;

  LampertiAnalysis out;
  AlgElement unit_image = t.apply(AlgElement::identity(alg));
  const bool degenerate =
      inf_norm(unit_image) <= 1e-14 * scale && t.matrix().cwiseAbs().maxCoeff() > 1e-14;
  if (degenerate) {
    // T(1) = 0 with T != 0: the canonical w is unrecoverable, only search.
    out.degenerate_unit_image = true;
    if (auto w = search_witness(t, tol, opts)) {
      out.status = LampertiStatus::not_lamperti;
      out.witness = std::move(w);
    } else {
      out.status = LampertiStatus::indeterminate;
    }
    return out;
  }

  auto pd = polar(unit_image, opts.rank_tol_rel);
  AlgElement binv = psd_pinv(pd.b, opts.rank_tol_rel);

  const int d = alg.element_dim();
  Matrix jmat(d, d);
  {
    auto basis = matrix_unit_basis(alg);
    for (int i = 0; i < d; ++i)
      jmat.col(i) = vectorize(binv * (pd.w.adjoint() * t.apply(basis[static_cast<size_t>(i)])));
  }
  JordanMap jm = analyze_jordan(alg, jmat, tol);

  LampertiResiduals res;
  res.jordan = std::max(jm.jordan_residual, jm.star_residual);
  AlgElement j1 = jm.apply(AlgElement::identity(alg));
  AlgElement sb = support(pd.b, opts.rank_tol_rel);
  res.support_identity =
      std::max(inf_norm(pd.w.adjoint() * pd.w - j1), inf_norm(j1 - sb));
  for (const auto& e : matrix_unit_basis(alg)) {
    AlgElement je = jm.apply(e);
    res.commutation = std::max(res.commutation, inf_norm(pd.b * je - je * pd.b));
    res.reconstruction =
        std::max(res.reconstruction, inf_norm(t.apply(e) - pd.w * (pd.b * je)));
  }

  const bool valid = res.jordan <= tol && res.support_identity <= tol &&
                     res.commutation <= tol && res.reconstruction <= tol;
  if (valid) {
    LampertiDecomposition dec{pd.w, pd.b, jm, res, JordanClass::mixed, 0.0};
    if (jm.is_hom)
      dec.classification = JordanClass::hom;
    else if (jm.is_antihom)
      dec.classification = JordanClass::antihom;
    AlgElement bp = funcalc(pd.b, [p](double s) { return std::pow(std::max(s, 0.0), p); });
    for (const auto& z : center_basis(alg)) {
      const double num = trace(bp * jm.apply(z)).real();
      const double den = trace(z).real();
      dec.norm_domination = std::max(dec.norm_domination, num / den);
    }
    out.status = LampertiStatus::lamperti;
    out.decomposition = std::move(dec);
    return out;
  }

  if (auto w = search_witness(t, tol, opts)) {
    out.status = LampertiStatus::not_lamperti;
    out.witness = std::move(w);
    return out;
  }
  // Residuals fail but no witness located: report both partial results.
  out.status = LampertiStatus::indeterminate;
  out.decomposition = LampertiDecomposition{pd.w, pd.b, jm, res, JordanClass::mixed, 0.0};
  return out;
}

bool is_completely_lamperti(const LampertiDecomposition& d, double tol) {
  return d.J.hom_residual <= tol && d.J.star_residual <= tol;
}

AlgElement rho_of(const LpOperator& t, double p, const LampertiDecomposition& d,
                  double verify_tol, unsigned seed) {
  const FiniteVNA& alg = t.algebra();
  AlgElement bp = funcalc(d.b, [p](double s) { return std::pow(std::max(s, 0.0), p); });
  auto zs = center_basis(alg);
  AlgElement rho = AlgElement::zero(alg);
  for (const auto& z : zs) {
    const double c = trace(bp * d.J.apply(z)).real() / trace(z).real();
    rho = rho + c * z;
  }
  // Verify the defining identity on sampled elements.
  std::mt19937_64 rng(seed);
  std::vector<AlgElement> samples;
  samples.push_back(AlgElement::identity(alg));
  for (int i = 0; i < 6; ++i) samples.push_back(random_element(alg, rng));
  for (const auto& x : samples) {
    const double lhs = std::pow(lp_norm(t.apply(x), p), p);
    AlgElement absx = abs_element(x);
    AlgElement axp = funcalc(absx, [p](double s) { return std::pow(std::max(s, 0.0), p); });
    const double rhs = trace(rho * axp).real();
    const double sc = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (std::abs(lhs - rhs) > verify_tol * sc)
      throw verification_error(
          "rho_of: ||T x||_p^p != tau(rho |x|^p); input is not positive Lamperti "
          "within tolerance");
  }
  return rho;
}

AlgElement rho_of(const LpOperator& t, double p, const LampertiOptions& opts) {
  LampertiAnalysis a = decompose(t, p, opts);
  if (a.status != LampertiStatus::lamperti || !a.decomposition)
    throw verification_error("rho_of: operator did not decompose as Lamperti");
  return rho_of(t, p, *a.decomposition);
}

KernelProjections kernel_projections(const AlgElement& rho, double rank_tol_rel) {
  const FiniteVNA& alg = rho.algebra();
  AlgElement one = AlgElement::identity(alg);
  AlgElement clamped = funcalc(rho, [](double s) { return std::max(s, 0.0); });
  AlgElement s_rho = support(clamped, rank_tol_rel);
  AlgElement gap = funcalc(one - rho, [](double s) { return std::max(s, 0.0); });
  AlgElement s_gap = support(gap, rank_tol_rel);
  return KernelProjections{one - s_rho, s_rho, one - s_gap};
}

KernelProjections kernel_projections(const LpOperator& t, double p,
                                     const LampertiOptions& opts) {
  AlgElement rho = rho_of(t, p, opts);
  KernelProjections kp = kernel_projections(rho, opts.rank_tol_rel);
  std::mt19937_64 rng(opts.seed + 101);
  for (int i = 0; i < 5; ++i) {
    AlgElement x = random_element(t.algebra(), rng);
    AlgElement x0 = kp.p0 * x * kp.p0;
    if (lp_norm(t.apply(x0), p) > 1e-8 * std::max(1.0, lp_norm(x0, p)))
      throw verification_error("kernel_projections: T does not vanish on p0 M p0");
    AlgElement xt = kp.p0_tilde * x * kp.p0_tilde;
    const double nx = lp_norm(xt, p);
    if (std::abs(lp_norm(t.apply(xt), p) - nx) > 1e-7 * std::max(1.0, nx))
      throw verification_error("kernel_projections: T not isometric on p0~ M p0~");
  }
  return kp;
}

DoublyLampertiFactorization doubly_lamperti_factor(const LpOperator& t, double p,
                                                   int n_check,
                                                   const LampertiOptions& opts) {
  if (n_check < 1) throw std::invalid_argument("doubly_lamperti_factor: n_check >= 1");
  const FiniteVNA& alg = t.algebra();
  const double scale = operator_scale(t);

  LampertiAnalysis a = decompose(t, p, opts);
  if (a.status != LampertiStatus::lamperti || !a.decomposition) {
    std::optional<std::pair<AlgElement, AlgElement>> w;
    if (a.witness) w = std::make_pair(a.witness->e, a.witness->f);
    throw hypothesis_error("doubly_lamperti_factor: T is not Lamperti", std::move(w));
  }
  const LampertiDecomposition& dec = *a.decomposition;
  if (inf_norm(dec.w - support(dec.b, opts.rank_tol_rel)) > opts.tol * scale)
    throw std::domain_error("doubly_lamperti_factor: requires a positive Lamperti operator");

  const double pprime = p / (p - 1.0);
  LampertiAnalysis astar = decompose(adjoint(t), pprime, opts);
  if (astar.status != LampertiStatus::lamperti) {
    std::optional<std::pair<AlgElement, AlgElement>> w;
    if (astar.witness) w = std::make_pair(astar.witness->e, astar.witness->f);
    throw hypothesis_error("doubly_lamperti_factor: adjoint is not Lamperti",
                           std::move(w));
  }

  DoublyLampertiFactorization out{AlgElement::zero(alg), LpOperator::zero(alg),
                                  AlgElement::zero(alg), AlgElement::zero(alg),
                                  AlgElement::zero(alg)};
  out.rho = rho_of(t, p, dec);
  KernelProjections kp = kernel_projections(out.rho, opts.rank_tol_rel);
  out.p0 = kp.p0;
  out.p1 = kp.p1;

  const double rho_cut = opts.rank_tol_rel * std::max(out.rho.max_abs(), 1e-300);
  AlgElement rho_inv_p =
      funcalc(out.rho, [p, rho_cut](double s) { return s > rho_cut ? std::pow(s, -1.0 / p) : 0.0; });
  AlgElement rho_tilde = dec.J.apply(rho_inv_p);
  AlgElement btilde = dec.b * rho_tilde;
  btilde = 0.5 * (btilde + btilde.adjoint());
  out.S = LpOperator::from_wbj(support(btilde, opts.rank_tol_rel), btilde, dec.J.mat);
  out.theta = dec.J.apply(funcalc(out.rho, [p](double s) { return std::pow(std::max(s, 0.0), 1.0 / p); }));

  auto basis = matrix_unit_basis(alg);
  AlgElement theta_n = AlgElement::identity(alg);
  AlgElement j_power_theta = out.theta;  // J^{n-1}(theta) at step n
  LpOperator t_power = LpOperator::identity(alg);
  LpOperator s_power = LpOperator::identity(alg);
  for (int n = 1; n <= n_check; ++n) {
    theta_n = (n == 1) ? out.theta : theta_n * j_power_theta;
    t_power = compose(t, t_power);
    s_power = compose(out.S, s_power);
    LpOperator theta_mult = LpOperator::left_multiplication(theta_n);
    LpOperator rhs = compose(theta_mult, s_power);
    out.power_residuals.push_back(
        (t_power.matrix() - rhs.matrix()).cwiseAbs().maxCoeff());
    double comm = 0.0;
    for (const auto& e : basis) {
      AlgElement se = s_power.apply(e);
      comm = std::max(comm, inf_norm(theta_n * se - se * theta_n));
    }
    out.commute_residuals.push_back(comm);
    out.theta_inf_norms.push_back(inf_norm(theta_n));
    out.opnorm_lowers.push_back(opnorm_lower(t_power, p, 40, opts.seed + 13).lower);
    j_power_theta = dec.J.apply(j_power_theta);
  }

  std::mt19937_64 rng(opts.seed + 29);
  for (int i = 0; i < 5; ++i) {
    AlgElement x = random_element(alg, rng);
    AlgElement x0 = out.p0 * x * out.p0;
    out.s_vanishing = std::max(out.s_vanishing, lp_norm(out.S.apply(x0), p));
    AlgElement x1 = out.p1 * x * out.p1;
    out.s_isometry_deviation = std::max(
        out.s_isometry_deviation, std::abs(lp_norm(out.S.apply(x1), p) - lp_norm(x1, p)));
  }
  return out;
}

JordanClass lamperti_product_check(const LpOperator& t1, const LpOperator& t2, double p,
                                   const LampertiOptions& opts) {
  LampertiAnalysis a1 = decompose(t1, p, opts);
  LampertiAnalysis a2 = decompose(t2, p, opts);
  if (a1.status != LampertiStatus::lamperti || a2.status != LampertiStatus::lamperti)
    throw verification_error("lamperti_product_check: a factor is not Lamperti");
  LampertiAnalysis prod = decompose(compose(t1, t2), p, opts);
  if (prod.status != LampertiStatus::lamperti || !prod.decomposition)
    throw verification_error("lamperti_product_check: product failed to decompose");
  return prod.decomposition->classification;
}

}  // namespace nclp
