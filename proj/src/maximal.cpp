#include "nclp/maximal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace nclp {

namespace {

AlgElement symmetrize(const AlgElement& x) { return 0.5 * (x + x.adjoint()); }

AlgElement psd_clip(const AlgElement& h) {
  std::vector<Matrix> blocks;
  for (int k = 0; k < h.block_count(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.block(k) + h.block(k).adjoint()));
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    blocks.push_back(es.eigenvectors() *
                     vals.asDiagonal().toDenseMatrix().cast<Complex>() *
                     es.eigenvectors().adjoint());
  }
  return AlgElement(h.algebra(), std::move(blocks));
}

double min_eig(const AlgElement& h) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < h.block_count(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.block(k) + h.block(k).adjoint()));
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

// Weighted Hilbert-Schmidt inner product Re tau(x^* y); the gradient geometry
// of the solver.
double hs_inner(const AlgElement& x, const AlgElement& y) {
  return trace(x.adjoint() * y).real();
}

AlgElement pth_power(const AlgElement& h, double p) {
  return funcalc(h, [p](double t) { return std::pow(std::max(t, 0.0), p); });
}

double objective(const AlgElement& a, double p) {  // tau(a^p) for PSD a
  return trace(pth_power(a, p)).real();
}

// Projection onto { a : a >= x } is x + PSD-part(a - x), blockwise.
AlgElement project_single(const AlgElement& a, const AlgElement& x) {
  return x + psd_clip(a - x);
}

AlgElement dykstra_project(const AlgElement& v, const std::vector<AlgElement>& xs,
                           const MaxNormOptions& opts, double scale) {
  if (xs.size() == 1) return project_single(v, xs[0]);
  AlgElement a = v;
  std::vector<AlgElement> corrections(xs.size(), AlgElement::zero(v.algebra()));
  for (int cycle = 0; cycle < opts.dykstra_max_cycles; ++cycle) {
    double moved = 0.0;
    for (size_t n = 0; n < xs.size(); ++n) {
      AlgElement y = a + corrections[n];
      AlgElement a_new = project_single(y, xs[n]);
      corrections[n] = y - a_new;
      moved = std::max(moved, inf_norm(a_new - a));
      a = a_new;
    }
    if (moved <= opts.dykstra_tol * scale) break;
  }
  return a;
}

// Complementary-slackness dual candidate: solve a per-block least squares for
// PSD multipliers supported on the active subspaces with sum close to
// p a^{p-1}, refine by projected block-coordinate descent, then rescale into
// the dual feasible set.
double kkt_dual_value(const AlgElement& a, const std::vector<AlgElement>& xs, double p,
                      double active_tol) {
  const FiniteVNA& alg = a.algebra();
  AlgElement g = funcalc(a, [p](double t) { return p * std::pow(std::max(t, 0.0), p - 1.0); });

  // Per constraint and block: orthonormal basis of the active subspace.
  std::vector<std::vector<Matrix>> kernels(xs.size());
  for (size_t n = 0; n < xs.size(); ++n) {
    AlgElement s = a - xs[n];
    for (int k = 0; k < alg.block_count(); ++k) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 *
                                               (s.block(k) + s.block(k).adjoint()));
      std::vector<int> act;
      for (int i = 0; i < alg.dim(k); ++i)
        if (es.eigenvalues()[i] <= active_tol) act.push_back(i);
      Matrix kmat(alg.dim(k), static_cast<int>(act.size()));
      for (size_t i = 0; i < act.size(); ++i)
        kmat.col(static_cast<int>(i)) = es.eigenvectors().col(act[i]);
      kernels[n].push_back(std::move(kmat));
    }
  }

  std::vector<AlgElement> multipliers(xs.size(), AlgElement::zero(alg));
  for (int k = 0; k < alg.block_count(); ++k) {
    const int nk = alg.dim(k);
    std::vector<Matrix> columns;     // candidate Hermitian directions K B K^*
    std::vector<std::pair<size_t, Matrix>> owners;
    for (size_t n = 0; n < xs.size(); ++n) {
      const Matrix& kmat = kernels[n][static_cast<size_t>(k)];
      const int d = static_cast<int>(kmat.cols());
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          Matrix b1 = Matrix::Zero(d, d);
          b1(i, j) += 0.5;
          b1(j, i) += 0.5;
          columns.push_back(kmat * b1 * kmat.adjoint());
          owners.emplace_back(n, b1);
          if (i != j) {
            Matrix b2 = Matrix::Zero(d, d);
            b2(i, j) = Complex(0.0, 0.5);
            b2(j, i) = Complex(0.0, -0.5);
            columns.push_back(kmat * b2 * kmat.adjoint());
            owners.emplace_back(n, b2);
          }
        }
    }
    if (columns.empty()) continue;
    const int rows = 2 * nk * nk;
    Eigen::MatrixXd lsmat(rows, static_cast<int>(columns.size()));
    auto realvec = [nk](const Matrix& m) {
      Eigen::VectorXd v(2 * nk * nk);
      int idx = 0;
      for (int r = 0; r < nk; ++r)
        for (int c = 0; c < nk; ++c) {
          v[idx++] = m(r, c).real();
          v[idx++] = m(r, c).imag();
        }
      return v;
    };
    for (size_t j = 0; j < columns.size(); ++j)
      lsmat.col(static_cast<int>(j)) = realvec(columns[j]);
    Eigen::VectorXd target = realvec(g.block(k));
    Eigen::VectorXd coef = lsmat.colPivHouseholderQr().solve(target);
    for (size_t j = 0; j < columns.size(); ++j) {
      const size_t n = owners[j].first;
      std::vector<Matrix> upd;
      for (int l = 0; l < alg.block_count(); ++l)
        upd.push_back(l == k ? Matrix(coef[static_cast<int>(j)] * columns[j])
                             : Matrix::Zero(alg.dim(l), alg.dim(l)));
      multipliers[n] = multipliers[n] + AlgElement(alg, std::move(upd));
    }
  }

  for (auto& m : multipliers) m = psd_clip(symmetrize(m));

  // Projected block-coordinate refinement: repeatedly re-fit each multiplier
  // to the residual of the stationarity equation inside its active subspace.
  for (int sweep = 0; sweep < 12; ++sweep) {
    for (size_t n = 0; n < xs.size(); ++n) {
      AlgElement rem = g;
      for (size_t m = 0; m < xs.size(); ++m)
        if (m != n) rem = rem - multipliers[m];
      std::vector<Matrix> blocks;
      for (int k = 0; k < alg.block_count(); ++k) {
        const Matrix& kmat = kernels[n][static_cast<size_t>(k)];
        Matrix out = Matrix::Zero(alg.dim(k), alg.dim(k));
        if (kmat.cols() > 0) {
          Matrix comp = kmat.adjoint() * rem.block(k) * kmat;
          Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (comp + comp.adjoint()));
          Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
          out = kmat * es.eigenvectors() *
                vals.asDiagonal().toDenseMatrix().cast<Complex>() *
                es.eigenvectors().adjoint() * kmat.adjoint();
        }
        blocks.push_back(std::move(out));
      }
      multipliers[n] = AlgElement(alg, std::move(blocks));
    }
  }

  AlgElement total = AlgElement::zero(alg);
  for (const auto& m : multipliers) total = total + m;
  const double pprime = p / (p - 1.0);
  const double den = lp_norm(total, pprime);
  if (den <= 1e-300) return 0.0;
  double val = 0.0;
  for (size_t n = 0; n < xs.size(); ++n)
    val += trace(xs[n] * multipliers[n]).real();
  return std::max(val / den, 0.0);
}

// Weighted-orthonormal basis of the Hermitian part of the algebra:
// tau(dir_i dir_j) = delta_ij. Coordinates for the interior polish.
std::vector<AlgElement> hermitian_basis(const FiniteVNA& alg) {
  std::vector<AlgElement> dirs;
  const double isq = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < alg.block_count(); ++k) {
    const double s = 1.0 / std::sqrt(alg.weight(k));
    for (int i = 0; i < alg.dim(k); ++i) {
      AlgElement e = AlgElement::matrix_unit(alg, k, i, i);
      dirs.push_back(s * e);
    }
    for (int i = 0; i < alg.dim(k); ++i)
      for (int j = i + 1; j < alg.dim(k); ++j) {
        AlgElement re = AlgElement::matrix_unit(alg, k, i, j) +
                        AlgElement::matrix_unit(alg, k, j, i);
        dirs.push_back((s * isq) * re);
        AlgElement im = Complex(0, 1) * AlgElement::matrix_unit(alg, k, i, j) +
                        Complex(0, -1) * AlgElement::matrix_unit(alg, k, j, i);
        dirs.push_back((s * isq) * im);
      }
  }
  return dirs;
}

// Frechet derivative of a -> a^p at a Hermitian PSD point, applied to a
// Hermitian direction (Daleckii-Krein divided differences).
AlgElement power_frechet(const AlgElement& a, double p, const AlgElement& dir) {
  std::vector<Matrix> blocks;
  for (int k = 0; k < a.block_count(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a.block(k) + a.block(k).adjoint()));
    const auto& lam = es.eigenvalues();
    const int n = static_cast<int>(lam.size());
    Matrix inner = es.eigenvectors().adjoint() * dir.block(k) * es.eigenvectors();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double li = std::max(lam[i], 0.0), lj = std::max(lam[j], 0.0);
        double kij;
        if (std::abs(li - lj) > 1e-11 * std::max({li, lj, 1.0})) {
          kij = (std::pow(li, p) - std::pow(lj, p)) / (li - lj);
        } else {
          const double mid = 0.5 * (li + lj);
          kij = mid > 0 ? p * std::pow(mid, p - 1.0) : 0.0;
        }
        inner(i, j) *= std::min(kij, 1e14);
      }
    blocks.push_back(es.eigenvectors() * inner * es.eigenvectors().adjoint());
  }
  return AlgElement(a.algebra(), std::move(blocks));
}

// Interior polish: damped Newton on tau(a^p) - mu sum_n logdet(a - x_n) with a
// geometric mu schedule. Returns a strictly feasible point and a feasible dual
// candidate assembled from the final barrier multipliers mu (a - x_n)^{-1}.
struct BarrierResult {
  AlgElement a;
  double dual_value = 0.0;
};

BarrierResult barrier_polish(AlgElement a, const std::vector<AlgElement>& xs, double p,
                             int stages) {
  const FiniteVNA& alg = a.algebra();
  const auto dirs = hermitian_basis(alg);
  const int dim = static_cast<int>(dirs.size());
  const double pprime = p / (p - 1.0);

  auto min_slack = [&](const AlgElement& cand) {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& x : xs) s = std::min(s, min_eig(cand - x));
    return s;
  };
  // strictly feasible start
  const double s0 = min_slack(a);
  if (s0 < 1e-9) a = a + (1e-9 - s0) * AlgElement::identity(alg);

  auto barrier_value = [&](const AlgElement& cand, double mu) {
    double v = objective(cand, p);
    for (const auto& x : xs) {
      AlgElement s = cand - x;
      for (int k = 0; k < s.block_count(); ++k) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(
            0.5 * (s.block(k) + s.block(k).adjoint()));
        for (int i = 0; i < alg.dim(k); ++i) {
          if (es.eigenvalues()[i] <= 0.0) return std::numeric_limits<double>::infinity();
          v -= mu * std::log(es.eigenvalues()[i]);
        }
      }
    }
    return v;
  };

  double mu = std::max(1e-3 * objective(a, p), 1e-8);
  std::vector<AlgElement> inverses(xs.size(), AlgElement::zero(alg));
  for (int stage = 0; stage < stages; ++stage) {
    for (int newton = 0; newton < 40; ++newton) {
      for (size_t n = 0; n < xs.size(); ++n) {
        AlgElement s = a - xs[n];
        inverses[n] = psd_pinv(s, 1e-16);
      }
      AlgElement grad_mat = funcalc(
          a, [p](double t) { return p * std::pow(std::max(t, 0.0), p - 1.0); });
      for (size_t n = 0; n < xs.size(); ++n)
        grad_mat = grad_mat - mu * inverses[n];

      Eigen::VectorXd grad(dim);
      for (int i = 0; i < dim; ++i) grad[i] = trace(dirs[static_cast<size_t>(i)] * grad_mat).real();

      Eigen::MatrixXd hess(dim, dim);
      for (int j = 0; j < dim; ++j) {
        AlgElement hj = power_frechet(a, p, dirs[static_cast<size_t>(j)]);
        for (size_t n = 0; n < xs.size(); ++n)
          hj = hj + mu * (inverses[n] * dirs[static_cast<size_t>(j)] * inverses[n]);
        for (int i = 0; i < dim; ++i)
          hess(i, j) = trace(dirs[static_cast<size_t>(i)] * hj).real();
      }
      hess = 0.5 * (hess + hess.transpose());
      hess.diagonal().array() += 1e-12 * std::max(1.0, hess.diagonal().maxCoeff());

      Eigen::VectorXd delta = hess.ldlt().solve(-grad);
      AlgElement step_dir = AlgElement::zero(alg);
      for (int i = 0; i < dim; ++i)
        step_dir = step_dir + delta[i] * dirs[static_cast<size_t>(i)];

      const double f0 = barrier_value(a, mu);
      double t = 1.0;
      bool moved = false;
      for (int att = 0; att < 50; ++att) {
        AlgElement cand = a + t * step_dir;
        const double fc = barrier_value(cand, mu);
        if (fc < f0 - 1e-14 * std::abs(f0)) {
          a = cand;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved || grad.norm() <= 1e-11 * std::max(1.0, mu)) break;
    }
    mu *= 0.15;
  }

  // dual candidate from the final barrier multipliers
  for (size_t n = 0; n < xs.size(); ++n) inverses[n] = psd_pinv(a - xs[n], 1e-16);
  AlgElement total = AlgElement::zero(alg);
  for (const auto& s : inverses) total = total + s;
  const double den = lp_norm(total, pprime);
  BarrierResult out{a, 0.0};
  if (den > 1e-300) {
    double val = 0.0;
    for (size_t n = 0; n < xs.size(); ++n) val += trace(xs[n] * inverses[n]).real();
    out.dual_value = std::max(val / den, 0.0);
  }
  return out;
}

// Projected ascent on the scale-invariant dual ratio
//   g(z) = sum tau(x_n z_n) / || sum z_n ||_{p'}.
double dual_ascent_value(const std::vector<AlgElement>& xs, double p, int iters) {
  const FiniteVNA& alg = xs.front().algebra();
  const double pprime = p / (p - 1.0);
  std::vector<AlgElement> z = xs;
  for (auto& zn : z) zn = psd_clip(symmetrize(zn));

  auto eval = [&](const std::vector<AlgElement>& zz, AlgElement* sum_out) {
    AlgElement sum = AlgElement::zero(alg);
    for (const auto& zn : zz) sum = sum + zn;
    double b = lp_norm(sum, pprime);
    if (sum_out) *sum_out = sum;
    if (b <= 1e-300) return 0.0;
    double a = 0.0;
    for (size_t n = 0; n < zz.size(); ++n) a += trace(xs[n] * zz[n]).real();
    return a / b;
  };

  double step = 1.0;
  double best = eval(z, nullptr);
  for (int it = 0; it < iters; ++it) {
    AlgElement sum = AlgElement::zero(alg);
    const double cur = eval(z, &sum);
    const double b = lp_norm(sum, pprime);
    if (b <= 1e-300) break;
    AlgElement bgrad =
        funcalc(sum, [pprime](double t) { return std::pow(std::max(t, 0.0), pprime - 1.0); });
    double anum = 0.0;
    for (size_t n = 0; n < z.size(); ++n) anum += trace(xs[n] * z[n]).real();
    const double bpow = std::pow(b, pprime - 1.0);
    std::vector<AlgElement> cand = z;
    bool improved = false;
    for (int att = 0; att < 20; ++att) {
      for (size_t n = 0; n < z.size(); ++n) {
        AlgElement grad = (1.0 / b) * xs[n] - (anum / (bpow * b * b)) * bgrad;
        cand[n] = psd_clip(z[n] + step * grad);
      }
      const double v = eval(cand, nullptr);
      if (v > cur + 1e-16) {
        z = cand;
        best = std::max(best, v);
        step *= 1.5;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

MaximalNormResult maximal_norm_pos(const std::vector<AlgElement>& xs_in, double p,
                                   const MaxNormOptions& opts) {
  if (xs_in.empty()) throw std::invalid_argument("maximal_norm_pos: empty sequence");
  if (!(p > 1.0) || std::isinf(p))
    throw std::domain_error("maximal_norm_pos: requires p in (1, inf)");
  const FiniteVNA& alg = xs_in.front().algebra();

  double scale = 0.0;
  for (const auto& x : xs_in) {
    if (!x.algebra().same_structure(alg))
      throw shape_error("maximal_norm_pos: algebra mismatch");
    if (!is_psd(x, 1e-7 * std::max(1.0, x.max_abs())))
      throw std::domain_error("maximal_norm_pos: sequence element is not PSD");
    scale = std::max(scale, lp_norm(x, p));
  }

  MaximalNormResult res;
  res.a_star = AlgElement::zero(alg);
  res.converged = true;
  if (scale <= 0.0) return res;

  // Normalize so tolerances are relative; results scale back linearly.
  std::vector<AlgElement> xs;
  xs.reserve(xs_in.size());
  for (const auto& x : xs_in) xs.push_back(symmetrize((1.0 / scale) * x));

  AlgElement a = AlgElement::zero(alg);
  if (opts.init) {
    a = symmetrize((1.0 / scale) * *opts.init);
    if (min_eig(a) < -1e-12) a = psd_clip(a);
    for (const auto& x : xs) a = project_single(a, x);
    a = dykstra_project(a, xs, opts, 1.0);
  } else {
    for (const auto& x : xs) a = a + x;
  }
  if (min_eig(a) < 1e-10) a = a + 1e-10 * AlgElement::identity(alg);

  double lower = 0.0;
  for (const auto& x : xs) lower = std::max(lower, lp_norm(x, p));

  double step = 0.5 / p;
  double fa = objective(a, p);
  int it = 0;
  int stalls = 0;
  const int check_every = 20;
  for (; it < opts.max_iter; ++it) {
    AlgElement grad =
        funcalc(a, [p](double t) { return p * std::pow(std::max(t, 0.0), p - 1.0); });
    bool accepted = false;
    for (int att = 0; att < 45; ++att) {
      AlgElement cand = dykstra_project(a - step * grad, xs, opts, 1.0);
      const double fc = objective(cand, p);
      const double decrease = hs_inner(grad, cand - a);
      if (fc <= fa + 1e-4 * decrease + 1e-16) {
        a = cand;
        fa = fc;
        step = std::min(step * 1.3, 1e3);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Line search exhausted. Re-probe once from a small step before
      // declaring stationarity over the feasible set.
      if (++stalls >= 3) break;
      step = 1e-4 / p;
      continue;
    }
    if ((it + 1) % check_every == 0) {
      const double upper_now = std::pow(fa, 1.0 / p);
      lower = std::max(lower, kkt_dual_value(a, xs, p, 1e-7));
      if (upper_now - lower <= opts.gap_tol) break;
    }
  }

  // Shift to exact feasibility so the reported upper bound is genuine.
  double slack = 0.0;
  for (const auto& x : xs) slack = std::min(slack, min_eig(a - x));
  if (slack < 0.0) a = a + (-slack) * AlgElement::identity(alg);

  lower = std::max(lower, kkt_dual_value(a, xs, p, 1e-7));

  // The alternating projections settle slowly when the spectrahedra touch
  // tangentially; the interior polish finishes those instances and its
  // barrier multipliers double as a feasible dual point.
  if (std::pow(objective(a, p), 1.0 / p) - lower > 0.5 * opts.gap_tol &&
      opts.barrier_stages > 0) {
    BarrierResult br = barrier_polish(a, xs, p, opts.barrier_stages);
    if (objective(br.a, p) < objective(a, p) && min_eig(br.a) > -1e-13) {
      double bslack = 0.0;
      for (const auto& x : xs) bslack = std::min(bslack, min_eig(br.a - x));
      a = bslack < 0.0 ? br.a + (-bslack) * AlgElement::identity(alg) : br.a;
    }
    lower = std::max(lower, br.dual_value);
  }
  fa = objective(a, p);

  // The active-set threshold sweeps over scales since the primal precision
  // at the stall is instance-dependent.
  for (double eps_act : {1e-7, 1e-5, 1e-4, 1e-3, 1e-2}) {
    lower = std::max(lower, kkt_dual_value(a, xs, p, eps_act));
    if (std::pow(fa, 1.0 / p) - lower <= 0.25 * opts.gap_tol) break;
  }
  if (std::pow(fa, 1.0 / p) - lower > 0.25 * opts.gap_tol)
    lower = std::max(lower, dual_ascent_value(xs, p, opts.dual_iters));

  res.upper = scale * lp_norm(a, p);
  res.lower = scale * std::min(lower, lp_norm(a, p));
  res.a_star = scale * a;
  double final_slack = 0.0;
  for (const auto& x : xs_in) final_slack = std::min(final_slack, min_eig(*res.a_star - x));
  res.feasibility_slack = final_slack;
  res.iterations = it;
  res.converged = res.upper - res.lower <= opts.gap_tol * scale;
  return res;
}

double oracle_commuting(const std::vector<AlgElement>& xs, double p, double comm_tol) {
  if (xs.empty()) throw std::invalid_argument("oracle_commuting: empty sequence");
  const FiniteVNA& alg = xs.front().algebra();
  double scale = 1.0;
  for (const auto& x : xs) scale = std::max(scale, x.max_abs());
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = i + 1; j < xs.size(); ++j)
      if (inf_norm(xs[i] * xs[j] - xs[j] * xs[i]) > comm_tol * scale * scale)
        throw std::domain_error("oracle_commuting: inputs do not commute");

  double acc = 0.0;
  for (int k = 0; k < alg.block_count(); ++k) {
    const int n = alg.dim(k);
    // Joint diagonalization by successive refinement of eigenspaces.
    Matrix q = Matrix::Identity(n, n);
    std::vector<std::vector<int>> groups{std::vector<int>(static_cast<size_t>(n))};
    std::iota(groups[0].begin(), groups[0].end(), 0);
    for (const auto& x : xs) {
      std::vector<std::vector<int>> next;
      for (const auto& g : groups) {
        const int d = static_cast<int>(g.size());
        Matrix sub(n, d);
        for (int i = 0; i < d; ++i) sub.col(i) = q.col(g[static_cast<size_t>(i)]);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sub.adjoint() *
                                                 x.block(k) * sub);
        Matrix rotated = sub * es.eigenvectors();
        for (int i = 0; i < d; ++i) q.col(g[static_cast<size_t>(i)]) = rotated.col(i);
        // split by eigenvalue clusters
        std::vector<int> cur{g[0]};
        for (int i = 1; i < d; ++i) {
          if (es.eigenvalues()[i] - es.eigenvalues()[i - 1] > 1e-8 * scale) {
            next.push_back(cur);
            cur.clear();
          }
          cur.push_back(g[static_cast<size_t>(i)]);
        }
        next.push_back(cur);
      }
      groups = std::move(next);
    }
    for (int i = 0; i < n; ++i) {
      double m = 0.0;
      for (const auto& x : xs)
        m = std::max(m, (q.col(i).adjoint() * x.block(k) * q.col(i))(0, 0).real());
      acc += alg.weight(k) * std::pow(std::max(m, 0.0), p);
    }
  }
  return std::pow(acc, 1.0 / p);
}

GridOracle oracle_grid_2x2(const AlgElement& x1, const AlgElement& x2, double p,
                           int grid, int rounds) {
  const FiniteVNA& alg = x1.algebra();
  if (alg.block_count() != 1 || alg.dim(0) != 2)
    throw std::domain_error("oracle_grid_2x2: needs a single 2x2 block");
  if (!x2.algebra().same_structure(alg)) throw shape_error("oracle_grid_2x2: mismatch");
  if (grid < 5) throw std::invalid_argument("oracle_grid_2x2: grid too coarse");

  const double w = alg.weight(0);
  const double wp = std::pow(w, 1.0 / p);
  const double nscale = std::max({lp_norm(x1, p), lp_norm(x2, p), 1e-30});
  const Matrix m1 = x1.block(0) / nscale, m2 = x2.block(0) / nscale;

  const double bound = std::max((m1 + m2).cwiseAbs().maxCoeff() * 2.2, 1e-6);
  double lo[4] = {0.0, 0.0, -bound, -bound};
  double hi[4] = {bound, bound, bound, bound};

  auto value = [&](double al, double ga, double re, double im) {
    const double half = 0.5 * (al + ga);
    const double rad = std::sqrt(0.25 * (al - ga) * (al - ga) + re * re + im * im);
    const double l1 = std::max(half + rad, 0.0), l2 = std::max(half - rad, 0.0);
    return wp * std::pow(std::pow(l1, p) + std::pow(l2, p), 1.0 / p);
  };
  auto feasible = [&](double al, double ga, double re, double im, const Matrix& x,
                      double eps) {
    const double h00 = al - x(0, 0).real();
    const double h11 = ga - x(1, 1).real();
    const double hre = re - x(0, 1).real();
    const double him = im + x(0, 1).imag();  // entry (1,0) of a is re + i*im
    // a(0,1) = re - i*im so that a is Hermitian with a(1,0) = re + i*im
    const double det = h00 * h11 - (hre * hre + him * him);
    return h00 >= -eps && h11 >= -eps && det >= -eps * std::max(h00 + h11, 1.0);
  };

  // lambda_min of the 2x2 Hermitian a - x, for the final certification shift
  auto violation = [&](double al, double ga, double re, double im, const Matrix& x) {
    const double h00 = al - x(0, 0).real();
    const double h11 = ga - x(1, 1).real();
    const double hre = re - x(0, 1).real();
    const double him = im + x(0, 1).imag();
    const double half = 0.5 * (h00 + h11);
    const double rad = std::sqrt(0.25 * (h00 - h11) * (h00 - h11) + hre * hre + him * him);
    return std::max(0.0, rad - half);
  };

  double best[4] = {bound, bound, 0.0, 0.0};
  double spacing = 0.0;
  for (int round = 0; round < rounds; ++round) {
    double cur_lo[4], cur_hi[4];
    for (int d = 0; d < 4; ++d) {
      if (round == 0) {
        cur_lo[d] = lo[d];
        cur_hi[d] = hi[d];
      } else {
        const double half = 2.5 * spacing;
        cur_lo[d] = std::max(lo[d], best[d] - half);
        cur_hi[d] = std::min(hi[d], best[d] + half);
      }
    }
    spacing = 0.0;
    double steps[4];
    for (int d = 0; d < 4; ++d) {
      steps[d] = (cur_hi[d] - cur_lo[d]) / (grid - 1);
      spacing = std::max(spacing, steps[d]);
    }
    // The slack shrinks with the grid; every round revalidates its own best,
    // so looseness from a coarse round never survives into the answer.
    const double eps = 2.0 * spacing + 1e-14;
    double round_val = std::numeric_limits<double>::infinity();
    double round_best[4] = {best[0], best[1], best[2], best[3]};
    if (feasible(best[0], best[1], best[2], best[3], m1, eps) &&
        feasible(best[0], best[1], best[2], best[3], m2, eps))
      round_val = value(best[0], best[1], best[2], best[3]);
    for (int i0 = 0; i0 < grid; ++i0)
      for (int i1 = 0; i1 < grid; ++i1)
        for (int i2 = 0; i2 < grid; ++i2)
          for (int i3 = 0; i3 < grid; ++i3) {
            const double al = cur_lo[0] + steps[0] * i0;
            const double ga = cur_lo[1] + steps[1] * i1;
            const double re = cur_lo[2] + steps[2] * i2;
            const double im = cur_lo[3] + steps[3] * i3;
            if (!feasible(al, ga, re, im, m1, eps) || !feasible(al, ga, re, im, m2, eps))
              continue;
            const double v = value(al, ga, re, im);
            if (v < round_val) {
              round_val = v;
              round_best[0] = al;
              round_best[1] = ga;
              round_best[2] = re;
              round_best[3] = im;
            }
          }
    for (int d = 0; d < 4; ++d) best[d] = round_best[d];
  }

  // Polish phase: F(params) = norm of the point shifted onto the exactly
  // feasible side. F is convex in the four real parameters (norm of an affine
  // expression composed with the convex violation), so Nelder-Mead descent
  // from the grid winner converges reliably.
  auto shifted_value = [&](const std::array<double, 4>& q) {
    const double delta = std::max(violation(q[0], q[1], q[2], q[3], m1),
                                  violation(q[0], q[1], q[2], q[3], m2));
    return value(q[0] + delta, q[1] + delta, q[2], q[3]);
  };
  std::array<std::array<double, 4>, 5> simplex;
  std::array<double, 5> fval;
  auto order = [&] {
    for (size_t i = 0; i < 5; ++i)
      for (size_t j = i + 1; j < 5; ++j)
        if (fval[j] < fval[i]) {
          std::swap(fval[i], fval[j]);
          std::swap(simplex[i], simplex[j]);
        }
  };
  auto run_simplex = [&](int iters) {
    for (int it = 0; it < iters; ++it) {
      order();
      if (fval[4] - fval[0] < 1e-14 * std::max(1.0, fval[0])) break;
      std::array<double, 4> centroid{0, 0, 0, 0};
      for (size_t i = 0; i < 4; ++i)
        for (size_t d = 0; d < 4; ++d) centroid[d] += simplex[i][d] / 4.0;
      auto blend = [&](double c) {
        std::array<double, 4> q;
        for (size_t d = 0; d < 4; ++d)
          q[d] = centroid[d] + c * (centroid[d] - simplex[4][d]);
        return q;
      };
      auto refl = blend(1.0);
      const double fr = shifted_value(refl);
      if (fr < fval[0]) {
        auto expa = blend(2.0);
        const double fe = shifted_value(expa);
        if (fe < fr) {
          simplex[4] = expa;
          fval[4] = fe;
        } else {
          simplex[4] = refl;
          fval[4] = fr;
        }
      } else if (fr < fval[3]) {
        simplex[4] = refl;
        fval[4] = fr;
      } else {
        auto contr = blend(fr < fval[4] ? 0.5 : -0.5);
        const double fc = shifted_value(contr);
        if (fc < std::min(fr, fval[4])) {
          simplex[4] = contr;
          fval[4] = fc;
        } else {
          for (size_t i = 1; i < 5; ++i) {
            for (size_t d = 0; d < 4; ++d)
              simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
            fval[i] = shifted_value(simplex[i]);
          }
        }
      }
    }
    order();
  };

  // Restarted descent: the shift function has kinks along active-set changes,
  // where a single simplex tends to collapse early. Re-inflating around the
  // incumbent at decreasing sizes grinds past them; F is convex, so every
  // restart can only improve the incumbent.
  std::array<double, 4> incumbent{best[0], best[1], best[2], best[3]};
  double inc_val = shifted_value(incumbent);
  std::mt19937_64 polish_rng(12345);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double size : {8.0 * spacing + 1e-3, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    simplex[0] = incumbent;
    fval[0] = inc_val;
    for (size_t i = 1; i < 5; ++i) {
      simplex[i] = incumbent;
      for (size_t d = 0; d < 4; ++d) simplex[i][d] += size * unit(polish_rng);
      simplex[i][i - 1] += size;
      fval[i] = shifted_value(simplex[i]);
    }
    run_simplex(500);
    if (fval[0] < inc_val) {
      incumbent = simplex[0];
      inc_val = fval[0];
    }
  }

  double diameter = 0.0;
  for (size_t i = 1; i < 5; ++i)
    for (size_t d = 0; d < 4; ++d)
      diameter = std::max(diameter, std::abs(simplex[i][d] - incumbent[d]));

  GridOracle out;
  out.value = nscale * inc_val;
  out.accuracy = nscale * (3.0 * (fval[4] - inc_val) + 4.0 * wp * diameter) + 1e-10;
  return out;
}

std::vector<AlgElement> ergodic_averages(const LpOperator& t, const AlgElement& x, int n) {
  if (n < 0) throw std::invalid_argument("ergodic_averages: N >= 0");
  std::vector<AlgElement> out;
  out.reserve(static_cast<size_t>(n) + 1);
  AlgElement power = x;
  AlgElement sum = x;
  out.push_back(x);
  for (int k = 1; k <= n; ++k) {
    power = t.apply(power);
    sum = sum + power;
    out.push_back((1.0 / (k + 1)) * sum);
  }
  return out;
}

std::vector<AlgElement> two_sided_averages(const LpOperator& t, const AlgElement& x,
                                           int n, double cond_threshold) {
  if (n < 0) throw std::invalid_argument("two_sided_averages: N >= 0");
  Eigen::JacobiSVD<Matrix> svd(t.matrix());
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1], smax = sv[0];
  if (smin <= 0 || smax / smin > cond_threshold)
    throw std::runtime_error("two_sided_averages: operator matrix is ill-conditioned");
  LpOperator tinv = LpOperator::from_dense(t.algebra(), t.matrix().inverse());

  std::vector<AlgElement> out;
  out.reserve(static_cast<size_t>(n) + 1);
  AlgElement fwd = x, bwd = x, sum = x;
  out.push_back(x);
  for (int k = 1; k <= n; ++k) {
    fwd = t.apply(fwd);
    bwd = tinv.apply(bwd);
    sum = sum + fwd + bwd;
    out.push_back((1.0 / (2 * k + 1)) * sum);
  }
  return out;
}

LpOperator mean_ergodic_projection(const LpOperator& t, double cluster_tol,
                                   double ambiguity_tol, double verify_tol) {
  Eigen::ComplexEigenSolver<Matrix> es(t.matrix());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("mean_ergodic_projection: eigensolver failed");
  const auto& vals = es.eigenvalues();
  Eigen::VectorXcd indicator(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const double dist = std::abs(vals[i] - Complex(1.0, 0.0));
    if (dist <= cluster_tol) {
      indicator[i] = Complex(1.0, 0.0);
    } else if (dist < ambiguity_tol) {
      throw std::runtime_error(
          "mean_ergodic_projection: eigenvalue within the ambiguity band of 1");
    } else {
      indicator[i] = Complex(0.0, 0.0);
    }
  }
  Matrix v = es.eigenvectors();
  Matrix pmat = v * indicator.asDiagonal() * v.inverse();
  const double scale = std::max(1.0, pmat.cwiseAbs().maxCoeff());
  if ((pmat * pmat - pmat).cwiseAbs().maxCoeff() > verify_tol * scale ||
      (pmat * t.matrix() - pmat).cwiseAbs().maxCoeff() > verify_tol * scale ||
      (t.matrix() * pmat - pmat).cwiseAbs().maxCoeff() > verify_tol * scale)
    throw std::runtime_error("mean_ergodic_projection: projection identities failed");
  return LpOperator::from_dense(t.algebra(), std::move(pmat));
}

ErgodicReport maximal_ergodic_report(const LpOperator& t, const AlgElement& x, int n,
                                     double p, bool two_sided,
                                     const MaxNormOptions& opts) {
  if (!is_psd(x, 1e-7 * std::max(1.0, x.max_abs())))
    throw std::domain_error("maximal_ergodic_report: x must be PSD");
  std::vector<AlgElement> averages =
      two_sided ? two_sided_averages(t, x, n) : ergodic_averages(t, x, n);
  for (auto& a : averages) a = psd_clip(symmetrize(a));

  ErgodicReport rep;
  rep.two_sided = two_sided;
  rep.x_norm = lp_norm(x, p);

  std::vector<int> grid{0};
  for (int g = 1; g < n; g *= 2) grid.push_back(g);
  if (n >= 1) grid.push_back(n - 1);  // makes the final increment certifiable
  grid.push_back(n);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  MaxNormOptions o = opts;
  for (int g : grid) {
    std::vector<AlgElement> prefix(averages.begin(), averages.begin() + g + 1);
    MaximalNormResult r = maximal_norm_pos(prefix, p, o);
    rep.profile_grid.push_back(g);
    rep.profile_upper.push_back(rep.x_norm > 0 ? r.upper / rep.x_norm : 0.0);
    rep.profile_lower.push_back(rep.x_norm > 0 ? r.lower / rep.x_norm : 0.0);
    o.init = r.a_star;  // warm start; the solver re-projects it to feasibility
    rep.maximal = std::move(r);
  }
  rep.ratio = rep.x_norm > 0 ? rep.maximal.upper / rep.x_norm : 0.0;

  LpOperator proj = mean_ergodic_projection(t);
  rep.projection_distance = lp_norm(averages.back() - proj.apply(x), p);
  return rep;
}

bool linf_contraction_check(const LpOperator& t, const std::vector<AlgElement>& xs,
                            double p, const MaxNormOptions& opts,
                            LinfCheckReport* report) {
  std::vector<AlgElement> images;
  images.reserve(xs.size());
  for (const auto& x : xs) images.push_back(psd_clip(symmetrize(t.apply(x))));
  MaximalNormResult src = maximal_norm_pos(xs, p, opts);
  MaximalNormResult img = maximal_norm_pos(images, p, opts);
  const double combined = (src.upper - src.lower) + (img.upper - img.lower);
  const double margin = 1e-9 * std::max(1.0, src.upper);
  LinfCheckReport rep{src, img, combined, false, false};
  rep.contraction_ok = img.upper <= src.upper + combined + margin;
  rep.isometry_match = std::abs(img.upper - src.upper) <= combined + margin;
  if (report) *report = rep;
  return rep.contraction_ok;
}

}  // namespace nclp
