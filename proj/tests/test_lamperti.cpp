#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nclp/gallery.hpp"
#include "nclp/lamperti.hpp"

using namespace nclp;

namespace {

FiniteVNA m2() { return FiniteVNA({{2, 1.0}}); }
FiniteVNA lp2() { return FiniteVNA({{1, 1.0}, {1, 1.0}}); }

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

LpOperator diag_shift() {  // (x1, x2) -> (x2, 0) on l_p^2
  Matrix t = Matrix::Zero(2, 2);
  t(0, 1) = Complex(1, 0);
  return LpOperator::from_dense(lp2(), t);
}

double max_residual(const LampertiDecomposition& d) {
  return std::max({d.residuals.reconstruction, d.residuals.commutation,
                   d.residuals.jordan, d.residuals.support_identity});
}

}  // namespace

TEST_CASE("unitary conjugation decomposes as a *-isomorphism") {
  std::mt19937_64 rng(21);
  AlgElement u = random_unitary(m2(), rng);
  LampertiAnalysis a = decompose(LpOperator::from_conjugation(u), 2.0);
  REQUIRE(a.status == LampertiStatus::lamperti);
  const auto& d = *a.decomposition;
  CHECK(d.classification == JordanClass::hom);
  CHECK(inf_norm(d.w - AlgElement::identity(m2())) < 1e-9);
  CHECK(inf_norm(d.b - AlgElement::identity(m2())) < 1e-9);
  CHECK(max_residual(d) < 1e-10);
  CHECK(is_completely_lamperti(d));
}

TEST_CASE("the invertible positive non-Lamperti conjugation is refuted") {
  LpOperator t = LpOperator::from_conjugation(AlgElement(m2(), {mat2(1, 1, 0, -1)}));
  LampertiAnalysis a = decompose(t, 2.0);
  REQUIRE(a.status == LampertiStatus::not_lamperti);
  REQUIRE(a.witness.has_value());
  CHECK(inf_norm(a.witness->e - AlgElement::matrix_unit(m2(), 0, 0, 0)) < 1e-12);
  CHECK(inf_norm(a.witness->f - AlgElement::matrix_unit(m2(), 0, 1, 1)) < 1e-12);
  CHECK(a.witness->violation == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("transpose decomposes as a *-anti-automorphism") {
  LampertiAnalysis a = decompose(LpOperator::transpose_map(m2()), 2.0);
  REQUIRE(a.status == LampertiStatus::lamperti);
  const auto& d = *a.decomposition;
  CHECK(d.classification == JordanClass::antihom);
  CHECK(inf_norm(d.w - AlgElement::identity(m2())) < 1e-10);
  CHECK(inf_norm(d.b - AlgElement::identity(m2())) < 1e-10);
  CHECK(max_residual(d) < 1e-12);
  CHECK_FALSE(is_completely_lamperti(d));
  // J(e12 e21) = e11 while J(e12) J(e21) = e22
  CHECK(d.J.hom_residual == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("left multiplication by a unitary is Lamperti with w = v") {
  std::mt19937_64 rng(23);
  AlgElement v = random_unitary(m2(), rng);
  LampertiAnalysis a = decompose(LpOperator::left_multiplication(v), 2.0);
  REQUIRE(a.status == LampertiStatus::lamperti);
  CHECK(inf_norm(a.decomposition->w - v) < 1e-9);
  CHECK(inf_norm(a.decomposition->b - AlgElement::identity(m2())) < 1e-9);
  CHECK((a.decomposition->J.mat - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("degenerate unit image is flagged") {
  // T(x) = e12 x e12 kills the identity but not the algebra.
  AlgElement e12 = AlgElement::matrix_unit(m2(), 0, 0, 1);
  Matrix mat = dense_matrix_of(m2(), [&](const AlgElement& x) { return e12 * x * e12; });
  LampertiAnalysis a = decompose(LpOperator::from_dense(m2(), mat), 2.0);
  CHECK(a.degenerate_unit_image);
  CHECK(a.status == LampertiStatus::not_lamperti);  // witness among spectral pairs
  CHECK(a.witness.has_value());
}

TEST_CASE("commutative algebras classify as hom") {
  std::mt19937_64 rng(25);
  FiniteVNA ab({{1, 1.0}, {1, 2.0}, {1, 0.5}});
  // any diagonal positive matrix acting by permutation + scaling
  Matrix t = Matrix::Zero(3, 3);
  t(0, 2) = Complex(0.3, 0);
  t(1, 0) = Complex(1.2, 0);
  t(2, 1) = Complex(0.7, 0);
  LampertiAnalysis a = decompose(LpOperator::from_dense(ab, t), 2.0);
  REQUIRE(a.status == LampertiStatus::lamperti);
  CHECK(a.decomposition->classification == JordanClass::hom);
  CHECK(is_completely_lamperti(*a.decomposition));
}

TEST_CASE("rho of basic operators") {
  std::mt19937_64 rng(27);
  // positive isometry: rho = 1
  AlgElement u = random_unitary(m2(), rng);
  AlgElement rho_iso = rho_of(LpOperator::from_conjugation(u), 2.0);
  CHECK(inf_norm(rho_iso - AlgElement::identity(m2())) < 1e-9);

  // zero operator: rho = 0
  AlgElement rho_zero = rho_of(LpOperator::zero(m2()), 2.0);
  CHECK(inf_norm(rho_zero) < 1e-12);

  // coordinate shift on l_p^2: rho = (0, 1)
  for (double p : {1.5, 2.0, 3.0}) {
    AlgElement rho = rho_of(diag_shift(), p);
    CHECK(std::abs(rho.block(0)(0, 0)) < 1e-12);
    CHECK(std::abs(rho.block(1)(0, 0) - Complex(1, 0)) < 1e-12);
  }

  // a non-Lamperti operator fails the consistency check
  LpOperator bad = LpOperator::from_conjugation(AlgElement(m2(), {mat2(1, 1, 0, -1)}));
  LampertiAnalysis ab = decompose(bad, 2.0);
  CHECK(ab.status == LampertiStatus::not_lamperti);
  CHECK_THROWS_AS(rho_of(bad, 2.0), verification_error);
}

TEST_CASE("kernel projections") {
  FiniteVNA alg = lp2();
  AlgElement rho1 = AlgElement::identity(alg);
  KernelProjections k1 = kernel_projections(rho1);
  CHECK(inf_norm(k1.p0) < 1e-14);
  CHECK(inf_norm(k1.p1 - AlgElement::identity(alg)) < 1e-14);
  CHECK(inf_norm(k1.p0_tilde - AlgElement::identity(alg)) < 1e-14);

  KernelProjections k2 = kernel_projections(diag_shift(), 2.0);
  CHECK(k2.p0.block(0)(0, 0).real() == doctest::Approx(1.0));
  CHECK(std::abs(k2.p0.block(1)(0, 0)) < 1e-14);
  CHECK(k2.p1.block(1)(0, 0).real() == doctest::Approx(1.0));
  CHECK(k2.p0_tilde.block(1)(0, 0).real() == doctest::Approx(1.0));
  CHECK(std::abs(k2.p0_tilde.block(0)(0, 0)) < 1e-14);
}

TEST_CASE("kernel projections with partial density") {
  FiniteVNA alg = lp2();
  Matrix h(1, 1), f(1, 1);
  h << Complex(0.5, 0);
  f << Complex(1.0, 0);
  KernelProjections k = kernel_projections(AlgElement(alg, {h, f}));
  CHECK(inf_norm(k.p0) < 1e-14);
  CHECK(std::abs(k.p0_tilde.block(0)(0, 0)) < 1e-14);
  CHECK(k.p0_tilde.block(1)(0, 0).real() == doctest::Approx(1.0));
}

TEST_CASE("roundtrip through random structured Lamperti operators") {
  std::vector<FiniteVNA> algebras = {FiniteVNA({{2, 1.0}}), FiniteVNA({{3, 0.5}}),
                                     FiniteVNA({{2, 1.0}, {2, 2.0}}),
                                     FiniteVNA({{1, 1.0}, {1, 0.5}, {1, 2.0}, {1, 1.0}})};
  unsigned seed = 100;
  for (const auto& alg : algebras) {
    bool has2 = false;
    int noncomm = 0;
    for (int k = 0; k < alg.block_count(); ++k)
      if (alg.dim(k) >= 2) {
        has2 = true;
        ++noncomm;
      }
    std::vector<JordanClass> classes{JordanClass::hom};
    if (has2) classes.push_back(JordanClass::antihom);
    if (noncomm >= 2) classes.push_back(JordanClass::mixed);
    for (JordanClass cls : classes)
      for (int rep = 0; rep < 4; ++rep) {
        RandomLamperti rl =
            random_lamperti_operator(alg, seed++, cls, true, 2.0);
        LampertiAnalysis a = decompose(rl.op, 2.0);
        REQUIRE(a.status == LampertiStatus::lamperti);
        CHECK(max_residual(*a.decomposition) <= 1e-8);
        CHECK(a.decomposition->classification == cls);
        CHECK(is_completely_lamperti(*a.decomposition) == (cls == JordanClass::hom));
        CHECK(inf_norm(a.decomposition->w - rl.w) < 1e-8);
        CHECK(inf_norm(a.decomposition->b - rl.b) < 1e-8);
        CHECK((a.decomposition->J.mat - rl.jmat).cwiseAbs().maxCoeff() < 1e-8);
      }
  }
}

TEST_CASE("modulus identity and support separation transfer") {
  std::mt19937_64 rng(31);
  FiniteVNA alg({{2, 1.0}, {2, 1.5}});
  for (int rep = 0; rep < 8; ++rep) {
    RandomLamperti rl = random_lamperti_operator(alg, 300 + rep, JordanClass::hom, true, 2.0);
    // |T x| = T |x| for self-adjoint x and positive Lamperti T
    AlgElement x = random_hermitian(alg, rng);
    CHECK(inf_norm(abs_element(rl.op.apply(x)) - rl.op.apply(abs_element(x))) <
          1e-9 * std::max(1.0, x.max_abs()));
  }

  // (Tx)^* Ty = 0 when x^* y = x y^* = 0, for completely Lamperti T
  FiniteVNA m4({{4, 1.0}});
  for (int rep = 0; rep < 8; ++rep) {
    RandomLamperti rl = random_lamperti_operator(m4, 400 + rep, JordanClass::hom, true, 2.0);
    Matrix a = random_ginibre(2, rng), b = random_ginibre(2, rng);
    Matrix xm = Matrix::Zero(4, 4), ym = Matrix::Zero(4, 4);
    xm.block(0, 0, 2, 2) = a;   // rows/cols 0..1
    ym.block(2, 2, 2, 2) = b;   // rows/cols 2..3: orthogonal row and column spaces
    AlgElement x(m4, {xm}), y(m4, {ym});
    REQUIRE(inf_norm(x.adjoint() * y) < 1e-14);
    REQUIRE(inf_norm(x * y.adjoint()) < 1e-14);
    AlgElement tx = rl.op.apply(x), ty = rl.op.apply(y);
    CHECK(inf_norm(tx.adjoint() * ty) < 1e-9);
    CHECK(inf_norm(tx * ty.adjoint()) < 1e-9);
  }
}

TEST_CASE("rho bounds for contractive generators") {
  for (unsigned seed = 500; seed < 512; ++seed) {
    RandomLamperti rl = random_lamperti_operator(FiniteVNA({{2, 1.0}, {2, 0.5}}), seed,
                                                 JordanClass::hom, true, 3.0);
    AlgElement rho = rho_of(rl.op, 3.0);
    CHECK(is_psd(rho, 1e-10));
    double top = 0.0;
    for (int k = 0; k < rho.block_count(); ++k)
      top = std::max(top, rho.block(k).real().diagonal().maxCoeff());
    CHECK(top <= 1.0 + 1e-10);
  }
}

TEST_CASE("doubly Lamperti factorization") {
  // isometric case collapses: theta = 1, S = T
  std::mt19937_64 rng(33);
  AlgElement u = random_unitary(m2(), rng);
  LpOperator iso = LpOperator::from_conjugation(u);
  DoublyLampertiFactorization f = doubly_lamperti_factor(iso, 2.0, 3);
  CHECK(inf_norm(f.theta - AlgElement::identity(m2())) < 1e-9);
  for (double r : f.power_residuals) CHECK(r < 1e-9);
  for (double r : f.commute_residuals) CHECK(r < 1e-9);

  // scaled isometry: theta_n has norm 2^n and matches ||T^n||
  LpOperator twice = scale(Complex(2, 0), iso);
  DoublyLampertiFactorization f2 = doubly_lamperti_factor(twice, 2.0, 3);
  for (size_t n = 0; n < f2.theta_inf_norms.size(); ++n) {
    CHECK(f2.theta_inf_norms[n] ==
          doctest::Approx(std::pow(2.0, static_cast<double>(n + 1))).epsilon(1e-8));
    CHECK(f2.power_residuals[n] < 1e-8);
    CHECK(f2.theta_inf_norms[n] >= f2.opnorm_lowers[n] - 1e-6);
    CHECK(f2.theta_inf_norms[n] - f2.opnorm_lowers[n] < 1e-4);
  }

  // weighted swap on l_p^2 with rho = (1/4, 1)
  for (double p : {1.5, 2.0}) {
    Matrix t = Matrix::Zero(2, 2);
    t(0, 1) = Complex(1, 0);
    t(1, 0) = Complex(std::pow(4.0, -1.0 / p), 0);
    LpOperator swap_op = LpOperator::from_dense(lp2(), t);
    AlgElement rho = rho_of(swap_op, p);
    CHECK(rho.block(0)(0, 0).real() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(rho.block(1)(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
    DoublyLampertiFactorization fs = doubly_lamperti_factor(swap_op, p, 4);
    for (double r : fs.power_residuals) CHECK(r < 1e-10);
    CHECK(fs.theta_inf_norms[0] == doctest::Approx(1.0).epsilon(1e-10));
    // S is an isometry here (p1 = 1)
    CHECK(fs.s_isometry_deviation < 1e-9);
  }

  // nilpotent shift: T^2 = 0 = theta_2 S^2
  DoublyLampertiFactorization fn = doubly_lamperti_factor(diag_shift(), 2.0, 3);
  for (double r : fn.power_residuals) CHECK(r < 1e-12);
  CHECK(fn.theta_inf_norms[1] < 1e-12);  // theta_2 = 0
  CHECK(fn.s_vanishing < 1e-12);
}

TEST_CASE("adjoint-not-Lamperti inputs are rejected with a witness") {
  // J embeds the two scalar blocks onto the diagonal of the matrix block, so
  // J(M) is a proper subalgebra of J(1) M J(1) and the adjoint merges
  // off-diagonal mass: T* is not Lamperti.
  FiniteVNA alg({{2, 1.0}, {1, 1.0}, {1, 1.0}});
  auto j_action = [&](const AlgElement& x) {
    std::vector<Matrix> blocks{Matrix::Zero(2, 2), Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
    blocks[0](0, 0) = x.block(1)(0, 0);
    blocks[0](1, 1) = x.block(2)(0, 0);
    return AlgElement(alg, std::move(blocks));
  };
  Matrix jmat = dense_matrix_of(alg, j_action);
  auto zs = center_basis(alg);
  LpOperator t = LpOperator::from_wbj(zs[0], zs[0], jmat);

  LampertiAnalysis a = decompose(t, 2.0);
  REQUIRE(a.status == LampertiStatus::lamperti);  // T itself is Lamperti
  CHECK_THROWS_AS(doubly_lamperti_factor(t, 2.0, 2), hypothesis_error);
  try {
    doubly_lamperti_factor(t, 2.0, 2);
  } catch (const hypothesis_error& e) {
    CHECK(e.witness.has_value());
  }
}

TEST_CASE("products of Lamperti operators") {
  std::mt19937_64 rng(35);
  AlgElement u1 = random_unitary(m2(), rng), u2 = random_unitary(m2(), rng);
  CHECK(lamperti_product_check(LpOperator::from_conjugation(u1),
                               LpOperator::from_conjugation(u2), 2.0) == JordanClass::hom);

  // antihom composed with antihom is hom (transpose twice = identity)
  LpOperator tr = LpOperator::transpose_map(m2());
  CHECK(lamperti_product_check(tr, tr, 2.0) == JordanClass::hom);

  // structured random pair composes to a Lamperti operator
  FiniteVNA alg({{2, 1.0}, {2, 1.0}});
  RandomLamperti r1 = random_lamperti_operator(alg, 601, JordanClass::hom, true, 2.0);
  RandomLamperti r2 = random_lamperti_operator(alg, 602, JordanClass::hom, true, 2.0);
  CHECK(lamperti_product_check(r1.op, r2.op, 2.0) == JordanClass::hom);

  LpOperator bad = LpOperator::from_conjugation(AlgElement(m2(), {mat2(1, 1, 0, -1)}));
  CHECK_THROWS_AS(lamperti_product_check(bad, bad, 2.0), verification_error);
}

TEST_CASE("norm tightness of theta against certified lower bounds") {
  // constructed doubly Lamperti operators: ||theta_n||_inf is the exact norm
  std::vector<FiniteVNA> algebras = {FiniteVNA({{1, 1.0}, {1, 2.0}, {1, 0.5}, {1, 1.0}}),
                                     FiniteVNA({{2, 1.0}, {2, 0.5}})};
  unsigned seed = 700;
  for (const auto& alg : algebras)
    for (int rep = 0; rep < 3; ++rep) {
      RandomLamperti rl =
          random_lamperti_operator(alg, seed++, JordanClass::hom, false, 2.0);
      DoublyLampertiFactorization f = doubly_lamperti_factor(rl.op, 2.0, 3);
      for (size_t n = 0; n < f.theta_inf_norms.size(); ++n) {
        CHECK(f.theta_inf_norms[n] >= f.opnorm_lowers[n] - 1e-6);
        CHECK(f.theta_inf_norms[n] - f.opnorm_lowers[n] <= 1e-4);
      }
    }
}
