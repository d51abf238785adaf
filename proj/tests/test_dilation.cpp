#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nclp/dilation.hpp"
#include "nclp/gallery.hpp"

using namespace nclp;

namespace {

FiniteVNA m2() { return FiniteVNA({{2, 1.0}}); }
FiniteVNA lp2() { return FiniteVNA({{1, 1.0}, {1, 1.0}}); }

LpOperator diag_shift() {
  Matrix t = Matrix::Zero(2, 2);
  t(0, 1) = Complex(1, 0);
  return LpOperator::from_dense(lp2(), t);
}

}  // namespace

TEST_CASE("shift dilation of an isometry collapses") {
  std::mt19937_64 rng(41);
  AlgElement u = random_unitary(m2(), rng);
  ShiftDilation sd = shift_dilation(LpOperator::from_conjugation(u), 2.0);
  CHECK(inf_norm(sd.rho - AlgElement::identity(m2())) < 1e-9);
  CHECK(sd.S_T.matrix().cwiseAbs().maxCoeff() < 1e-8);

  AlgElement x = random_element(m2(), rng);
  SeqElement v = sd.embed(x);
  for (int n = 1; n <= 4; ++n) {
    v = sd.apply_isometry(v);
    AlgElement direct = x;
    for (int i = 0; i < n; ++i) direct = sd.T.apply(direct);
    CHECK(inf_norm(sd.compress(v) - direct) < 1e-10);
  }
}

TEST_CASE("shift dilation of the zero operator is the pure shift") {
  ShiftDilation sd = shift_dilation(LpOperator::zero(m2()), 2.0);
  CHECK((sd.S_T.matrix() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  std::mt19937_64 rng(43);
  AlgElement x = random_element(m2(), rng);
  SeqElement v = sd.apply_isometry(sd.embed(x));
  CHECK(inf_norm(v.slot(0)) < 1e-15);
  CHECK(inf_norm(v.slot(1) - x) < 1e-15);
  CHECK(std::abs(v.lp_norm(2.0) - lp_norm(x, 2.0)) < 1e-12);
}

TEST_CASE("shift dilation norm balance on the coordinate shift") {
  for (double p : {1.5, 2.0, 3.0}) {
    ShiftDilation sd = shift_dilation(diag_shift(), p);
    CHECK(std::abs(sd.rho.block(0)(0, 0)) < 1e-12);
    CHECK(std::abs(sd.rho.block(1)(0, 0) - Complex(1, 0)) < 1e-12);
    std::mt19937_64 rng(47);
    for (int i = 0; i < 20; ++i) {
      AlgElement x = random_element(lp2(), rng);
      // Eq-level balance: ||Tx||^p + ||S_T x||^p = ||x||^p
      const double lhs = std::pow(lp_norm(sd.T.apply(x), p), p) +
                         std::pow(lp_norm(sd.S_T.apply(x), p), p);
      CHECK(lhs == doctest::Approx(std::pow(lp_norm(x, p), p)).epsilon(1e-10));
      SeqElement v = sd.apply_isometry(sd.embed(x));
      CHECK(std::abs(v.lp_norm(p) - lp_norm(x, p)) < 1e-10);
    }
  }
}

TEST_CASE("shift dilation rejects expansive input") {
  std::mt19937_64 rng(49);
  AlgElement u = random_unitary(m2(), rng);
  LpOperator expanding = scale(Complex(1.5, 0), LpOperator::from_conjugation(u));
  CHECK_THROWS_AS(shift_dilation(expanding, 2.0), std::domain_error);
  LpOperator not_lamperti =
      LpOperator::from_conjugation(AlgElement(m2(), {[] {
                                     Matrix r(2, 2);
                                     r << Complex(1, 0), Complex(1, 0), Complex(0, 0),
                                         Complex(-1, 0);
                                     return r;
                                   }()}));
  CHECK_THROWS_AS(shift_dilation(not_lamperti, 2.0), std::domain_error);
}

TEST_CASE("simultaneous dilation reproduces words") {
  std::mt19937_64 rng(51);
  const double p = 2.0;
  std::vector<ShiftDilation> systems;
  // two unitary conjugations and two strict contractions
  for (int i = 0; i < 2; ++i)
    systems.push_back(
        shift_dilation(LpOperator::from_conjugation(random_unitary(m2(), rng)), p));
  for (int i = 0; i < 2; ++i) {
    RandomLamperti rl = random_lamperti_operator(m2(), 800 + static_cast<unsigned>(i),
                                                 JordanClass::hom, true, p);
    systems.push_back(shift_dilation(rl.op, p));
  }

  AlgElement x = random_element(m2(), rng);
  double residual = -1.0;
  // empty word is the identity
  CHECK(inf_norm(simultaneous_apply(systems, {}, x, &residual) - x) < 1e-14);
  CHECK(residual < 1e-14);

  // unitary word matches the composition exactly
  AlgElement via = simultaneous_apply(systems, {0, 1}, x, &residual);
  AlgElement direct = systems[0].T.apply(systems[1].T.apply(x));
  CHECK(inf_norm(via - direct) < 1e-12);
  CHECK(residual < 1e-12);

  // longer mixed words
  std::vector<std::vector<int>> words{{2, 3}, {0, 2, 1, 3}, {3, 2, 2, 1, 0}};
  for (const auto& w : words) {
    simultaneous_apply(systems, w, x, &residual);
    CHECK(residual < 1e-9);
  }
  CHECK_THROWS_AS(simultaneous_apply(systems, {9}, x, nullptr), std::invalid_argument);
}

TEST_CASE("tensor dilation of a single isometry") {
  std::mt19937_64 rng(53);
  AlgElement u = random_unitary(m2(), rng);
  LpOperator iso = LpOperator::from_conjugation(u);
  TensorDilation sys = convex_n_dilation({1.0}, {iso}, 3, 2.0);
  CHECK_FALSE(sys.lifted());
  TensorVerification rep = verify_tensor_dilation(sys, 10, 7);
  for (double r : rep.residuals) CHECK(r < 1e-12);
  CHECK(rep.isometry_deviation < 1e-10);
}

TEST_CASE("tensor dilation of equal unitary conjugations") {
  std::mt19937_64 rng(55);
  AlgElement u = random_unitary(m2(), rng);
  LpOperator iso = LpOperator::from_conjugation(u);
  TensorDilation sys = convex_n_dilation({0.5, 0.5}, {iso, iso}, 3, 2.0);
  TensorVerification rep = verify_tensor_dilation(sys, 10, 7);
  for (double r : rep.residuals) CHECK(r < 1e-12);
}

TEST_CASE("tensor dilation of mixed contractions with lifting") {
  const double p = 4.0;
  AlgElement diag_u(m2(), {[] {
                      Matrix d(2, 2);
                      d << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
                      return d;
                    }()});
  LpOperator t1 = LpOperator::from_conjugation(diag_u);
  LpOperator t2 = LpOperator::transpose_map(m2());
  TensorDilation sys = convex_n_dilation({0.5, 0.5}, {t1, t2}, 3, p);
  TensorVerification rep = verify_tensor_dilation(sys, 10, 9);
  REQUIRE(rep.residuals.size() == 4);
  for (double r : rep.residuals) CHECK(r < 1e-9);
  CHECK(rep.qj_identity < 1e-10);
  CHECK(rep.isometry_deviation < 1e-9);

  // strict contractions force the lift
  RandomLamperti a = random_lamperti_operator(m2(), 900, JordanClass::hom, true, p);
  RandomLamperti b = random_lamperti_operator(m2(), 901, JordanClass::hom, true, p);
  TensorDilation lifted = convex_n_dilation({0.5, 0.5}, {a.op, b.op}, 3, p);
  CHECK(lifted.lifted());
  TensorVerification rep2 = verify_tensor_dilation(lifted, 10, 11);
  for (double r : rep2.residuals) CHECK(r < 1e-9);
  CHECK(rep2.isometry_deviation < 1e-9);

  // diagnostic mode: skipping the lift breaks the isometry, not the identity
  TensorDilationOptions diag_opts;
  diag_opts.lift_non_isometric = false;
  TensorDilation unlifted = convex_n_dilation({0.5, 0.5}, {a.op, b.op}, 2, p, diag_opts);
  CHECK_FALSE(unlifted.lifted());
  CHECK(verify_isometry(unlifted, 10, 13) > 1e-6);
}

TEST_CASE("embed is isometric and compress contractive on samples") {
  const double p = 2.5;
  RandomLamperti a = random_lamperti_operator(m2(), 930, JordanClass::hom, true, p);
  RandomLamperti b = random_lamperti_operator(m2(), 931, JordanClass::hom, true, p);
  TensorDilation sys = convex_n_dilation({0.4, 0.6}, {a.op, b.op}, 3, p);
  std::mt19937_64 rng(63);
  for (int i = 0; i < 10; ++i) {
    AlgElement x = random_element(m2(), rng);
    CHECK(sys.lp_norm_Y(sys.embed(x)) == doctest::Approx(lp_norm(x, p)).epsilon(1e-10));
    Vector v = sys.sample(rng);
    CHECK(lp_norm(sys.compress(v), p) <= sys.lp_norm_Y(v) + 1e-10);
  }
}

TEST_CASE("positivity is preserved by the dilation maps") {
  const double p = 2.0;
  RandomLamperti a = random_lamperti_operator(m2(), 910, JordanClass::hom, true, p);
  RandomLamperti b = random_lamperti_operator(m2(), 911, JordanClass::hom, true, p);
  TensorDilation sys = convex_n_dilation({0.3, 0.7}, {a.op, b.op}, 2, p);
  std::mt19937_64 rng(57);
  for (int i = 0; i < 5; ++i) {
    Vector v = sys.sample(rng, /*positive=*/true);
    REQUIRE(sys.slotwise_psd(v, 1e-9));
    CHECK(sys.slotwise_psd(sys.apply_isometry(v), 1e-9));
    CHECK(is_psd(sys.compress(v), 1e-9));
    AlgElement x = random_psd(m2(), rng);
    CHECK(sys.slotwise_psd(sys.embed(x), 1e-9));
  }
}

TEST_CASE("trace identity behind the defect operator") {
  // ||Tx||_p^p - ||x||_p^p = tau((rho - 1) |x|^p) for sampled x
  std::mt19937_64 rng(59);
  for (unsigned seed = 920; seed < 925; ++seed) {
    const double p = 2.5;
    RandomLamperti rl =
        random_lamperti_operator(FiniteVNA({{2, 1.0}, {2, 0.5}}), seed,
                                 JordanClass::hom, true, p);
    ShiftDilation sd = shift_dilation(rl.op, p);
    for (int i = 0; i < 10; ++i) {
      AlgElement x = random_element(rl.op.algebra(), rng);
      AlgElement xp = funcalc(abs_element(x), [p](double t) { return std::pow(t, p); });
      const double lhs =
          std::pow(lp_norm(rl.op.apply(x), p), p) - std::pow(lp_norm(x, p), p);
      const double rhs =
          trace((sd.rho - AlgElement::identity(rl.op.algebra())) * xp).real();
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("resource budget guard") {
  std::mt19937_64 rng(61);
  AlgElement u = random_unitary(m2(), rng);
  LpOperator iso = LpOperator::from_conjugation(u);
  TensorDilationOptions opts;
  opts.max_total_dim = 50;
  CHECK_THROWS_AS(convex_n_dilation({0.5, 0.5}, {iso, iso}, 3, 2.0, opts),
                  resource_error);
  try {
    convex_n_dilation({0.5, 0.5}, {iso, iso}, 3, 2.0, opts);
  } catch (const resource_error& e) {
    CHECK(e.required_dimension > 50);
  }
}
