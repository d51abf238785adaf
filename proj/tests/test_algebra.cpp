#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nclp/operators.hpp"

using namespace nclp;

namespace {

FiniteVNA m2() { return FiniteVNA({{2, 1.0}}); }

AlgElement from_entries(const FiniteVNA& alg, std::vector<Matrix> blocks) {
  return AlgElement(alg, std::move(blocks));
}

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("trace on weighted block algebras") {
  CHECK(trace(AlgElement::identity(m2())).real() == doctest::Approx(2.0));

  FiniteVNA two_scalars({{1, 0.5}, {1, 2.0}});
  Matrix a(1, 1), b(1, 1);
  a << Complex(3, 0);
  b << Complex(1, 0);
  CHECK(trace(from_entries(two_scalars, {a, b})).real() == doctest::Approx(3.5));

  CHECK(trace(AlgElement::matrix_unit(m2(), 0, 0, 0)).real() == doctest::Approx(1.0));

  // tau(xy) = tau(yx)
  std::mt19937_64 rng(3);
  FiniteVNA alg({{2, 1.0}, {3, 0.7}});
  for (int i = 0; i < 20; ++i) {
    AlgElement x = random_element(alg, rng), y = random_element(alg, rng);
    CHECK(std::abs(trace(x * y) - trace(y * x)) < 1e-10);
  }
}

TEST_CASE("lp norms") {
  AlgElement d = from_entries(m2(), {mat2(1, 0, 0, -1)});
  CHECK(lp_norm(d, 2.0) == doctest::Approx(std::sqrt(2.0)));

  AlgElement h = from_entries(m2(), {mat2(1, -1, -1, 1)});
  for (double p : {1.0, 1.5, 2.0, 3.0, 7.0})
    CHECK(lp_norm(h, p) == doctest::Approx(2.0));  // singular values {2, 0}
  CHECK(inf_norm(h) == doctest::Approx(2.0));

  FiniteVNA w3({{2, 3.0}});
  AlgElement e11 = AlgElement::matrix_unit(w3, 0, 0, 0);
  CHECK(lp_norm(e11, 1.0) == doctest::Approx(3.0));

  CHECK_THROWS_AS(lp_norm(e11, 0.5), std::domain_error);
}

TEST_CASE("norm symmetries and Hoelder on random inputs") {
  std::mt19937_64 rng(11);
  FiniteVNA alg({{2, 1.0}, {2, 0.25}});
  for (int i = 0; i < 25; ++i) {
    AlgElement x = random_element(alg, rng);
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      const double n = lp_norm(x, p);
      CHECK(lp_norm(x.adjoint(), p) == doctest::Approx(n).epsilon(1e-10));
      CHECK(lp_norm(abs_element(x), p) == doctest::Approx(n).epsilon(1e-9));
    }
    // Hoelder |tau(xy)| <= ||x||_p ||y||_p'
    AlgElement y = random_element(alg, rng);
    for (double p : {1.5, 2.0, 3.0}) {
      const double pp = p / (p - 1.0);
      CHECK(std::abs(trace(x * y)) <= lp_norm(x, p) * lp_norm(y, pp) + 1e-9);
    }
  }
}

TEST_CASE("functional calculus") {
  AlgElement d = from_entries(m2(), {mat2(4, 0, 0, 9)});
  AlgElement r = funcalc(d, [](double t) { return std::sqrt(t); });
  CHECK(inf_norm(r - from_entries(m2(), {mat2(2, 0, 0, 3)})) < 1e-12);

  // pseudo-inverse rule t -> 1/t on t > 0
  AlgElement s = from_entries(m2(), {mat2(2, 0, 0, 0)});
  AlgElement si = psd_pinv(s);
  CHECK(inf_norm(si - from_entries(m2(), {mat2(0.5, 0, 0, 0)})) < 1e-12);

  // indicator of (0, inf) on a rank-one matrix gives the support projector
  AlgElement ones = from_entries(m2(), {mat2(1, 1, 1, 1)});
  AlgElement supp = funcalc(ones, [](double t) { return t > 1e-10 ? 1.0 : 0.0; });
  CHECK(inf_norm(supp - from_entries(m2(), {mat2(0.5, 0.5, 0.5, 0.5)})) < 1e-12);

  CHECK_THROWS_AS(funcalc(from_entries(m2(), {mat2(0, 1, 0, 0)}),
                          [](double t) { return t; }),
                  std::domain_error);

  // composition on monotone functions
  std::mt19937_64 rng(5);
  FiniteVNA alg({{3, 1.0}});
  for (int i = 0; i < 10; ++i) {
    AlgElement h = random_psd(alg, rng);
    AlgElement lhs = funcalc(funcalc(h, [](double t) { return std::sqrt(t); }),
                             [](double t) { return t * t; });
    CHECK(inf_norm(lhs - h) < 1e-9 * std::max(1.0, h.max_abs()));
  }
}

TEST_CASE("support projections") {
  AlgElement d = from_entries(m2(), {mat2(5, 0, 0, 0)});
  CHECK(inf_norm(support(d) - AlgElement::matrix_unit(m2(), 0, 0, 0)) < 1e-12);
  CHECK(inf_norm(support(AlgElement::zero(m2()))) < 1e-15);
  AlgElement ones = from_entries(m2(), {mat2(1, 1, 1, 1)});
  CHECK(inf_norm(support(ones) - from_entries(m2(), {mat2(0.5, 0.5, 0.5, 0.5)})) < 1e-12);
  CHECK_THROWS_AS(support(from_entries(m2(), {mat2(1, 0, 0, -1)})), std::domain_error);

  std::mt19937_64 rng(7);
  FiniteVNA alg({{2, 1.0}, {2, 2.0}});
  for (int i = 0; i < 15; ++i) {
    AlgElement x = random_psd(alg, rng);
    AlgElement s = support(x);
    CHECK(inf_norm(s * x * s - x) < 1e-10 * std::max(1.0, x.max_abs()));
    CHECK(inf_norm(s * s - s) < 1e-10);
  }
}

TEST_CASE("polar decomposition") {
  // PSD input: w is the support, b the element itself
  std::mt19937_64 rng(13);
  AlgElement x = random_psd(m2(), rng);
  auto pd = polar(x);
  CHECK(inf_norm(pd.b - x) < 1e-10 * std::max(1.0, x.max_abs()));
  CHECK(inf_norm(pd.w - support(x)) < 1e-9);

  // nilpotent example
  AlgElement n = from_entries(m2(), {mat2(0, 1, 0, 0)});
  auto pn = polar(n);
  CHECK(inf_norm(pn.w - n) < 1e-12);
  CHECK(inf_norm(pn.b - from_entries(m2(), {mat2(0, 0, 0, 1)})) < 1e-12);

  auto pz = polar(AlgElement::zero(m2()));
  CHECK(inf_norm(pz.w) < 1e-15);
  CHECK(inf_norm(pz.b) < 1e-15);

  // roundtrip on random 4x4 inputs
  FiniteVNA m4({{4, 1.0}});
  for (int i = 0; i < 20; ++i) {
    AlgElement y = random_element(m4, rng);
    auto pd4 = polar(y);
    CHECK(inf_norm(pd4.w * pd4.b - y) <= 1e-10 * std::max(1.0, y.max_abs()));
    CHECK(is_partial_isometry(pd4.w, 1e-9));
    CHECK(inf_norm(pd4.w.adjoint() * pd4.w - support(pd4.b)) < 1e-9);
  }
}

TEST_CASE("center basis") {
  FiniteVNA alg({{2, 1.0}, {3, 5.0}});
  auto zs = center_basis(alg);
  REQUIRE(zs.size() == 2);
  AlgElement sum = zs[0] + zs[1];
  CHECK(inf_norm(sum - AlgElement::identity(alg)) < 1e-15);
  CHECK(zs[0].block(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(zs[1].block(0).cwiseAbs().maxCoeff() == 0.0);

  // weights do not affect the output
  FiniteVNA alg2({{2, 9.0}, {3, 0.1}});
  auto zs2 = center_basis(alg2);
  for (int k = 0; k < 2; ++k)
    CHECK((zs[static_cast<size_t>(k)].block(k) - zs2[static_cast<size_t>(k)].block(k))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("predicates and vectorization") {
  AlgElement p = from_entries(m2(), {mat2(0.5, 0.5, 0.5, 0.5)});
  CHECK(is_projection(p));
  CHECK(is_psd(p));
  CHECK(is_hermitian(p));
  CHECK(is_partial_isometry(from_entries(m2(), {mat2(0, 1, 0, 0)})));
  CHECK_FALSE(is_projection(from_entries(m2(), {mat2(2, 0, 0, 0)})));

  std::mt19937_64 rng(17);
  FiniteVNA alg({{2, 1.0}, {3, 2.0}});
  AlgElement x = random_element(alg, rng);
  CHECK(inf_norm(devectorize(alg, vectorize(x)) - x) == 0.0);

  // structural errors
  CHECK_THROWS_AS(AlgElement(alg, {Matrix::Zero(2, 2)}), shape_error);
  CHECK_THROWS_AS(FiniteVNA({{0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteVNA({{2, -1.0}}), std::invalid_argument);
}
