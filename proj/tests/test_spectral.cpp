#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "random_laws.hpp"
#include "whlab/errors.hpp"
#include "whlab/spectral.hpp"
#include "whlab/uniqueness.hpp"

using namespace whlab;

namespace {

// Max over a unit-circle grid of |psi_r - A * B|, the identity the split
// must reproduce.
double product_residual(const Factorisation& f, int grid = 512) {
  FactorTransform a = FactorTransform::from_law(f.ascending);
  FactorTransform b = FactorTransform::from_law(f.descending);
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double z = -M_PI + 2.0 * M_PI * i / grid;
    const complex lhs = f.rescaled.psi_killed(z, f.killing);
    worst = std::max(worst, std::abs(lhs - a.evaluate(z) * b.evaluate(-z)));
  }
  return worst;
}

}  // namespace

TEST_CASE("polynomial form of the killed symbol") {
  StepLaw ssrw({{-1, 0.5}, {1, 0.5}});
  LaurentPolynomial p = to_polynomial(ssrw, 1.0);
  CHECK(p.low == -1);
  CHECK(p.high == 1);
  CHECK(p.degree() == 2);
  CHECK(p.at(-1) == doctest::Approx(-0.5));
  CHECK(p.at(0) == doctest::Approx(1.0));
  CHECK(p.at(1) == doctest::Approx(-0.5));
  // evaluate_unit returns s^m P(s)-style values: 1 - r phi at e^{iz}.
  CHECK(p.evaluate_unit(M_PI).real() == doctest::Approx(2.0));
  CHECK(p.evaluate_unit(0.0).real() == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(to_polynomial(ssrw, 0.0), parameter_error);
  CHECK_THROWS_AS(to_polynomial(ssrw, 1.5), parameter_error);
}

TEST_CASE("symmetric walk without killing: double root at one") {
  StepLaw ssrw({{-1, 0.5}, {1, 0.5}});
  Factorisation f = factorise(ssrw, 1.0);
  CHECK(f.eta == 1);
  CHECK(f.roots.on_circle.size() == 2);
  CHECK(f.roots.inside.empty());
  CHECK(f.roots.outside.empty());
  CHECK(f.roots.mean_sign == 0);

  CHECK(f.ascending.mass(1) == doctest::Approx(1.0));
  CHECK(f.ascending.defect() == doctest::Approx(0.0));
  CHECK(f.descending.mass(0) == doctest::Approx(0.5));
  CHECK(f.descending.mass(1) == doctest::Approx(0.5));
  CHECK(f.descending.defect() == doctest::Approx(0.0));
  CHECK(product_residual(f) < 1e-12);
}

TEST_CASE("symmetric walk at killing one half: algebraic roots") {
  // s^1 (1 - 0.5 phi(s)) = -(1/4)(s^2 - 4s + 1): roots 2 +- sqrt(3).
  StepLaw ssrw({{-1, 0.5}, {1, 0.5}});
  Factorisation f = factorise(ssrw, 0.5);
  REQUIRE(f.roots.inside.size() == 1);
  REQUIRE(f.roots.outside.size() == 1);
  CHECK(f.roots.on_circle.empty());

  const double sqrt3 = 1.7320508075688772;
  CHECK(std::abs(f.roots.inside[0] - complex(2.0 - sqrt3)) < 1e-12);
  CHECK(std::abs(f.roots.outside[0] - complex(2.0 + sqrt3)) < 1e-12);

  CHECK(f.ascending.mass(1) == doctest::Approx(2.0 - sqrt3).epsilon(1e-12));
  CHECK(f.ascending.defect() ==
        doctest::Approx(sqrt3 - 1.0).epsilon(1e-12));
  CHECK(f.descending.mass(0) ==
        doctest::Approx((2.0 - sqrt3) / 4.0).epsilon(1e-12));
  CHECK(f.descending.mass(1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(f.descending.defect() ==
        doctest::Approx(0.6830127018922193).epsilon(1e-12));
  CHECK(product_residual(f) < 1e-12);
}

TEST_CASE("downward drift sends the circle root to the descending side") {
  StepLaw drift({{-1, 0.7}, {1, 0.3}});
  Factorisation f = factorise(drift, 1.0);
  CHECK(f.roots.mean_sign == -1);
  CHECK(f.roots.on_circle.size() == 1);

  CHECK(f.ascending.mass(1) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(f.ascending.defect() == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(f.descending.mass(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.descending.mass(1) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(f.descending.is_proper(1e-12));
  CHECK(product_residual(f) < 1e-12);
}

TEST_CASE("upward drift mirrors the assignment") {
  StepLaw drift({{-1, 0.3}, {1, 0.7}});
  Factorisation f = factorise(drift, 1.0);
  CHECK(f.roots.mean_sign == 1);
  CHECK(f.ascending.mass(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.ascending.is_proper(1e-12));
  CHECK(f.descending.mass(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.descending.mass(1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.descending.defect() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(product_residual(f) < 1e-12);
}

TEST_CASE("asymmetric reach hits the golden ratio") {
  // Steps -2 and +1 with equal weight: the deflated cubic factors through
  // s^2 - s - 1, so the surviving roots are (1 +- sqrt 5)/2.
  StepLaw law({{-2, 0.5}, {1, 0.5}});
  Factorisation f = factorise(law, 1.0);
  const double sqrt5 = 2.23606797749979;
  CHECK(f.roots.mean_sign == -1);
  REQUIRE(f.roots.inside.size() == 1);
  REQUIRE(f.roots.outside.size() == 1);
  CHECK(std::abs(f.roots.inside[0] - complex((1.0 - sqrt5) / 2.0)) < 1e-12);
  CHECK(std::abs(f.roots.outside[0] - complex((1.0 + sqrt5) / 2.0)) < 1e-12);

  CHECK(f.ascending.mass(1) ==
        doctest::Approx((sqrt5 - 1.0) / 2.0).epsilon(1e-12));
  CHECK(f.ascending.defect() ==
        doctest::Approx((3.0 - sqrt5) / 2.0).epsilon(1e-12));
  CHECK(f.descending.mass(0) ==
        doctest::Approx((3.0 - sqrt5) / 4.0).epsilon(1e-12));
  CHECK(f.descending.mass(1) ==
        doctest::Approx((sqrt5 - 1.0) / 4.0).epsilon(1e-12));
  CHECK(f.descending.mass(2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.descending.is_proper(1e-12));
  CHECK(product_residual(f) < 1e-12);
}

TEST_CASE("one-sided upward walk has a constant descending factor") {
  StepLaw up({{0, 0.3}, {1, 0.7}});
  Factorisation f = factorise(up, 0.6);
  // M = 0 exactly when the first step is 0, weight r p_0.
  CHECK(f.descending.mass(0) == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(f.descending.defect() == doctest::Approx(0.82).epsilon(1e-12));
  // H = 1 after a geometric number of zero steps.
  CHECK(f.ascending.mass(1) ==
        doctest::Approx(0.6 * 0.7 / (1.0 - 0.18)).epsilon(1e-12));
  CHECK(product_residual(f) < 1e-12);
}

TEST_CASE("span is removed before factorising") {
  StepLaw sparse({{-3, 0.2}, {0, 0.3}, {6, 0.5}});
  Factorisation f = factorise(sparse, 1.0);
  CHECK(f.eta == 3);
  CHECK(f.rescaled.down_reach() == 1);
  CHECK(f.rescaled.up_reach() == 2);
  const double sqrt26 = std::sqrt(2.6);
  CHECK(f.ascending.mass(1) ==
        doctest::Approx(1.0 - 2.0 / (1.0 + sqrt26)).epsilon(1e-10));
  CHECK(f.descending.mass(1) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(product_residual(f) < 1e-12);
}

TEST_CASE("random ensemble: split sizes, realness, residual") {
  std::mt19937_64 rng(20260815);
  for (int trial = 0; trial < 30; ++trial) {
    StepLaw law = testsupport::random_span1_law(rng, 6, 6);
    const double r = (trial % 3 == 0) ? 1.0 : 0.4 + 0.05 * (trial % 10);
    Factorisation f = factorise(law, r);

    const int m = f.rescaled.down_reach();
    const int n = f.rescaled.up_reach();
    const std::size_t circle = f.roots.on_circle.size();
    CHECK(f.poly.degree() == m + n);
    if (r < 1.0) CHECK(circle == 0);
    // Root counts per side, with circle copies assigned by drift.
    std::size_t desc_roots = f.roots.inside.size();
    std::size_t asc_roots = f.roots.outside.size();
    if (f.roots.mean_sign > 0) asc_roots += circle;
    if (f.roots.mean_sign < 0) desc_roots += circle;
    if (f.roots.mean_sign == 0 && circle == 2) {
      asc_roots += 1;
      desc_roots += 1;
    }
    CHECK(desc_roots == static_cast<std::size_t>(m));
    CHECK(asc_roots == static_cast<std::size_t>(n));

    CHECK(f.ascending.mass(0) == 0.0);
    CHECK(f.ascending.max_support() <= n);
    CHECK(f.descending.max_support() <= m);
    CHECK(product_residual(f) < 1e-9);
  }
}

TEST_CASE("factor totals respect the killing regime") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    StepLaw law = testsupport::random_span1_law(rng, 4, 4);
    Factorisation f = factorise(law, 1.0);
    // Without killing at least one ladder is proper.
    CHECK(std::min(f.ascending.defect(), f.descending.defect()) < 1e-9);
    Factorisation killed = factorise(law, 0.8);
    // With killing both are defective.
    CHECK(killed.ascending.defect() > 1e-6);
    CHECK(killed.descending.defect() > 1e-6);
  }
}
