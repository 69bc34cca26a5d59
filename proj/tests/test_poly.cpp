#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kicked/construct_eus.hpp"
#include "kicked/poly.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace kicked;
using P = Poly<double>;

TEST_CASE("arithmetic and evaluation") {
  const P t = P::t();
  const P f = (t - P(1)) * (t - P(3));
  CHECK(f.coefficients() == std::vector<double>{3.0, -4.0, 1.0});
  CHECK(f(2.0) == -1.0);
  CHECK(f.degree() == 2);
  CHECK(f.leading() == 1.0);
  CHECK((f - f).degree() == -1);
  CHECK((f * 2.0)(5.0) == 16.0);
  CHECK((-f)(0.0) == -3.0);
}

TEST_CASE("degree ignores coefficients below the trim level") {
  const P p(std::vector<double>{1.0, 2.0, 1e-20});
  CHECK(p.degree() == 1);
  CHECK(p.leading() == 2.0);
}

TEST_CASE("cauchy bound encloses every real root") {
  const P p(std::vector<double>{1.0, -4.0, 0.0, 2.0});  // 2t^3 - 4t + 1
  CHECK(p.cauchy_bound() == doctest::Approx(3.0));
  for (double r : isolate_roots<double>(p, -10.0, 10.0, 200, 1e-12)) CHECK(std::abs(r) <= 3.0);
}

TEST_CASE("root isolation") {
  const P t = P::t();
  const P f = (t - P(1)) * (t - P(3));
  const auto r = isolate_roots<double>(f, 0.0, 4.0, 16, 1e-12);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r[1] == doctest::Approx(3.0).epsilon(1e-10));

  // Chebyshev T_8: eight roots cos((2k-1) pi / 16) inside (-1, 1).
  P a(1), b = t;
  for (int n = 2; n <= 8; ++n) {
    P c = P(2) * t * b - a;
    a = b;
    b = c;
  }
  const auto roots = isolate_roots<double>(b, -1.0, 1.0, 64, 1e-13);
  REQUIRE(roots.size() == 8);
  for (int k = 1; k <= 8; ++k)
    CHECK(roots[8 - k] == doctest::Approx(std::cos((2 * k - 1) * std::numbers::pi / 16)).epsilon(1e-10));

  // A double root shows up through the dip refinement or an exact zero.
  const P sq = (t - P(2)) * (t - P(2)) - P::constant(1e-6);
  CHECK(isolate_roots<double>(sq, 0.0, 4.0, 4, 1e-12).size() == 2);
}

TEST_CASE("trace of A_0 for c0 = -1") {
  const auto a0 = poly_chain<double>({-1.0}).front();
  CHECK(a0.trace().coefficients() == std::vector<double>{2.0, -2.0});
  // Hand product H(t) M(c) H(t) = ((1+ct, t(2+ct)), (c, 1+ct)).
  CHECK(a0.a11.coefficients() == std::vector<double>{1.0, -1.0});
  CHECK(a0.a12.coefficients() == std::vector<double>{0.0, 2.0, -1.0});
  CHECK(a0.a21.coefficients() == std::vector<double>{-1.0});
  const auto zero = isolate_roots<double>(a0.trace(), 0.0, 4.0, 8, 1e-12);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0] == doctest::Approx(1.0));
}

TEST_CASE("polynomial evaluation matches the matrix recurrence") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uc(-0.6, -0.05), ut(0.0, 2.0);
  std::vector<double> c;
  for (int j = 0; j <= 5; ++j) c.push_back(uc(rng));
  const auto chain = poly_chain(c);  // degrees up to 2^7 - 1
  for (int i = 0; i < 50; ++i) {
    const double t = ut(rng);
    Mat2R a = shear(t);
    for (std::size_t n = 0; n < c.size(); ++n) {
      a = a * lower_shear(c[n]) * a;
      const auto poly = evaluate(chain[n], t);
      // Horner rounding is bounded by the evaluation of |coefficients|;
      // the products themselves round relative to ||a||^2.
      double magnitude = 0.0;
      const Poly<double> tr = chain[n].trace();
      for (std::size_t i = tr.size(); i-- > 0;) magnitude = magnitude * t + std::abs(tr.coefficient(i));
      const double scale = std::max({1.0, magnitude, op_norm(a) * op_norm(a)});
      CHECK(std::abs(poly.trace() - a.trace()) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("BigReal trim level follows the precision") {
  PrecisionGuard g(100);
  const Poly<BigReal> p(std::vector<BigReal>{BigReal(1), BigReal("1e-60")});
  CHECK(p.degree() == 1);
  const Poly<BigReal> q(std::vector<BigReal>{BigReal(1), BigReal("1e-90")});
  CHECK(q.degree() == 0);
}
