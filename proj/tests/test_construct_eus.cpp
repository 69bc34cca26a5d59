#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kicked/construct_eus.hpp"
#include "kicked/eus_io.hpp"

#include <cmath>

using namespace kicked;

namespace {

const EusBuild& shared_build() {
  static const EusBuild build = [] {
    EusOptions o;
    o.depth = 3;
    return build_eus(o);
  }();
  return build;
}

// Plain product A M(c) A evaluated entrywise, no polynomial machinery.
Mat2<double> a0_at(double c0, double t) { return {1.0 + c0 * t, t * (2.0 + c0 * t), c0, 1.0 + c0 * t}; }

}  // namespace

TEST_CASE("good region") {
  const auto chain = poly_chain<double>({-1.0});
  const auto pieces = good_region(chain[0], {0.0, 10.0});
  REQUIRE(pieces.size() == 1);
  CHECK(pieces[0].interval.lo == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(pieces[0].interval.hi == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(pieces[0].min_margin > 0.0);

  // tr = t^2 - 3 is in (-2, 2) for 1 < t < sqrt 5.
  const PolyMat2<double> m{Poly<double>(std::vector<double>{-3.0, 0.0, 1.0}), Poly<double>(1), Poly<double>(0),
                           Poly<double>(0)};
  const IntervalSet s = good_region_set(m, {0.0, 3.0});
  REQUIRE(s.intervals().size() == 1);
  CHECK(s.intervals()[0].lo == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.intervals()[0].hi == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));

  CHECK_THROWS(good_region(PolyMat2<double>{Poly<double>(1), Poly<double>(0), Poly<double>(0), Poly<double>(1)}, {0.0, 1.0}));
}

TEST_CASE("polynomial chain") {
  const std::vector<double> c{-1.0, -0.05, -0.001};
  const auto chain = poly_chain(c);
  REQUIRE(chain.size() == 3);
  for (double t : {0.0, 0.4, 1.3}) {
    Mat2<double> a = a0_at(c[0], t);
    for (std::size_t n = 0; n < chain.size(); ++n) {
      const Mat2<double> p = evaluate(chain[n], t);
      CHECK(std::abs(p.a11 - a.a11) <= 1e-9 * (1.0 + std::abs(a.a11)));
      CHECK(std::abs(p.a12 - a.a12) <= 1e-9 * (1.0 + std::abs(a.a12)));
      CHECK(std::abs(p.a21 - a.a21) <= 1e-9 * (1.0 + std::abs(a.a21)));
      CHECK(std::abs(p.a22 - a.a22) <= 1e-9 * (1.0 + std::abs(a.a22)));
      if (n + 1 < chain.size()) a = a * Mat2<double>{1.0, 0.0, c[n + 1], 1.0} * a;
    }
  }
  for (const auto& a : chain) {
    CHECK(det_defect(a) <= 1e-12);
    CHECK(degree_pattern(a).upper_right_dominating());
  }
  // deg A_n = 2^(n+1) in the upper right entry.
  CHECK(degree_pattern(chain[2]).d12 == 8);
}

TEST_CASE("kick step trace identity") {
  const auto chain = poly_chain<double>({-1.0});
  const auto next = kick_step(chain[0], -0.1, 1e-10);
  const Poly<double> lhs = next.a11 + next.a22;
  const Poly<double> tr = chain[0].a11 + chain[0].a22;
  const Poly<double> rhs = tr * (tr + chain[0].a12 * -0.1) - Poly<double>(2);
  for (std::size_t i = 0; i < std::max(lhs.size(), rhs.size()); ++i)
    CHECK(lhs.coefficient(i) == doctest::Approx(rhs.coefficient(i)).epsilon(1e-12));
}

TEST_CASE("pointwise chain and traces") {
  PrecisionGuard g(50);
  const std::vector<BigReal> c{BigReal(-1), BigReal("-0.01"), BigReal("-0.0001")};
  const auto chain = poly_chain(c);
  for (const char* ts : {"0.5", "1.25", "7"}) {
    const BigReal t(ts);
    const auto a = a_chain(c, t, 2);
    for (int n = 0; n <= 2; ++n) {
      const Mat2B p = evaluate(chain[static_cast<std::size_t>(n)], t);
      const BigReal scale = 1 + abs(a[static_cast<std::size_t>(n)].a12);
      CHECK(to_double(abs(p.a12 - a[static_cast<std::size_t>(n)].a12) / scale) < 1e-40);
      CHECK(to_double(abs(trace_at(c, t, n) - a[static_cast<std::size_t>(n)].trace())) <
            1e-40 * to_double(scale));
    }
  }
}

TEST_CASE("diagonalizers") {
  PrecisionGuard g(50);
  const Mat2B a{BigReal(0), BigReal(1), BigReal(-1), BigReal(0)};  // A_0(1) for c0 = -1
  const auto d = canonical_diagonalizer(a);
  CHECK(to_double(abs(d.lambda.re)) < 1e-45);
  CHECK(to_double(d.lambda.im) == doctest::Approx(1.0));
  CHECK(to_double(reconstruction_error(d, a)) < 1e-40);

  const Mat2B b{BigReal("0.3"), BigReal("1.7"), BigReal("-0.5"), BigReal(0)};  // det = 0.85, rescale
  const BigReal r = sqrt(BigReal("0.85"));
  const Mat2B unit{b.a11 / r, b.a12 / r, b.a21 / r, b.a22 / r};
  const auto du = canonical_diagonalizer(unit);
  CHECK(to_double(reconstruction_error(du, unit)) < 1e-40);
  CHECK_THROWS(canonical_diagonalizer(Mat2B{BigReal(3), BigReal(0), BigReal(0), BigReal(1) / 3}));

  // Small perturbation of A^2 keeps a nearby diagonalizer.
  const Mat2B sq = unit * unit;
  const Mat2B next{sq.a11, sq.a12, sq.a21 + BigReal("1e-8"), sq.a22};
  const BigReal fix = sqrt(next.a11 * next.a22 - next.a12 * next.a21);
  const Mat2B next_unit{next.a11 / fix, next.a12 / fix, next.a21 / fix, next.a22 / fix};
  const auto cont = continue_diagonalizer(du, next_unit);
  REQUIRE(cont.has_value());
  CHECK(to_double(reconstruction_error(*cont, next_unit)) < 1e-30);
  CHECK(to_double(big_abs(cont->lambda - du.lambda * du.lambda)) < 1e-6);
  CHECK(!continue_diagonalizer(du, Mat2B{BigReal(3), BigReal(0), BigReal(0), BigReal(1) / 3}).has_value());
}

TEST_CASE("new window past the floor") {
  PrecisionGuard g(60);
  const std::vector<BigReal> c{BigReal(-1)};
  const auto chain = poly_chain(c);
  const Poly<BigReal> trace = chain[0].a11 + chain[0].a22;  // 2 - 2t
  const auto w = find_new_interval(c, trace, BigReal("0.5"), 1.9);
  CHECK(to_double(w.root) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.window.lo > BigReal("0.5"));
  CHECK(w.window.contains(w.root));
  CHECK(to_double(abs(trace(w.window.hi))) <= 1.9 + 1e-9);
  CHECK(to_double(abs(trace(w.window.lo))) <= 1.9 + 1e-9);
}

TEST_CASE("eps formula") {
  PrecisionGuard g(40);
  const std::vector<EusInterval> w{{BigReal(0), BigReal(3)}, {BigReal(5), BigReal(6)}, {BigReal(9), BigReal("9.5")}};
  CHECK(to_double(eps_for_level(w, 1)) == doctest::Approx(1.0));
  CHECK(to_double(eps_for_level(w, 2)) == doctest::Approx(1.0 / 9.0));
  CHECK(to_double(eps_for_level(w, 3)) == doctest::Approx(0.5 / 27.0));
}

TEST_CASE("build to depth 3") {
  const EusBuild& b = shared_build();
  REQUIRE(b.depth() == 3);
  PrecisionGuard g(b.digits);
  for (const auto& check : check_invariants(b)) {
    INFO(check.name << ": " << check.detail);
    CHECK(check.passed);
  }
  // E_0 for c0 = -1 is the middle third of the good window [0, 2].
  CHECK(to_double(b.windows[0].lo) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(to_double(b.windows[0].hi) == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  for (int n = 1; n <= 3; ++n) {
    CHECK(b.windows[static_cast<std::size_t>(n)].lo > BigReal(n));
    CHECK(b.c[static_cast<std::size_t>(n)] != 0);
  }

  const auto members = sample_members(b, 8);
  REQUIRE(members.size() == 8);
  for (const auto& t : members) {
    CHECK(b.origin(t) >= 0);
    const auto r = verify_membership(b, t, 1u << 12);
    INFO("t = " << r.t_approx);
    CHECK(r.stabilized);
    CHECK(r.traces_elliptic);
    CHECK(r.dyadic_mismatch < 1e-6);
    CHECK(std::isfinite(r.log_bound));
  }
  const BigReal outside = b.windows.back().hi + 1;
  CHECK(b.origin(outside) == -1);
  CHECK_THROWS_AS(verify_membership(b, outside, 1u << 12), std::invalid_argument);
}

TEST_CASE("JSON round trip") {
  const EusBuild& b = shared_build();
  const auto j = eus_to_json(b);
  const EusBuild back = eus_from_json(j);
  CHECK(back.digits == b.digits);
  CHECK(back.depth() == b.depth());
  PrecisionGuard g(b.digits);
  for (std::size_t n = 0; n < b.c.size(); ++n) CHECK(back.c[n] == b.c[n]);
  CHECK(back.e.back() == b.e.back());
  CHECK(eus_to_json(back) == j);
  for (const auto& t : sample_members(b, 3)) {
    const auto x = verify_membership(b, t, 1u << 10);
    const auto y = verify_membership(back, t, 1u << 10);
    CHECK(x.stabilized == y.stabilized);
    CHECK(x.late_max == y.late_max);
  }
}

TEST_CASE("precision cap aborts with the finished prefix") {
  EusOptions o;
  o.depth = 3;
  o.max_digits = 100;
  try {
    build_eus(o);
    FAIL("expected an abort");
  } catch (const EusAbort& e) {
    CHECK(e.failed_level() >= 1);
    CHECK(e.partial().depth() == e.failed_level() - 1);
  }
}
