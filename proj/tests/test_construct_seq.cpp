#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kicked/construct_seq.hpp"
#include "kicked/dyadic.hpp"

#include <cmath>
#include <numbers>

using namespace kicked;

TEST_CASE("trace-annihilating rotation") {
  // R(beta) is traceless after R(pi/2 - beta), up to the pi ambiguity.
  for (double beta : {0.0, 0.3, 1.0, -1.2}) {
    const double alpha = trace_annihilating_angle(rotation(beta));
    CHECK(std::abs(std::remainder(alpha - (std::numbers::pi / 2 - beta), std::numbers::pi)) < 1e-12);
    CHECK(std::abs((rotation(alpha) * rotation(beta)).trace()) < 1e-12);
  }
  // H(1): 2 cos(alpha) + sin(alpha) = 0, so alpha = -atan 2 up to pi.
  const double alpha = trace_annihilating_angle(shear(1.0));
  CHECK(std::abs(std::remainder(alpha + std::atan(2.0), std::numbers::pi)) < 1e-12);
  CHECK(std::abs((rotation(alpha) * shear(1.0)).trace()) < 1e-12);
  // A traceless real unimodular matrix squares to -I.
  const Mat2R x = trace_annihilating_rotation(shear(3.0)) * shear(3.0);
  CHECK(op_norm(x * x + Mat2R::identity()) < 1e-12);
}

TEST_CASE("kick schedule") {
  const SeqConstruction s({0.5, 1.0, 1.5, 2.0});
  const Mat2R r1 = s.rotation(1), r2 = s.rotation(2), r3 = s.rotation(3);
  const Mat2R expected[] = {r1, r2 * r1, r1, r3 * r2 * r1, r1, r2 * r1, r1, s.rotation(4) * r3 * r2 * r1, r1};
  for (std::uint64_t n = 1; n <= 9; ++n) CHECK(op_norm(s.kick(n) - expected[n - 1]) < 1e-14);
  CHECK(s.rotation(5) == Mat2R::identity());
  CHECK(s.angle(7) == 0.0);
  CHECK_THROWS_AS(SeqConstruction({1.0, -2.0}), std::invalid_argument);
}

TEST_CASE("square defects and the recurrence") {
  const SeqConstruction s({0.3, 0.8, 1.7, 2.9, 4.1});
  // X traceless with det 1 gives X^2 = -I; in double the residual is
  // rounding times ||A_k(t_k)||^2, which grows like t_k^(2^k).
  for (std::size_t k = 1; k <= s.size(); ++k) {
    const double norm = std::exp(s.a_matrix(k, s.targets()[k - 1]).log_norm());
    CHECK(s.square_defect(k) <= 1e-14 * std::max(1.0, norm * norm));
    if (norm < 1e3) CHECK(s.square_defect(k) <= 1e-9);
  }
  // A_{n+1} = (R_n A_n)^2 from a plain double recurrence.
  for (double t : {0.25, 1.0, 2.2}) {
    Mat2R a = shear(t);
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto scaled = s.a_matrix(n, t);
      CHECK(op_norm(scaled.matrix() - a) <= 1e-10 * std::max(1.0, op_norm(a)));
      const Mat2R x = s.rotation(n) * a;
      a = x * x;
    }
  }
  // P_{2^m}(t) = R_{m+1} A_{m+1}(t).
  const KickSource kicks = s.kick_source();
  for (double t : {0.3, 1.1}) {
    Mat2R p = Mat2R::identity();
    for (std::uint64_t n = 1; n <= 16; ++n) {
      p = kicks.at(n) * shear(t) * p;
      if ((n & (n - 1)) == 0) {
        const std::size_t m = static_cast<std::size_t>(std::countr_zero(n));
        const Mat2R expected = s.rotation(m + 1) * s.a_matrix(m + 1, t).matrix();
        CHECK(op_norm(p - expected) <= 1e-9 * std::max(1.0, op_norm(p)));
      }
    }
  }
}

TEST_CASE("bounded at the targets") {
  const SeqConstruction s({0.7, 1.3, 2.1, 3.4});
  for (std::size_t k = 1; k <= s.size(); ++k) {
    const auto r = verify_bounded(s, k, std::uint64_t{1} << 15, std::exp(1e-6));
    CHECK(r.horizon_sufficient);
    CHECK(r.stabilized);
    CHECK(std::isfinite(r.sup_log_norm));
  }
  CHECK(!verify_bounded(s, 1, 2, 1.0).horizon_sufficient);
  // Off the targets the products grow.
  const auto off = verify_bounded_at(s, 5.0, std::uint64_t{1} << 15, std::exp(1e-6));
  CHECK(!off.stabilized);
  CHECK(off.late_max > off.early_max + 1.0);
  CHECK_THROWS_AS(verify_bounded(s, 9, 100, 2.0), std::out_of_range);
}
