#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kicked/dyadic.hpp"

#include <complex>
#include <random>

using namespace kicked;
using namespace std::complex_literals;
using C = std::complex<double>;

namespace {

// Plain left-multiplied product of the first K kicks, no rescaling.
Mat2C brute_product(const DyadicKicks& kicks, C z, std::uint64_t count, std::uint64_t first = 1) {
  Mat2C p = Mat2C::identity();
  for (std::uint64_t k = first; k < first + count; ++k) p = to_complex(kicks.kick(k)) * shear(z) * p;
  return p;
}

double distance(const ScaledProduct<C>& a, const Mat2C& b) {
  const double nb = op_norm(b);
  return op_norm(a.unit() - b * C(1.0 / nb)) + std::abs(a.log_norm() - std::log(nb));
}

DyadicKicks random_kicks(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, -0.01);
  std::vector<double> c;
  for (int j = 0; j < count; ++j) c.push_back(u(rng));
  return DyadicKicks(c);
}

}  // namespace

TEST_CASE("ruler") {
  CHECK(ruler(1) == 0);
  CHECK(ruler(84) == 2);
  CHECK(ruler(8) == 3);
  const int pattern[] = {0, 1, 0, 2, 0, 1, 0, 3, 0, 1, 0, 2, 0, 1, 0};
  for (int k = 1; k <= 15; ++k) CHECK(ruler(static_cast<std::uint64_t>(k)) == pattern[k - 1]);
}

TEST_CASE("ruler self-similarity") {
  const DyadicKicks kicks = random_kicks(1, 12);
  for (std::uint64_t k = 1; k <= 1000; ++k) {
    const std::uint64_t shifted = k + (std::uint64_t{2} << ruler(k));
    if (ruler(shifted) == ruler(k)) CHECK(kicks.kick(shifted) == kicks.kick(k));
  }
  for (int m = 1; m <= 9; ++m) {
    const std::uint64_t n = (std::uint64_t{1} << m) - 1;
    for (std::uint64_t k = 1; k <= n; ++k) CHECK(ruler(k) == ruler(n + 1 - k));
  }
}

TEST_CASE("coefficients") {
  CHECK_THROWS_AS(DyadicKicks({-1.0, 0.0}), std::invalid_argument);
  const DyadicKicks finite({-1.0, -0.5});
  CHECK_THROWS_AS(finite.coefficient(2), std::out_of_range);
  const DyadicKicks tailed({-1.0}, 0.0);
  CHECK(tailed.kick(2) == Mat2R::identity());
}

TEST_CASE("A matrices") {
  const double c0 = -0.3;
  const DyadicKicks kicks({c0, -0.2, -0.1, -0.05});
  const C z = 0.8 + 0.1i;
  const DyadicState<C> state(kicks, z, 3);
  CHECK(op_norm(state.a(-1).matrix() - shear(z)) < 1e-14);
  const Mat2C a0{1.0 + c0 * z, z * (2.0 + c0 * z), c0, 1.0 + c0 * z};
  CHECK(op_norm(state.a(0).matrix() - a0) < 1e-14);
  CHECK(std::abs(state.a(0).matrix().trace() - (2.0 + 2.0 * c0 * z)) < 1e-14);
  for (int m = 0; m < 3; ++m) {
    const Mat2C next = state.a(m).matrix() * to_complex(lower_shear(kicks.coefficient(m + 1))) * state.a(m).matrix();
    CHECK(distance(state.a(m + 1), next) <= 1e-9);
  }
  // prod_{k <= 2^m} Phi_k H = M(c_m) A_{m-1}.
  for (int m = 1; m <= 3; ++m) {
    const Mat2C direct = brute_product(kicks, z, std::uint64_t{1} << m);
    const Mat2C block = to_complex(lower_shear(kicks.coefficient(m))) * state.a(m - 1).matrix();
    CHECK(op_norm(direct - block) <= 1e-12 * op_norm(direct));
  }
}

TEST_CASE("partial products match the direct product") {
  const DyadicKicks kicks = random_kicks(7, 14);
  for (C z : {C(0.9), 0.4 + 0.3i}) {
    const DyadicState<C> state(kicks, z, depth_for(4096));
    ScaledProduct<C> direct;
    for (std::uint64_t k = 1; k <= 4096; ++k) {
      direct.left_multiply(to_complex(kicks.kick(k)) * shear(z));
      if (k <= 600 || k % 97 == 0 || (k & (k - 1)) == 0 || k == 4096)
        CHECK(relative_distance(state.partial_product(k), direct) <= 1e-9);
    }
  }
}

TEST_CASE("factor ordering: smallest block leftmost") {
  const DyadicKicks kicks = random_kicks(3, 8);
  const C z = 1.1;
  const DyadicState<C> state(kicks, z, 6);
  for (std::uint64_t k : {3u, 5u, 6u, 12u, 84u}) {
    const Mat2C direct = brute_product(kicks, z, k);
    Mat2C left = Mat2C::identity(), right = Mat2C::identity();
    for (std::uint64_t rest = k; rest != 0; rest &= rest - 1) {
      const Mat2C f = state.block(std::countr_zero(rest)).matrix();
      left = left * f;
      right = f * right;
    }
    CHECK(op_norm(left - direct) <= 1e-10 * op_norm(direct));
    CHECK(op_norm(right - direct) > 1e-3 * op_norm(direct));
  }
  // 84 = 2^2 + 2^4 + 2^6: M(c2) A1 M(c4) A3 M(c6) A5.
  const Mat2C spelled = to_complex(lower_shear(kicks.coefficient(2))) * state.a(1).matrix() *
                        to_complex(lower_shear(kicks.coefficient(4))) * state.a(3).matrix() *
                        to_complex(lower_shear(kicks.coefficient(6))) * state.a(5).matrix();
  CHECK(distance(state.partial_product(84), spelled) <= 1e-10);
}

TEST_CASE("block shift for m < l") {
  const DyadicKicks kicks = random_kicks(9, 10);
  const C z = 0.7;
  for (int l = 1; l <= 6; ++l) {
    const std::uint64_t base = std::uint64_t{1} << l;
    for (int m = 0; m < l; ++m) {
      const std::uint64_t len = std::uint64_t{1} << m;
      const Mat2C shifted = brute_product(kicks, z, len, base + 1);
      const Mat2C start = brute_product(kicks, z, len);
      CHECK(op_norm(shifted - start) <= 1e-12 * op_norm(start));
    }
    // At m = l the last kick is M(c_{l+1}) instead of M(c_l).
    const Mat2C shifted = brute_product(kicks, z, base, base + 1);
    const Mat2C start = brute_product(kicks, z, base);
    CHECK(op_norm(shifted - start) > 1e-6);
  }
}

TEST_CASE("free functions and real parameters") {
  const DyadicKicks kicks = random_kicks(5, 10);
  for (std::uint64_t k : {1u, 2u, 7u, 100u, 513u, 1000u}) {
    const auto fast = partial_product(kicks, 1.3, k);
    const auto slow = direct_product(kicks, 1.3, k);
    CHECK(relative_distance(fast, slow) <= 1e-9);
  }
  CHECK(op_norm(partial_product(kicks, 0.5, 1).matrix() - lower_shear(kicks.coefficient(0)) * shear(0.5)) < 1e-15);
}
