#pragma once

// Ruler-ordered kicks Phi_k = lower_shear(c_{ruler(k)}) and the doubling
// recurrence A_{-1} = H(z), A_{m+1} = A_m M(c_{m+1}) A_m.
//
// Facts the code relies on (all checked against direct products in tests):
//   prod_{k <= 2^m} Phi_k H(z) = M(c_m) A_{m-1}(z)
// and, writing K = 2^{j_1} + ... + 2^{j_L} with j_1 < ... < j_L,
//   prod_{k <= K} Phi_k H(z) = F_{j_1} F_{j_2} ... F_{j_L},  F_j = M(c_j) A_{j-1}(z),
// i.e. the smallest power stands leftmost. The block of the largest power
// consists of the earliest kicks and acts first.

#include "kicked/errors.hpp"
#include "kicked/kicks.hpp"
#include "kicked/scaled_product.hpp"

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kicked {

/// 2-adic valuation of k >= 1.
inline unsigned ruler(std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("ruler needs k >= 1");
  return static_cast<unsigned>(std::countr_zero(k));
}

/// Coefficients c_0, c_1, ... of the ruler-ordered kicks. Every listed
/// coefficient must be nonzero. An optional tail value stands in for all
/// coefficients past the list; a zero tail (M = identity) is how a finite
/// construction is continued beyond its last level.
template <class R>
class BasicDyadicKicks {
 public:
  BasicDyadicKicks() = default;
  explicit BasicDyadicKicks(std::vector<R> coefficients, std::optional<R> tail = std::nullopt)
      : c_(std::move(coefficients)), tail_(std::move(tail)) {
    for (std::size_t j = 0; j < c_.size(); ++j)
      if (c_[j] == 0) throw std::invalid_argument("dyadic coefficient c_" + std::to_string(j) + " is zero");
  }

  const R& coefficient(std::size_t j) const {
    if (j < c_.size()) return c_[j];
    if (tail_) return *tail_;
    throw std::out_of_range("dyadic coefficient c_" + std::to_string(j) + " is not provided");
  }
  bool has(std::size_t j) const { return j < c_.size() || tail_.has_value(); }

  /// Phi_k = lower_shear(c_{ruler(k)}).
  Mat2<R> kick(std::uint64_t k) const { return lower_shear(coefficient(ruler(k))); }

  const std::vector<R>& coefficients() const { return c_; }
  const std::optional<R>& tail() const { return tail_; }

 private:
  std::vector<R> c_;
  std::optional<R> tail_;
};

using DyadicKicks = BasicDyadicKicks<double>;

/// Kick source view of double-precision dyadic kicks.
inline KickSource dyadic_kick_source(const DyadicKicks& kicks) {
  return KickSource("dyadic", [kicks](std::uint64_t k) { return kicks.kick(k); });
}

/// A_{-1..depth}(z) for one kick sequence and one parameter, filled once.
/// T is the matrix scalar (double, complex, BigReal); R the coefficient type.
template <class T, class R = RealOf<T>>
class DyadicState {
 public:
  DyadicState(const BasicDyadicKicks<R>& kicks, T z, int depth) : kicks_(&kicks), z_(std::move(z)) {
    if (depth < -1) throw std::invalid_argument("dyadic depth must be >= -1");
    a_.reserve(static_cast<std::size_t>(depth + 2));
    a_.emplace_back(shear(z_));
    for (int m = 0; m <= depth; ++m) {
      const ScaledProduct<T>& prev = a_.back();
      a_.push_back(prev * ScaledProduct<T>(lower_shear(T(kicks.coefficient(static_cast<std::size_t>(m))))) * prev);
    }
  }

  int depth() const { return static_cast<int>(a_.size()) - 2; }

  /// A_m(z) for -1 <= m <= depth.
  const ScaledProduct<T>& a(int m) const {
    if (m < -1 || m > depth()) throw std::out_of_range("A_" + std::to_string(m) + " not cached");
    return a_[static_cast<std::size_t>(m + 1)];
  }

  /// M(c_j) A_{j-1}(z), the product over one dyadic block of length 2^j.
  ScaledProduct<T> block(int j) const {
    ScaledProduct<T> f = a(j - 1);
    f.left_multiply(lower_shear(T(kicks_->coefficient(static_cast<std::size_t>(j)))));
    return f;
  }

  /// prod_{k <= K} Phi_k H(z) through the binary decomposition of K.
  ScaledProduct<T> partial_product(std::uint64_t count) const {
    if (count < 1) throw std::invalid_argument("partial product needs K >= 1");
    if (std::bit_width(count) - 1 > static_cast<unsigned>(depth() + 1))
      throw std::out_of_range("partial product beyond cached depth");
    ScaledProduct<T> result;
    bool first = true;
    for (std::uint64_t rest = count; rest != 0; rest &= rest - 1) {
      const int j = std::countr_zero(rest);
      if (first) {
        result = block(j);
        first = false;
      } else {
        result = result * block(j);
      }
    }
    return result;
  }

 private:
  const BasicDyadicKicks<R>* kicks_;
  T z_;
  std::vector<ScaledProduct<T>> a_;
};

/// Depth needed so that partial_product(K) is available.
inline int depth_for(std::uint64_t count) { return static_cast<int>(std::bit_width(count)) - 2; }

template <class T, class R>
ScaledProduct<T> partial_product(const BasicDyadicKicks<R>& kicks, const T& z, std::uint64_t count) {
  return DyadicState<T, R>(kicks, z, depth_for(count)).partial_product(count);
}

/// prod_{k <= K} Phi_k H(z), one factor at a time.
template <class T, class R>
ScaledProduct<T> direct_product(const BasicDyadicKicks<R>& kicks, const T& z, std::uint64_t count) {
  const Mat2<T> h = shear(z);
  ScaledProduct<T> p;
  for (std::uint64_t k = 1; k <= count; ++k) p.left_multiply(lower_shear(T(kicks.coefficient(ruler(k)))) * h);
  return p;
}

}  // namespace kicked
