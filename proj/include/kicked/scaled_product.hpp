#pragma once

#include "kicked/errors.hpp"
#include "kicked/mat2.hpp"

#include <cmath>

namespace kicked {

/// Neumaier-compensated running sum.
template <class R>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(R v) : sum_(std::move(v)) {}

  void add(const R& x) {
    const R t = sum_ + x;
    if (abs_of(sum_) >= abs_of(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  R value() const { return sum_ + comp_; }

 private:
  static R abs_of(const R& x) { return x < 0 ? R(-x) : x; }
  R sum_{0};
  R comp_{0};
};

/// exp(lognorm) * m with op_norm(m) == 1: a product of unimodular matrices
/// kept in a form that neither overflows nor loses its direction.
template <class T>
class ScaledProduct {
 public:
  using Real = RealOf<T>;

  // The log scale is kept in double for every scalar type: it only ever
  // feeds growth statistics, and the unit factor carries the precision.

  ScaledProduct() : m_(Mat2<T>::identity()) {}
  explicit ScaledProduct(const Mat2<T>& m) : m_(m) { renormalize(); }

  static ScaledProduct identity() { return ScaledProduct(); }

  /// this <- a * this
  ScaledProduct& left_multiply(const Mat2<T>& a) {
    m_ = a * m_;
    renormalize();
    return *this;
  }
  /// this <- this * a
  ScaledProduct& right_multiply(const Mat2<T>& a) {
    m_ = m_ * a;
    renormalize();
    return *this;
  }

  friend ScaledProduct operator*(const ScaledProduct& a, const ScaledProduct& b) {
    ScaledProduct r;
    r.m_ = a.m_ * b.m_;
    r.log_ = a.log_;
    r.log_.add(b.log_.value());
    r.renormalize();
    return r;
  }

  /// Normalized factor (spectral norm 1).
  const Mat2<T>& unit() const { return m_; }
  /// Natural log of the spectral norm of the represented matrix.
  double log_norm() const { return log_.value(); }
  /// The represented matrix; overflows for large log_norm.
  Mat2<T> matrix() const { return m_ * T(Real(std::exp(log_.value()))); }

  /// Relative distance to another scaled product: spectral distance of the
  /// unit factors plus the difference of log norms.
  friend double relative_distance(const ScaledProduct& a, const ScaledProduct& b) {
    return to_double(op_norm(a.m_ - b.m_)) + std::abs(a.log_norm() - b.log_norm());
  }

 private:
  void renormalize() {
    const Real n = op_norm(m_);
    if (!(n > 0) || !real_isfinite(n)) throw NumericalAbort("scaled product lost its scale");
    m_ *= T(Real(1) / n);
    log_.add(log_of(n));
  }

  Mat2<T> m_;
  CompensatedSum<double> log_;
};

}  // namespace kicked
