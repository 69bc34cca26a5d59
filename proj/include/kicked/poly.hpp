#pragma once

// Real polynomials in t and 2x2 polynomial matrices (Mat2<Poly<R>>), with
// real-root isolation by sign changes on an adaptive grid.

#include "kicked/mat2.hpp"
#include "kicked/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace kicked {

/// Coefficients below tol * max|coefficient| count as zero when reading off
/// degrees. For BigReal the threshold follows the working precision, because
/// genuine leading coefficients of the constructed families can be hundreds
/// of orders of magnitude below the others.
template <class R> R default_trim_tol();
template <> inline double default_trim_tol<double>() { return 1e-14; }
template <> inline BigReal default_trim_tol<BigReal>() {
  const int digits = static_cast<int>(BigReal::default_precision());
  return boost::multiprecision::pow(BigReal(10), -std::max(14, digits - 20));
}

template <class R>
class Poly {
 public:
  Poly() = default;
  Poly(int constant) : c_{R(constant)} {}  // NOLINT(google-explicit-constructor)
  explicit Poly(std::vector<R> coefficients) : c_(std::move(coefficients)) {}

  /// The monomial t.
  static Poly t() { return Poly(std::vector<R>{R(0), R(1)}); }
  static Poly constant(R v) { return Poly(std::vector<R>{std::move(v)}); }

  const std::vector<R>& coefficients() const { return c_; }
  R coefficient(std::size_t i) const { return i < c_.size() ? c_[i] : R(0); }
  std::size_t size() const { return c_.size(); }

  R max_abs_coefficient() const {
    R m(0);
    for (const auto& v : c_) m = std::max(m, R(abs_of(v)));
    return m;
  }

  /// Largest index with a coefficient above the trim threshold; -1 for zero.
  int degree(const R& tol = default_trim_tol<R>()) const {
    const R cut = tol * max_abs_coefficient();
    for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i)
      if (abs_of(c_[static_cast<std::size_t>(i)]) > cut) return i;
    return -1;
  }
  R leading(const R& tol = default_trim_tol<R>()) const {
    const int d = degree(tol);
    return d < 0 ? R(0) : c_[static_cast<std::size_t>(d)];
  }

  R operator()(const R& t) const {
    R acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  /// 1 + max_i |c_i / c_deg|: every real root lies in [-bound, bound].
  R cauchy_bound(const R& tol = default_trim_tol<R>()) const {
    const int d = degree(tol);
    if (d <= 0) return R(0);
    const R lead = abs_of(c_[static_cast<std::size_t>(d)]);
    R m(0);
    for (int i = 0; i < d; ++i) m = std::max(m, R(abs_of(c_[static_cast<std::size_t>(i)]) / lead));
    return R(1) + m;
  }

  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), R(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), R(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Poly& operator*=(const R& s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(Poly a) {
    for (auto& v : a.c_) v = -v;
    return a;
  }
  friend Poly operator*(Poly a, const R& s) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.c_.empty() || b.c_.empty()) return Poly();
    std::vector<R> out(a.c_.size() + b.c_.size() - 1, R(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(out));
  }
  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  static R abs_of(const R& v) { return v < 0 ? R(-v) : v; }
  std::vector<R> c_;
};

template <class R> using PolyMat2 = Mat2<Poly<R>>;

template <class R>
Mat2<R> evaluate(const PolyMat2<R>& m, const R& t) {
  return {m.a11(t), m.a12(t), m.a21(t), m.a22(t)};
}

template <class R>
PolyMat2<R> poly_shear() {
  return {Poly<R>(1), Poly<R>::t(), Poly<R>(0), Poly<R>(1)};
}

template <class R>
PolyMat2<R> poly_lower_shear(const R& c) {
  return {Poly<R>(1), Poly<R>(0), Poly<R>::constant(c), Poly<R>(1)};
}

/// Largest coefficient magnitude among the four entries.
template <class R>
R coefficient_scale(const PolyMat2<R>& m) {
  return std::max({m.a11.max_abs_coefficient(), m.a12.max_abs_coefficient(), m.a21.max_abs_coefficient(),
                   m.a22.max_abs_coefficient()});
}

/// Real roots of f on [lo, hi]: sign changes on a uniform grid of `cells`
/// cells, cells whose midpoint dips towards zero without a sign change are
/// subdivided (up to `max_split` times), and every bracket is bisected until
/// its width is below tol.
template <class R, class F>
std::vector<R> isolate_roots(F&& f, const R& lo, const R& hi, int cells, const R& tol, int max_split = 8) {
  std::vector<R> roots;
  auto sgn = [](const R& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
  auto push = [&](const R& r) {
    if (roots.empty() || roots.back() < r) roots.push_back(r);
  };
  auto bisect = [&](R a, R b, int sa) {
    while (b - a > tol) {
      const R m = (a + b) / 2;
      if (m <= a || m >= b) break;
      const int sm = sgn(f(m));
      if (sm == 0) return m;
      if (sm == sa) a = m; else b = m;
    }
    return R((a + b) / 2);
  };
  std::function<void(const R&, const R&, const R&, const R&, int)> scan_cell =
      [&](const R& a, const R& b, const R& fa, const R& fb, int depth) {
        const int sa = sgn(fa), sb = sgn(fb);
        if (sa == 0) push(a);
        if (sa != 0 && sb != 0 && sa != sb) {
          push(bisect(a, b, sa));
          return;
        }
        if (sa == 0 || sb == 0 || depth >= max_split || b - a <= tol) return;
        const R m = (a + b) / 2;
        const R fm = f(m);
        const R am = fm < 0 ? R(-fm) : fm;
        const R aa = fa < 0 ? R(-fa) : fa;
        const R ab = fb < 0 ? R(-fb) : fb;
        if (sgn(fm) != sa || (am < aa && am < ab)) {
          scan_cell(a, m, fa, fm, depth + 1);
          scan_cell(m, b, fm, fb, depth + 1);
        }
      };
  R a = lo;
  R fa = f(a);
  for (int i = 1; i <= cells; ++i) {
    const R b = i == cells ? hi : R(lo + (hi - lo) * i / cells);
    const R fb = f(b);
    scan_cell(a, b, fa, fb, 0);
    a = b;
    fa = fb;
  }
  if (sgn(fa) == 0) push(a);
  return roots;
}

}  // namespace kicked
