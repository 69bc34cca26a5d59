#pragma once

// 2x2 matrices over real or complex scalars, the named unimodular families
// (shears, dilations, rotations), the spectral norm, the Iwasawa split of
// real unimodular matrices and the Hermitian form Q(x) = Im(x1 * conj(x2)).

#include "kicked/errors.hpp"
#include "kicked/scalar.hpp"

#include <complex>
#include <string>

namespace kicked {

template <class T>
struct Mat2 {
  T a11{1}, a12{0}, a21{0}, a22{1};

  static Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }

  T det() const { return a11 * a22 - a12 * a21; }
  T trace() const { return a11 + a22; }

  Mat2& operator+=(const Mat2& o) { a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22; return *this; }
  Mat2& operator-=(const Mat2& o) { a11 -= o.a11; a12 -= o.a12; a21 -= o.a21; a22 -= o.a22; return *this; }
  Mat2& operator*=(const T& s) { a11 *= s; a12 *= s; a21 *= s; a22 *= s; return *this; }

  friend Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
  friend Mat2 operator*(Mat2 a, const T& s) { return a *= s; }
  friend Mat2 operator*(const T& s, Mat2 a) { return a *= s; }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

template <class T>
struct Vec2 {
  T x1{0}, x2{0};
  friend Vec2 operator*(const Mat2<T>& m, const Vec2& v) {
    return {m.a11 * v.x1 + m.a12 * v.x2, m.a21 * v.x1 + m.a22 * v.x2};
  }
};

using Mat2R = Mat2<double>;
using Mat2C = Mat2<std::complex<double>>;
using Vec2C = Vec2<std::complex<double>>;

// --- named families --------------------------------------------------------

/// Upper shear ((1, z), (0, 1)).
template <class T> Mat2<T> shear(const T& z) { return {T(1), z, T(0), T(1)}; }
inline Mat2R shear(double t) { return {1.0, t, 0.0, 1.0}; }

/// Lower shear ((1, 0), (c, 1)); the kick of the Schrodinger-type problems.
template <class T> Mat2<T> lower_shear(const T& c) { return {T(1), T(0), c, T(1)}; }
inline Mat2R lower_shear(double c) { return {1.0, 0.0, c, 1.0}; }

/// diag(lambda, 1/lambda).
inline Mat2R dilation(double lambda) { return {lambda, 0.0, 0.0, 1.0 / lambda}; }

/// Rotation by alpha radians, ((cos, -sin), (sin, cos)).
inline Mat2R rotation(double alpha) {
  const double c = std::cos(alpha), s = std::sin(alpha);
  return {c, -s, s, c};
}

/// Widen a real matrix to complex entries.
inline Mat2C to_complex(const Mat2R& m) { return {m.a11, m.a12, m.a21, m.a22}; }

template <class T, class U>
Mat2<T> convert(const Mat2<U>& m) {
  return {T(m.a11), T(m.a12), T(m.a21), T(m.a22)};
}

// --- norms -----------------------------------------------------------------

/// Largest singular value, closed form. With x = |row1|^2, y = |row2|^2 and
/// w = <row1, row2>, sigma_max^2 = (x+y)/2 + sqrt(((x-y)/2)^2 + |w|^2); the
/// discriminant is a sum of squares so no cancellation occurs.
template <class T>
RealOf<T> op_norm(const Mat2<T>& m) {
  using Tr = ScalarTraits<T>;
  const RealOf<T> x = Tr::abs2(m.a11) + Tr::abs2(m.a12);
  const RealOf<T> y = Tr::abs2(m.a21) + Tr::abs2(m.a22);
  const T w = m.a11 * Tr::conj(m.a21) + m.a12 * Tr::conj(m.a22);
  const RealOf<T> half_diff = (x - y) / 2;
  const RealOf<T> s2 = (x + y) / 2 + real_sqrt(half_diff * half_diff + Tr::abs2(w));
  return real_sqrt(s2);
}

template <class T>
RealOf<T> frobenius_norm(const Mat2<T>& m) {
  using Tr = ScalarTraits<T>;
  return real_sqrt(Tr::abs2(m.a11) + Tr::abs2(m.a12) + Tr::abs2(m.a21) + Tr::abs2(m.a22));
}

// --- unimodularity ---------------------------------------------------------

/// Default tolerance for the determinant-one tag.
inline constexpr double kUnimodularTol = 1e-12;

/// |det - 1| <= tol * max(1, |a11 a22| + |a12 a21|). The scale factor is the
/// size of the two products whose difference forms the determinant, i.e. the
/// magnitude at which floating-point rounding of det itself happens.
bool is_unimodular(const Mat2R& m, double tol = kUnimodularTol);
bool is_unimodular(const Mat2C& m, double tol = kUnimodularTol);

/// Throws NotUnimodular with the offending determinant.
void require_unimodular(const Mat2R& m, double tol = kUnimodularTol);

/// Adjugate ((a22, -a12), (-a21, a11)); the inverse of a unimodular matrix.
template <class T>
Mat2<T> adjugate(const Mat2<T>& m) {
  return {m.a22, -m.a12, -m.a21, m.a11};
}

/// Inverse of a unimodular real matrix; rejects anything else.
Mat2R inverse(const Mat2R& m);
Mat2C inverse(const Mat2C& m);

// --- Iwasawa ---------------------------------------------------------------

/// Phi = shear(s) * dilation(lambda) * rotation(alpha), alpha in [-pi/2, pi/2].
struct IwasawaFactors {
  double s = 0.0;
  double lambda = 1.0;
  double alpha = 0.0;

  Mat2R compose() const { return shear(s) * dilation(lambda) * rotation(alpha); }
};

/// Factors a unimodular real matrix ((a, b), (c, d)):
///   r^2 = c^2 + d^2,  s = (ac + bd) / r^2,  lambda = sign(d) / r,
///   alpha = arcsin(c sign(d) / r), with sign(0) := +1.
/// The angle is evaluated as atan2(c sign(d), |d|), the same value without
/// the arcsin's loss of accuracy near +-pi/2.
IwasawaFactors iwasawa(const Mat2R& phi);

// --- quadratic form ----------------------------------------------------------

/// Q(x) = Im(x1 * conj(x2)). Preserved by real unimodular maps; a shear by z
/// adds Im(z) |x2|^2.
double q_form(const Vec2C& x);

inline double norm2(const Vec2C& x) { return std::norm(x.x1) + std::norm(x.x2); }

std::string to_string(const Mat2R& m);

}  // namespace kicked
