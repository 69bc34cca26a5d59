#pragma once

// Scalar types shared by the numeric core.
//
// The double-precision path (double / std::complex<double>) serves every
// module. The multiprecision path (BigReal / BigComplex) exists for the
// essentially-unbounded-set construction, whose intervals move out to
// parameters like 1e11 with widths far below double resolution.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

namespace kicked {

using BigReal = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<0>,
    boost::multiprecision::et_off>;

/// Minimal complex arithmetic over BigReal; std::complex is unspecified for
/// non-builtin value types.
struct BigComplex {
  BigReal re{0};
  BigReal im{0};

  BigComplex() = default;
  BigComplex(BigReal r) : re(std::move(r)), im(0) {}  // NOLINT(google-explicit-constructor)
  BigComplex(BigReal r, BigReal i) : re(std::move(r)), im(std::move(i)) {}
  BigComplex(int r) : re(r), im(0) {}  // NOLINT(google-explicit-constructor)

  BigComplex& operator+=(const BigComplex& o) { re += o.re; im += o.im; return *this; }
  BigComplex& operator-=(const BigComplex& o) { re -= o.re; im -= o.im; return *this; }
  BigComplex& operator*=(const BigComplex& o) {
    BigReal r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  BigComplex& operator/=(const BigComplex& o) {
    const BigReal den = o.re * o.re + o.im * o.im;
    BigReal r = (re * o.re + im * o.im) / den;
    im = (im * o.re - re * o.im) / den;
    re = std::move(r);
    return *this;
  }
  friend BigComplex operator+(BigComplex a, const BigComplex& b) { return a += b; }
  friend BigComplex operator-(BigComplex a, const BigComplex& b) { return a -= b; }
  friend BigComplex operator*(BigComplex a, const BigComplex& b) { return a *= b; }
  friend BigComplex operator/(BigComplex a, const BigComplex& b) { return a /= b; }
  friend BigComplex operator-(const BigComplex& a) { return {-a.re, -a.im}; }
};

inline BigComplex big_conj(const BigComplex& z) { return {z.re, -z.im}; }
inline BigReal big_abs2(const BigComplex& z) { return z.re * z.re + z.im * z.im; }
inline BigReal big_abs(const BigComplex& z) { return boost::multiprecision::sqrt(big_abs2(z)); }

/// Principal square root.
inline BigComplex big_sqrt(const BigComplex& z) {
  using boost::multiprecision::sqrt;
  const BigReal r = sqrt(big_abs2(z));
  if (r == 0) return {};
  BigReal a = sqrt((r + boost::multiprecision::abs(z.re)) / 2);
  if (z.re >= 0) return {a, z.im / (2 * a)};
  BigReal b = z.im >= 0 ? a : BigReal(-a);
  return {boost::multiprecision::abs(z.im) / (2 * a), b};
}

/// Scoped change of the default MPFR precision (decimal digits).
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned digits10) : saved_(BigReal::default_precision()) {
    BigReal::default_precision(digits10);
  }
  ~PrecisionGuard() { BigReal::default_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_;
};

// ---------------------------------------------------------------------------
// Uniform helpers so matrix code can be written once.

template <class T> struct ScalarTraits;

template <> struct ScalarTraits<double> {
  using Real = double;
  static constexpr bool is_complex = false;
  static double abs2(double x) { return x * x; }
  static double conj(double x) { return x; }
  static double real(double x) { return x; }
  static double imag(double) { return 0.0; }
};

template <> struct ScalarTraits<std::complex<double>> {
  using Real = double;
  static constexpr bool is_complex = true;
  static double abs2(const std::complex<double>& z) { return std::norm(z); }
  static std::complex<double> conj(const std::complex<double>& z) { return std::conj(z); }
  static double real(const std::complex<double>& z) { return z.real(); }
  static double imag(const std::complex<double>& z) { return z.imag(); }
};

template <> struct ScalarTraits<BigReal> {
  using Real = BigReal;
  static constexpr bool is_complex = false;
  static BigReal abs2(const BigReal& x) { return x * x; }
  static BigReal conj(const BigReal& x) { return x; }
  static BigReal real(const BigReal& x) { return x; }
  static BigReal imag(const BigReal&) { return BigReal(0); }
};

template <> struct ScalarTraits<BigComplex> {
  using Real = BigReal;
  static constexpr bool is_complex = true;
  static BigReal abs2(const BigComplex& z) { return big_abs2(z); }
  static BigComplex conj(const BigComplex& z) { return big_conj(z); }
  static BigReal real(const BigComplex& z) { return z.re; }
  static BigReal imag(const BigComplex& z) { return z.im; }
};

template <class T> using RealOf = typename ScalarTraits<T>::Real;

inline double real_sqrt(double x) { return std::sqrt(x); }
inline BigReal real_sqrt(const BigReal& x) { return boost::multiprecision::sqrt(x); }
inline double real_log(double x) { return std::log(x); }
inline BigReal real_log(const BigReal& x) { return boost::multiprecision::log(x); }
inline double real_exp(double x) { return std::exp(x); }
inline BigReal real_exp(const BigReal& x) { return boost::multiprecision::exp(x); }
inline bool real_isfinite(double x) { return std::isfinite(x); }
inline bool real_isfinite(const BigReal& x) { return boost::multiprecision::isfinite(x); }

/// Natural log as a double; for BigReal this avoids a full-precision log and
/// stays finite far outside the double exponent range.
inline double log_of(double x) { return std::log(x); }
inline double log_of(const BigReal& x) {
  long exponent = 0;
  const double mantissa = mpfr_get_d_2exp(&exponent, x.backend().data(), MPFR_RNDN);
  return std::log(mantissa) + static_cast<double>(exponent) * 0.69314718055994530942;
}

inline double to_double(double x) { return x; }
inline double to_double(const BigReal& x) { return x.convert_to<double>(); }

/// Full-precision decimal text of a BigReal (round-trips through BigReal(str)).
inline std::string to_exact_string(const BigReal& x) {
  return x.str(0, std::ios_base::scientific);
}

}  // namespace kicked
