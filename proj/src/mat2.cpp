#include "kicked/mat2.hpp"

#include <cmath>
#include <sstream>

namespace kicked {

namespace {

double det_scale(const Mat2R& m) {
  return std::max(1.0, std::abs(m.a11 * m.a22) + std::abs(m.a12 * m.a21));
}

double det_scale(const Mat2C& m) {
  return std::max(1.0, std::abs(m.a11 * m.a22) + std::abs(m.a12 * m.a21));
}

}  // namespace

bool is_unimodular(const Mat2R& m, double tol) {
  return std::abs(m.det() - 1.0) <= tol * det_scale(m);
}

bool is_unimodular(const Mat2C& m, double tol) {
  return std::abs(m.det() - 1.0) <= tol * det_scale(m);
}

void require_unimodular(const Mat2R& m, double tol) {
  if (!is_unimodular(m, tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "determinant " << m.det() << " is not 1 for " << to_string(m);
    throw NotUnimodular(os.str());
  }
}

Mat2R inverse(const Mat2R& m) {
  require_unimodular(m);
  return adjugate(m);
}

Mat2C inverse(const Mat2C& m) {
  if (!is_unimodular(m)) throw NotUnimodular("complex matrix is not unimodular");
  return adjugate(m);
}

IwasawaFactors iwasawa(const Mat2R& phi) {
  require_unimodular(phi);
  const double c = phi.a21, d = phi.a22;
  const double sign_d = d < 0.0 ? -1.0 : 1.0;
  const double r2 = c * c + d * d;
  IwasawaFactors f;
  f.s = (phi.a11 * c + phi.a12 * d) / r2;
  f.lambda = sign_d / std::sqrt(r2);
  f.alpha = std::atan2(c * sign_d, std::abs(d));
  return f;
}

double q_form(const Vec2C& x) { return (x.x1 * std::conj(x.x2)).imag(); }

std::string to_string(const Mat2R& m) {
  std::ostringstream os;
  os.precision(17);
  os << "((" << m.a11 << ", " << m.a12 << "), (" << m.a21 << ", " << m.a22 << "))";
  return os.str();
}

}  // namespace kicked
