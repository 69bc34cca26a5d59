#include "kicked/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kicked {

namespace {

template <class T>
GrowthTrace evolve_impl(const KickSource& kicks, const T& z, std::uint64_t n_max,
                        std::uint64_t record_every) {
  GrowthTrace trace;
  trace.steps = n_max;
  trace.min_log_norm = std::numeric_limits<double>::infinity();
  trace.max_log_norm = -std::numeric_limits<double>::infinity();
  run_evolution(kicks, z, n_max, [&](std::uint64_t n, const ScaledProduct<T>& p) {
    const double l = p.log_norm();
    if (l > trace.max_log_norm) {
      trace.max_log_norm = l;
      trace.argmax = n;
    }
    trace.min_log_norm = std::min(trace.min_log_norm, l);
    if (n % record_every == 0 || n == n_max) {
      trace.samples.push_back({n, l});
      // det(exp(l) m) = exp(2l) det(m); rounding in det scales with ||P_n||^2,
      // so the defect is measured relative to it.
      const double det_err = std::abs(p.unit().det() - std::exp(-2.0 * l));
      trace.max_det_error = std::max(trace.max_det_error, det_err);
    }
    trace.final_log_norm = l;
  });
  return trace;
}

double kick_angle(const Mat2R& phi) { return iwasawa(phi).alpha; }

}  // namespace

GrowthTrace evolve(const KickSource& kicks, std::complex<double> z, std::uint64_t n_max,
                   std::uint64_t record_every) {
  if (n_max < 1) throw std::invalid_argument("evolve needs n_max >= 1");
  if (record_every < 1) record_every = 1;
  if (z.imag() == 0.0) return evolve_impl(kicks, z.real(), n_max, record_every);
  return evolve_impl(kicks, z, n_max, record_every);
}

void write_trace_csv(std::ostream& out, const GrowthTrace& trace) {
  const auto saved = out.precision(17);
  out << "n,lognorm,u_n\n";
  for (const auto& s : trace.samples) out << s.n << ',' << s.log_norm << ',' << s.exponent() << '\n';
  out.precision(saved);
}

GrowthCertificate q_growth_certificate(const KickSource& kicks, std::complex<double> z,
                                       std::uint64_t n_max) {
  if (!(z.imag() > 0.0)) throw std::invalid_argument("growth certificate needs Im z > 0");
  if (!kicks.bound()) throw std::invalid_argument("growth certificate needs a declared kick bound");

  GrowthCertificate cert;
  cert.z = z;
  cert.k = kicks.growth_constant();
  cert.steps = n_max;
  cert.min_step_margin = std::numeric_limits<double>::infinity();
  cert.min_bound_margin = std::numeric_limits<double>::infinity();

  const std::complex<double> half = z / 2.0;
  const double rate = half.imag() / (2.0 * cert.k * (1.0 + std::abs(half)));
  const Mat2C h_half = shear(half);

  // y is kept at unit length; log_scale carries log||y_n||.
  const double r = 1.0 / std::sqrt(2.0);
  Vec2C y{{0.0, r}, {r, 0.0}};
  double log_scale = 0.0;
  ScaledProduct<std::complex<double>> b;
  CompensatedSum<double> telescoped;

  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const Mat2R phi = kicks.at(n);
    const Mat2C g = h_half * to_complex(phi) * h_half;
    const double f = std::abs(kick_angle(phi)) * rate;

    const double q_before = q_form(y);
    Vec2C next = g * y;
    const double ratio = q_form(next) / q_before;
    const double margin = ratio / (1.0 + f) - 1.0;
    cert.min_step_margin = std::min(cert.min_step_margin, margin);
    if (margin < -kCertificateRoundingTol && !cert.first_violation) cert.first_violation = n;

    const double len = std::sqrt(norm2(next));
    next.x1 /= len;
    next.x2 /= len;
    y = next;
    log_scale += std::log(len);

    b.left_multiply(g);
    telescoped.add(0.5 * std::log1p(f));
    const double bound = telescoped.value();
    const double bound_margin = b.log_norm() - bound;
    cert.min_bound_margin = std::min(cert.min_bound_margin, bound_margin);
    if (bound_margin < -kCertificateRoundingTol * std::max(1.0, bound) && !cert.first_bound_violation)
      cert.first_bound_violation = n;
    cert.telescoped_bound = bound;
    cert.log_norm = b.log_norm();
  }
  return cert;
}

GrowthLowerBound growth_lower_bound(const KickSource& kicks, std::complex<double> z, std::uint64_t n) {
  if (!(z.imag() > 0.0)) throw std::invalid_argument("growth lower bound needs Im z > 0");
  GrowthLowerBound out;
  out.k = kicks.growth_constant();
  CompensatedSum<double> angles;
  for (std::uint64_t j = 1; j <= n; ++j) angles.add(std::abs(kick_angle(kicks.at(j))));
  out.angle_sum = angles.value();
  const std::complex<double> half = z / 2.0;
  out.bound = half.imag() / (8.0 * out.k * (1.0 + std::abs(half))) * out.angle_sum;
  out.slack = std::log(op_norm(shear(half))) + std::log(op_norm(shear(-half)));
  return out;
}

std::optional<std::uint64_t> condition_star_check(const std::vector<double>& values, double eps,
                                                  std::uint64_t window, std::uint64_t horizon) {
  if (horizon < window) throw std::invalid_argument("condition (*) check needs horizon >= window");
  const std::uint64_t last = std::min<std::uint64_t>(horizon, values.size());
  for (std::uint64_t i = 1; i + window <= last; ++i) {
    bool below = true;
    for (std::uint64_t j = 1; j <= window && below; ++j) below = std::abs(values[i + j - 1]) < eps;
    if (below) return i;
  }
  return std::nullopt;
}

}  // namespace kicked
