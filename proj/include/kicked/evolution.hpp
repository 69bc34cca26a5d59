#pragma once

// Kicked products P_n(z) = Phi_n H(z) ... Phi_1 H(z), their growth exponents
// u_n = log||P_n|| / n, and the finite-n form of the Q-form growth argument
// for non-real z.

#include "kicked/kicks.hpp"
#include "kicked/scaled_product.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace kicked {

/// Left-multiplied chain P_n = Phi_n H(z) P_{n-1}, visited after every step
/// as visit(n, product). T is double for real parameters, complex otherwise.
template <class T, class Visit>
void run_evolution(const KickSource& kicks, const T& z, std::uint64_t n_max, Visit&& visit) {
  const Mat2<T> h = shear(z);
  ScaledProduct<T> product;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    product.left_multiply(convert<T>(kicks.at(n)) * h);
    visit(n, product);
  }
}

struct GrowthSample {
  std::uint64_t n = 0;
  double log_norm = 0.0;
  double exponent() const { return log_norm / static_cast<double>(n); }
};

struct GrowthTrace {
  std::vector<GrowthSample> samples;
  double max_log_norm = 0.0;  // over every step, recorded or not
  std::uint64_t argmax = 0;
  double min_log_norm = 0.0;  // should never drop below -1e-9
  double final_log_norm = 0.0;
  std::uint64_t steps = 0;
  double max_det_error = 0.0;  // |det(P_n) - 1| / ||P_n||^2 at recorded steps
};

/// Records every record_every-th step and the last one.
GrowthTrace evolve(const KickSource& kicks, std::complex<double> z, std::uint64_t n_max,
                   std::uint64_t record_every = 1);

/// CSV with columns n, lognorm, u_n.
void write_trace_csv(std::ostream& out, const GrowthTrace& trace);

/// Per-step check of the inequality
///   Q(G_n y) >= Q(y) (1 + |alpha_n| Im(z/2) / (2k (1 + |z/2|))),  G_n = H(z/2) Phi_n H(z/2),
/// along y_n = G_n ... G_1 x with x = (i/sqrt2, 1/sqrt2), plus the telescoped
/// consequence log||B_n|| >= (1/2) sum_j log(1 + f_j) with B_n = G_n ... G_1.
struct GrowthCertificate {
  std::complex<double> z;
  double k = 1.0;
  std::uint64_t steps = 0;
  std::optional<std::uint64_t> first_violation;        // per-step Q inequality
  std::optional<std::uint64_t> first_bound_violation;  // telescoped norm bound
  double min_step_margin = 0.0;   // min_n Q-ratio / (1 + f_n) - 1
  double min_bound_margin = 0.0;  // min_n log||B_n|| - telescoped bound
  double telescoped_bound = 0.0;  // (1/2) sum log(1 + f_j) at the last step
  double log_norm = 0.0;          // log||B_n|| at the last step

  bool passed() const { return !first_violation && !first_bound_violation; }
};

/// Relative rounding allowance applied to both inequalities.
inline constexpr double kCertificateRoundingTol = 1e-12;

/// Requires Im z > 0 and a declared kick bound; k = max(1, C^2).
GrowthCertificate q_growth_certificate(const KickSource& kicks, std::complex<double> z,
                                       std::uint64_t n_max);

struct GrowthLowerBound {
  double bound = 0.0;   // Im(z/2) / (8k(1+|z/2|)) * sum_{j<=n} |alpha_j|
  double slack = 0.0;   // log||H(z/2)|| + log||H(z/2)^-1||
  double k = 1.0;
  double angle_sum = 0.0;
};

GrowthLowerBound growth_lower_bound(const KickSource& kicks, std::complex<double> z, std::uint64_t n);

/// First 1-based i <= horizon - window with max(|a_{i+1}|, ..., |a_{i+window}|) < eps,
/// where values[0] holds a_1.
std::optional<std::uint64_t> condition_star_check(const std::vector<double>& values, double eps,
                                                  std::uint64_t window, std::uint64_t horizon);

}  // namespace kicked
