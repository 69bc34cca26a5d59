#pragma once

// Exceptional sets containing any prescribed parameters t_1, ..., t_K.
//
// With A_1(t) = H(t) and A_{n+1}(t) = (R_n A_n(t))^2, each rotation R_n is
// chosen so that R_n A_n(t_n) is traceless, hence squares to -I. The kicks
// are Phi_n = R_{ruler(n)+1} ... R_1, and the dyadic partial products satisfy
// P_{2^m}(t) = R_{m+1} A_{m+1}(t). Past the last target every R_m is the
// identity.

#include "kicked/kicks.hpp"
#include "kicked/scaled_product.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace kicked {

/// Rotation R(alpha) with tr(R(alpha) A) = 0. The angle is
/// atan2(a + d, c - b), checked afterwards and shifted by pi/2 if the check
/// fails; NumericalAbort if neither candidate is traceless within 1e-10
/// (relative to the size of A).
Mat2R trace_annihilating_rotation(const Mat2R& a);
double trace_annihilating_angle(const Mat2R& a);

class SeqConstruction {
 public:
  explicit SeqConstruction(std::vector<double> targets);

  const std::vector<double>& targets() const { return targets_; }
  std::size_t size() const { return targets_.size(); }

  /// R_n for n >= 1 (identity past the last target).
  Mat2R rotation(std::size_t n) const;
  double angle(std::size_t n) const;

  /// A_n(t) for n >= 1 as a scaled product.
  ScaledProduct<double> a_matrix(std::size_t n, double t) const;

  /// Phi_n = R_{ruler(n)+1} ... R_1.
  Mat2R kick(std::uint64_t n) const;
  KickSource kick_source() const;

  /// ||(R_k A_k(t_k))^2 + I|| for 1 <= k <= size().
  double square_defect(std::size_t k) const;

 private:
  std::vector<double> targets_;
  std::vector<double> angles_;
  std::vector<Mat2R> prefix_;  // prefix_[j] = R_j ... R_1, prefix_[0] = I
};

struct BoundednessReport {
  double target = 0.0;
  std::uint64_t horizon = 0;
  double early_max = 0.0;  // max log||P_n(t)|| over n <= N/2
  double late_max = 0.0;   // max over N/2 < n <= N
  double sup_log_norm = 0.0;
  bool stabilized = false;
  bool horizon_sufficient = true;
};

/// Evolves at the k-th target up to N; stabilized when the late running max
/// stays within log(stabilization_factor) of the early one.
BoundednessReport verify_bounded(const SeqConstruction& construction, std::size_t k, std::uint64_t horizon,
                                 double stabilization_factor);

/// Same test at an arbitrary parameter (non-targets usually fail).
BoundednessReport verify_bounded_at(const SeqConstruction& construction, double t, std::uint64_t horizon,
                                    double stabilization_factor);

/// Horizons below this are reported as insufficient.
inline constexpr std::uint64_t kMinUsefulHorizon = 16;

}  // namespace kicked
