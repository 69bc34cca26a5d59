#include "kicked/construct_seq.hpp"

#include "kicked/dyadic.hpp"
#include "kicked/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kicked {

namespace {

double traceless_defect(double alpha, const Mat2R& a) {
  const double scale = std::max(1.0, frobenius_norm(a));
  return std::abs((rotation(alpha) * a).trace()) / scale;
}

}  // namespace

double trace_annihilating_angle(const Mat2R& a) {
  // tr(R(alpha) A) = (a + d) cos(alpha) - (c - b) sin(alpha)
  const double alpha = std::atan2(a.a11 + a.a22, a.a21 - a.a12);
  if (traceless_defect(alpha, a) <= 1e-10) return alpha;
  const double shifted = alpha + std::numbers::pi / 2;
  if (traceless_defect(shifted, a) <= 1e-10) return shifted;
  std::ostringstream os;
  os.precision(17);
  os << "no traceless rotation found for " << to_string(a) << " (defect " << traceless_defect(alpha, a) << ")";
  throw NumericalAbort(os.str());
}

Mat2R trace_annihilating_rotation(const Mat2R& a) { return rotation(trace_annihilating_angle(a)); }

SeqConstruction::SeqConstruction(std::vector<double> targets) : targets_(std::move(targets)) {
  for (double t : targets_)
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("targets must be positive and finite");
  prefix_.push_back(Mat2R::identity());
  for (std::size_t n = 1; n <= targets_.size(); ++n) {
    // Only the direction of A_n matters for the angle, so the unit factor suffices.
    const ScaledProduct<double> a = a_matrix(n, targets_[n - 1]);
    angles_.push_back(trace_annihilating_angle(a.unit()));
    prefix_.push_back(kicked::rotation(angles_.back()) * prefix_.back());
  }
}

double SeqConstruction::angle(std::size_t n) const {
  if (n == 0) throw std::out_of_range("rotations are numbered from 1");
  return n <= angles_.size() ? angles_[n - 1] : 0.0;
}

Mat2R SeqConstruction::rotation(std::size_t n) const {
  return n <= angles_.size() ? kicked::rotation(angle(n)) : Mat2R::identity();
}

ScaledProduct<double> SeqConstruction::a_matrix(std::size_t n, double t) const {
  if (n == 0) throw std::out_of_range("A_n is defined for n >= 1");
  ScaledProduct<double> a(shear(t));
  for (std::size_t j = 1; j < n; ++j) {
    if (j > angles_.size()) {
      a = a * a;
      continue;
    }
    ScaledProduct<double> x = a;
    x.left_multiply(rotation(j));
    a = x * x;
  }
  return a;
}

Mat2R SeqConstruction::kick(std::uint64_t n) const {
  const std::size_t level = std::min<std::size_t>(ruler(n) + 1, angles_.size());
  return prefix_[level];
}

KickSource SeqConstruction::kick_source() const {
  SeqConstruction copy = *this;
  return KickSource("seq", [copy](std::uint64_t n) { return copy.kick(n); }, 1.0);
}

double SeqConstruction::square_defect(std::size_t k) const {
  if (k == 0 || k > targets_.size()) throw std::out_of_range("no such target");
  ScaledProduct<double> x = a_matrix(k, targets_[k - 1]);
  x.left_multiply(rotation(k));
  const Mat2R sq = (x * x).matrix();
  return op_norm(sq + Mat2R::identity());
}

BoundednessReport verify_bounded_at(const SeqConstruction& construction, double t, std::uint64_t horizon,
                                    double stabilization_factor) {
  BoundednessReport r;
  r.target = t;
  r.horizon = horizon;
  r.horizon_sufficient = horizon >= kMinUsefulHorizon;
  r.early_max = -std::numeric_limits<double>::infinity();
  r.late_max = -std::numeric_limits<double>::infinity();
  const std::uint64_t half = horizon / 2;
  run_evolution(construction.kick_source(), t, horizon, [&](std::uint64_t n, const ScaledProduct<double>& p) {
    double& slot = n <= half ? r.early_max : r.late_max;
    slot = std::max(slot, p.log_norm());
  });
  r.sup_log_norm = std::max(r.early_max, r.late_max);
  r.stabilized = !r.horizon_sufficient || r.late_max <= r.early_max + std::log(stabilization_factor);
  return r;
}

BoundednessReport verify_bounded(const SeqConstruction& construction, std::size_t k, std::uint64_t horizon,
                                 double stabilization_factor) {
  if (k == 0 || k > construction.size()) throw std::out_of_range("no such target");
  return verify_bounded_at(construction, construction.targets()[k - 1], horizon, stabilization_factor);
}

}  // namespace kicked
