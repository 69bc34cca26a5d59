#pragma once

// Parameter-space experiments: boundedness scans over t, growth-exponent maps
// over complex z, the window detector for upper-triangular kicks, the Case A
// threshold, and the discrete Schrodinger recurrence.

#include "kicked/interval_set.hpp"
#include "kicked/kicks.hpp"

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace kicked {

/// Finite stand-in for sup_n ||P_n(t)|| < infinity.
struct HorizonRule {
  std::uint64_t horizon = 1u << 16;  // N
  double threshold = 1e6;            // M
  double slope_tol = 1e-4;           // nats per step
};

/// Least-squares slope of log||P_n|| against n over the last half of the
/// horizon, accumulated on the fly.
class SlopeFit {
 public:
  explicit SlopeFit(std::uint64_t horizon) : horizon_(horizon), center_(0.75 * static_cast<double>(horizon)) {}
  void add(std::uint64_t n, double y) {
    if (2 * n <= horizon_) return;
    const double x = static_cast<double>(n) - center_;
    ++count_;
    sx_ += x;
    sy_ += y;
    sxx_ += x * x;
    sxy_ += x * y;
  }
  double slope() const {
    if (count_ < 2) return 0.0;
    const double n = static_cast<double>(count_);
    const double den = n * sxx_ - sx_ * sx_;
    return den == 0.0 ? 0.0 : (n * sxy_ - sx_ * sy_) / den;
  }

 private:
  std::uint64_t horizon_;
  double center_;
  std::uint64_t count_ = 0;
  double sx_ = 0, sy_ = 0, sxx_ = 0, sxy_ = 0;
};

struct CellVerdict {
  double t = 0.0;             // classification point
  double width = 0.0;         // measure this point stands for
  double sup_log_norm = 0.0;  // max_{n<=N} log||P_n(t)||
  double slope = 0.0;
  bool sup_bounded = false;    // sup_log_norm <= log M
  bool slope_bounded = false;  // slope <= slope_tol
  bool bounded() const { return sup_bounded && slope_bounded; }
};

/// Boundedness verdict at one real parameter.
CellVerdict classify(const KickSource& kicks, double t, const HorizonRule& rule);

struct ScanOptions {
  double t_max = 10.0;  // T
  std::size_t cells = 1000;
  HorizonRule rule;
  bool refine_boundary = false;  // re-classify cells next to a verdict change at two half-cell midpoints
  unsigned workers = 0;          // 0: available parallelism
};

struct ScanResult {
  ScanOptions options;
  std::string kicks;
  double cell_width = 0.0;
  std::vector<CellVerdict> cells;    // one per cell, in order
  std::vector<CellVerdict> refined;  // half cells replacing refined boundary cells
  std::size_t bounded_cells = 0;
  double measure = 0.0;            // both verdicts bounded
  double measure_sup_only = 0.0;   // sup verdict alone
  double measure_slope_only = 0.0; // slope verdict alone
  IntervalSet bounded_set;         // union of bounded cells
};

/// Midpoint classification of [0, T] into equal cells.
ScanResult scan(const KickSource& kicks, const ScanOptions& options);

void write_scan_csv(std::ostream& out, const ScanResult& r);
nlohmann::json scan_summary(const ScanResult& r);

struct GrowthMapOptions {
  double re_min = 0.0, re_max = 8.0;
  double im_min = 0.0, im_max = 2.0;
  std::size_t re_points = 64, im_points = 64;
  std::uint64_t horizon = 2000;
  unsigned workers = 0;
};

struct GrowthPoint {
  std::complex<double> z;
  double u = 0.0;            // log||P_N(z)|| / N
  double majorant = 0.0;     // log(1+|z|) + log k
  bool violates = false;     // u > majorant + 1e-9
  std::optional<double> certified;  // (bound - slack) / N when Im z > 0
};

struct GrowthMapResult {
  GrowthMapOptions options;
  std::string kicks;
  double k = 1.0;
  std::vector<GrowthPoint> points;  // row-major, imaginary part outer
  std::size_t violations = 0;
  std::optional<double> min_certified_excess;  // min over Im z > 0 of u - certified
};

/// Grid points run from min to max inclusive in both directions.
GrowthMapResult growth_map(const KickSource& kicks, const GrowthMapOptions& options);

void write_growth_map_csv(std::ostream& out, const GrowthMapResult& r);
nlohmann::json growth_map_summary(const GrowthMapResult& r);

/// Upper-triangular kicks Psi_n = ((lambda_n, s_n), (0, 1/lambda_n)) for
/// n = 1 .. size(), cycled beyond.
class TriKicks {
 public:
  TriKicks(std::vector<double> lambdas, std::vector<double> shifts);

  std::size_t size() const { return lambdas_.size(); }
  double lambda(std::uint64_t n) const { return lambdas_[(n - 1) % lambdas_.size()]; }
  double shift(std::uint64_t n) const { return shifts_[(n - 1) % shifts_.size()]; }
  /// max |s_n / lambda_n| over the listed terms.
  double t0() const { return t0_; }
  KickSource kick_source() const;

 private:
  std::vector<double> lambdas_, shifts_;
  double t0_ = 0.0;
};

/// Psi_{j+m} H(t) ... Psi_{j+1} H(t) = ((Pi, Pi S), (0, 1/Pi)) with
/// Pi = lambda_{j+1} ... lambda_{j+m} and
/// S = sum_{i=1..m} (t + s_{j+i} / lambda_{j+i}) / (lambda_{j+1} ... lambda_{j+i-1})^2.
struct TriProduct {
  double pi = 1.0;
  double s = 0.0;
  Mat2R matrix() const { return {pi, pi * s, 0.0, 1.0 / pi}; }
};
TriProduct tri_product(const TriKicks& tri, double t, std::uint64_t j, std::uint64_t m);
/// The same product by direct multiplication.
Mat2R tri_product_direct(const TriKicks& tri, double t, std::uint64_t j, std::uint64_t m);

struct WindowResult {
  std::optional<std::uint64_t> window;   // max over starts of the first exceeding m
  std::vector<std::uint64_t> first_exit; // per start j; 0 when none within N_max
  std::uint64_t worst_start = 0;
  double proven_bound = 0.0;             // K^4 / (t - t0) + 1
  double stated_bound = 0.0;              // K^4 / (t (t - t0)) + 1; tighter than proven_bound for t > 1
};

/// Smallest N <= N_max such that every start j in [0, starts) has some
/// m <= N with ||product|| > K. Rejects t <= t0. starts = 0 uses size().
WindowResult rost_window(const TriKicks& tri, double t, double k_level, std::uint64_t n_max,
                         std::uint64_t starts = 0);

/// max |s_n / lambda_n^2| over the Iwasawa factors of Phi_1 .. Phi_n.
double case_a_threshold(const KickSource& kicks, std::uint64_t n);

struct SchrodingerOptions {
  double q0 = 0.0, q1 = 1.0;
  std::uint64_t horizon = 10000;  // K
  double tolerance = 0.4054651081081644;  // log 1.5
};

struct SchrodingerResult {
  // q_k = mantissa[k] * 2^exponent[k] for k = 0 .. K; renormalization only
  // moves whole powers of two, so integer cases stay exact.
  std::vector<double> mantissa;
  std::vector<int> exponent;
  double early_max = 0.0;  // max log|q_k| over 1 <= k <= K/2
  double late_max = 0.0;   // over K/2 < k <= K
  double slope = 0.0;      // least-squares slope of log|q_k| over the last half
  bool bounded = false;
  double log_abs(std::size_t k) const;
};

/// q_{k+1} = (2 + t c_k) q_k - q_{k-1} for k = 1 .. K-1, with c_k = c[(k-1) mod size].
SchrodingerResult schrodinger(const std::vector<double>& c, double t, const SchrodingerOptions& options);

/// Verdict of the matrix evolution with kicks M(c_k) at t under `rule`.
CellVerdict schrodinger_matrix_verdict(const std::vector<double>& c, double t, const HorizonRule& rule);

/// Formats with 17 significant digits.
std::string fmt17(double x);

}  // namespace kicked
