#pragma once

// Essentially unbounded exceptional sets from ruler-ordered lower-shear kicks.
//
// Level n picks a small coefficient c_n so that A_n = A_{n-1} M(c_n) A_{n-1}
// stays elliptic, with a nearby diagonalizer, on what is left of E_{n-1}
// after cutting small neighbourhoods of the zeros of tr A_{n-1}. It then
// finds a fresh trace window I_n beyond max(n, sup E_{n-1}) and sets
// E_n = (E_{n-1} minus the cuts) + I_n.
//
// Matrices A_n(t) have norms like t^(2^(n+1)) times powers of the tiny c_j,
// and the windows I_n shrink doubly exponentially, so all numerics here run
// in MPFR at a precision the build raises for itself.

#include "kicked/dyadic.hpp"
#include "kicked/errors.hpp"
#include "kicked/interval_set.hpp"
#include "kicked/poly.hpp"
#include "kicked/scalar.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kicked {

using EusSet = BasicIntervalSet<BigReal>;
using EusInterval = Interval<BigReal>;
using Mat2B = Mat2<BigReal>;
using Mat2BC = Mat2<BigComplex>;

/// A value re-rounded to the current default precision.
inline BigReal at_current_precision(const BigReal& x) {
  BigReal r;
  r = x;
  return r;
}

// --- polynomial side ---------------------------------------------------------

/// A M(c) A, after checking tr(A M(c) A) = tr A (tr A + c a12) - 2 as a
/// polynomial identity (coefficients within tol times the coefficient scale).
template <class R>
PolyMat2<R> kick_step(const PolyMat2<R>& a, const R& c, const R& tol);

/// max coefficient of det(A) - 1, relative to max(1, coefficient scale of A)^2.
template <class R>
R det_defect(const PolyMat2<R>& a);

/// A_0 .. A_n as polynomial matrices in t.
template <class R>
std::vector<PolyMat2<R>> poly_chain(const std::vector<R>& c);

struct DegreePattern {
  int d11 = -1, d12 = -1, d21 = -1, d22 = -1;
  /// (p, p+1; p-1, p) for some p: the upper right entry strictly dominates.
  bool upper_right_dominating() const {
    return d11 == d22 && d12 == d11 + 1 && d21 == d11 - 1;
  }
};
template <class R>
DegreePattern degree_pattern(const PolyMat2<R>& a);

struct GoodWindow {
  Interval<double> interval;
  double min_margin = 0.0;  // min of 2 - |tr| over interior sample points
};

/// Where -2 < tr A(t) < 2 inside the domain, as closed intervals whose
/// endpoints are refined to 1e-10. Rejects a constant trace.
std::vector<GoodWindow> good_region(const PolyMat2<double>& a, Interval<double> domain);
IntervalSet good_region_set(const PolyMat2<double>& a, Interval<double> domain);

// --- pointwise side ------------------------------------------------------------

/// A_0(t), ..., A_n(t) through the recurrence (raw products, MPFR range).
std::vector<Mat2B> a_chain(const std::vector<BigReal>& c, const BigReal& t, int n);
BigReal trace_at(const std::vector<BigReal>& c, const BigReal& t, int n);

/// A = S diag(lambda, conj-partner) S^-1 with det S = 1.
struct Diagonalization {
  Mat2BC s;
  BigComplex lambda;   // first eigenvalue
  BigComplex partner;  // second eigenvalue
};

/// Eigenvalue lambda = tr/2 + i sqrt(1 - (tr/2)^2) with Im > 0 and
/// eigenvector columns (a12, lambda - a11), (a12, conj(lambda) - a11) scaled
/// to det 1 by the principal square root. When |a12| is negligible the row
/// form (lambda - a22, a21) is used instead. Requires |tr A| < 2.
Diagonalization canonical_diagonalizer(const Mat2B& a);

/// Diagonalizer of a perturbation `next` of prev.A^2, obtained as
/// S~ = S V~ with V~ built from the eigenvectors of B = S^-1 next S and
/// normalized by a square root of det V taken next to the unperturbed value.
/// The eigenvalue of `next` paired with lambda^2 is the one nearest to it.
/// Empty when `next` is not elliptic.
std::optional<Diagonalization> continue_diagonalizer(const Diagonalization& prev, const Mat2B& next);

/// ||S diag(lambda, partner) S^-1 - A||, relative to max(1, ||A||).
BigReal reconstruction_error(const Diagonalization& d, const Mat2B& a);

BigReal op_norm_big(const Mat2BC& m);

// --- the build ---------------------------------------------------------------------

struct EusOptions {
  int depth = 6;
  double c0 = -1.0;
  int samples = 64;             // per interval, endpoints included
  double trace_slack = 0.1;     // |tr A~ - tr A^2| <= slack (2 - |tr A^2|)
  double window_level = 1.9;    // I_n = {|tr A_n| <= window_level} around the new zero
  int max_halvings = 60;
  unsigned start_digits = 60;
  unsigned max_digits = 6000;
  std::function<void(const std::string&)> log;  // progress lines, optional
};

struct LevelStats {
  int level = 0;
  BigReal eps;
  BigReal c;
  int halvings = 0;
  int excised_roots = 0;
  BigReal excised_measure;
  BigReal max_drift;          // sup of ||S_n - S_{n-1}|| over the samples of E~_{n-1}
  BigReal min_trace_margin;   // min of 2 - |tr A_n| over the same samples
  BigReal max_trace_shift;    // max of |tr A_n - tr A_{n-1}^2| / (2 - |tr A_{n-1}^2|)
  int samples = 0;
  BigReal root;               // the new zero t_n of tr A_n
  BigReal floor;              // max(n, sup E_{n-1})
  double window_margin = 0.0; // min of 2 - |tr A_n| over samples of I_n
  unsigned digits_needed = 0; // precision the level asked for
  DegreePattern square_pattern;  // degrees of A_{n-1}^2
  bool trace_identity = false;
  double det_defect = 0.0;
};

struct EusBuild {
  unsigned digits = 0;
  double c0 = -1.0;
  int samples = 64;
  double trace_slack = 0.1;
  double window_level = 1.9;
  std::vector<BigReal> c;            // c_0 .. c_n
  std::vector<EusSet> e;             // E_0 .. E_n
  std::vector<EusInterval> windows;  // I_0 := E_0, then I_1 .. I_n
  std::vector<BigReal> eps;          // eps_0 .. eps_n
  std::vector<LevelStats> levels;    // entries for levels 1 .. n
  double e0_margin = 0.0;            // min of 2 - |tr A_0| over samples of E_0

  int depth() const { return static_cast<int>(c.size()) - 1; }
  /// Level whose window contains t, or -1.
  int origin(const BigReal& t) const;
  /// Kicks c_0 .. c_n continued by c_j = 0 (M = identity) past the build.
  BasicDyadicKicks<BigReal> kicks() const;
};

/// Thrown when a level cannot be completed; carries the finished prefix.
class EusAbort : public NumericalAbort {
 public:
  EusAbort(const std::string& what, EusBuild partial, int failed_level)
      : NumericalAbort(what), partial_(std::move(partial)), failed_level_(failed_level) {}
  const EusBuild& partial() const { return partial_; }
  int failed_level() const { return failed_level_; }

 private:
  EusBuild partial_;
  int failed_level_;
};

/// The working precision cannot resolve a step; `digits()` is an estimate
/// of what would.
class PrecisionShortfall : public NumericalAbort {
 public:
  PrecisionShortfall(const std::string& what, unsigned digits) : NumericalAbort(what), digits_(digits) {}
  unsigned digits() const { return digits_; }

 private:
  unsigned digits_;
};

/// eps_n = 3^-n min_{j<n} |I_j| with I_0 := E_0.
BigReal eps_for_level(const std::vector<EusInterval>& windows, int n);

/// Runs the induction to options.depth, restarting at higher precision
/// whenever a level reports that the current precision cannot resolve it.
/// Throws EusAbort when the needed precision exceeds options.max_digits or a
/// level fails outright.
EusBuild build_eus(const EusOptions& options);

/// Roots of tr A_{n-1} on E_{n-1}, the cut set E~_{n-1} and the first
/// passing coefficient: on every sample of E~ the new trace stays within the
/// slack of tr A_{n-1}^2 and the diagonalizer moves by less than eps.
struct ClosenessResult {
  BigReal c;
  EusSet e_tilde;
  std::vector<BigReal> roots;
  int halvings = 0;
  BigReal max_drift;
  BigReal min_trace_margin;
  BigReal max_trace_shift;
  int samples = 0;
  unsigned digits_needed = 0;
};
ClosenessResult shrink_for_closeness(const EusBuild& partial, const BigReal& eps, const BigReal& c_candidate,
                                     const EusOptions& options);

/// A zero t0 > floor of tr A_n (c fully given) and the closed window around
/// it where |tr A_n| <= level. The upper bracket is the Cauchy bound of the
/// trace polynomial.
struct NewWindow {
  EusInterval window;
  BigReal root;
  unsigned digits_needed = 0;
};
NewWindow find_new_interval(const std::vector<BigReal>& c, const Poly<BigReal>& trace, const BigReal& floor,
                            double level);

/// Diagonalizers S_origin(t), ..., S_upto(t) at one parameter.
std::vector<Diagonalization> diagonalizer_chain(const EusBuild& build, const BigReal& t, int upto);

struct MembershipReport {
  std::string t;            // exact decimal
  double t_approx = 0.0;
  int origin = -1;
  unsigned digits = 0;
  std::uint64_t horizon = 0;
  double early_max = 0.0;   // max log||P_K(t)|| over K <= K_max/2
  double late_max = 0.0;    // over K_max/2 < K <= K_max
  bool stabilized = false;
  double dyadic_mismatch = 0.0;  // partial products vs the sequential product
  std::vector<double> traces;    // tr A_n(t) for origin <= n <= depth
  bool traces_elliptic = false;
  double log_bound = 0.0;        // log of C^2 exp{C (C sum|c_j| + sum eps_j)}, C = max ||S_j(t)||
};

/// Evaluates P_K(t) for every K <= K_max; PASS when the running max of the
/// log norm does not grow by more than log 2 between the halves.
MembershipReport verify_membership(const EusBuild& build, const BigReal& t, std::uint64_t k_max);

struct InvariantCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Structural checks on a finished (or partial) build: the eps formula,
/// I_n inside (n, inf) and above E_{n-1}, drift below eps_n, the trace
/// margins, the excised measure, nesting of E_n and the degree pattern.
std::vector<InvariantCheck> check_invariants(const EusBuild& build);

/// `count` parameters spread over E_depth: equal shares per window origin,
/// each taken at an evenly spaced position inside the pieces of that origin.
std::vector<BigReal> sample_members(const EusBuild& build, int count);

}  // namespace kicked
