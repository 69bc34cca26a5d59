#include "kicked/construct_eus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace kicked {

namespace mp = boost::multiprecision;

namespace {

BigReal babs(const BigReal& x) { return mp::abs(x); }
int bsign(const BigReal& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }
double log10_of(const BigReal& x) { return log_of(x) / 2.302585092994045684; }

Mat2BC to_bc(const Mat2B& m) { return convert<BigComplex>(m); }

BigComplex big_polar_unit(const BigReal& half_trace) {
  // half_trace + i sqrt(1 - half_trace^2)
  return {half_trace, mp::sqrt(BigReal(1) - half_trace * half_trace)};
}

std::string show(const BigReal& x, int digits = 12) { return x.str(digits, std::ios_base::scientific); }


Mat2B kick_product(const Mat2B& a, const BigReal& c) {
  // A M(c) A without forming M(c)
  const Mat2B am{a.a11 + c * a.a12, a.a12, a.a21 + c * a.a22, a.a22};
  return am * a;
}

}  // namespace

// --- polynomial side ---------------------------------------------------------

template <class R>
PolyMat2<R> kick_step(const PolyMat2<R>& a, const R& c, const R& tol) {
  if (c == 0) throw std::invalid_argument("kick_step needs c != 0");
  PolyMat2<R> out = a * poly_lower_shear(c) * a;
  const Poly<R> tr = a.trace();
  const Poly<R> expected = tr * (tr + a.a12 * c) - Poly<R>(2);
  const Poly<R> diff = out.trace() - expected;
  const R scale = std::max({R(1), out.trace().max_abs_coefficient(), expected.max_abs_coefficient()});
  if (diff.max_abs_coefficient() > tol * scale)
    throw NumericalAbort("trace identity tr(A M(c) A) = tr A (tr A + c a12) - 2 violated");
  return out;
}

template <class R>
R det_defect(const PolyMat2<R>& a) {
  const R scale = std::max(R(1), coefficient_scale(a));
  return (a.det() - Poly<R>(1)).max_abs_coefficient() / (scale * scale);
}

template <class R>
std::vector<PolyMat2<R>> poly_chain(const std::vector<R>& c) {
  std::vector<PolyMat2<R>> out;
  PolyMat2<R> a = poly_shear<R>();
  for (const R& cj : c) {
    a = a * poly_lower_shear(cj) * a;
    out.push_back(a);
  }
  return out;
}

template <class R>
DegreePattern degree_pattern(const PolyMat2<R>& a) {
  return {a.a11.degree(), a.a12.degree(), a.a21.degree(), a.a22.degree()};
}

template PolyMat2<double> kick_step(const PolyMat2<double>&, const double&, const double&);
template PolyMat2<BigReal> kick_step(const PolyMat2<BigReal>&, const BigReal&, const BigReal&);
template double det_defect(const PolyMat2<double>&);
template BigReal det_defect(const PolyMat2<BigReal>&);
template std::vector<PolyMat2<double>> poly_chain(const std::vector<double>&);
template std::vector<PolyMat2<BigReal>> poly_chain(const std::vector<BigReal>&);
template DegreePattern degree_pattern(const PolyMat2<double>&);
template DegreePattern degree_pattern(const PolyMat2<BigReal>&);

std::vector<GoodWindow> good_region(const PolyMat2<double>& a, Interval<double> domain) {
  const Poly<double> tr = a.trace();
  if (tr.degree() < 1) throw std::invalid_argument("good_region needs a non-constant trace");
  const Poly<double> upper = tr - Poly<double>(2);
  const Poly<double> lower = tr + Poly<double>(2);
  std::vector<double> cuts{domain.lo, domain.hi};
  for (const auto* f : {&upper, &lower}) {
    const auto roots = isolate_roots<double>(*f, domain.lo, domain.hi, 256, 1e-12);
    cuts.insert(cuts.end(), roots.begin(), roots.end());
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<GoodWindow> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (!(std::abs(tr((lo + hi) / 2)) < 2.0)) continue;
    if (!out.empty() && out.back().interval.hi == lo)
      out.back().interval.hi = hi;
    else
      out.push_back({{lo, hi}, 0.0});
  }
  for (auto& w : out) {
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 64; ++k) {
      const double t = w.interval.lo + w.interval.width() * (k + 0.5) / 64;
      margin = std::min(margin, 2.0 - std::abs(tr(t)));
    }
    w.min_margin = margin;
  }
  return out;
}

IntervalSet good_region_set(const PolyMat2<double>& a, Interval<double> domain) {
  IntervalSet s;
  for (const auto& w : good_region(a, domain)) s.add(w.interval.lo, w.interval.hi);
  return s;
}

// --- pointwise side ------------------------------------------------------------

std::vector<Mat2B> a_chain(const std::vector<BigReal>& c, const BigReal& t, int n) {
  if (n >= static_cast<int>(c.size())) throw std::out_of_range("a_chain beyond the known coefficients");
  std::vector<Mat2B> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  Mat2B a = shear(t);
  for (int j = 0; j <= n; ++j) {
    a = kick_product(a, c[static_cast<std::size_t>(j)]);
    out.push_back(a);
  }
  return out;
}

BigReal trace_at(const std::vector<BigReal>& c, const BigReal& t, int n) {
  if (n >= static_cast<int>(c.size())) throw std::out_of_range("trace_at beyond the known coefficients");
  Mat2B a = shear(t);
  for (int j = 0; j <= n; ++j) a = kick_product(a, c[static_cast<std::size_t>(j)]);
  return a.trace();
}

BigReal op_norm_big(const Mat2BC& m) { return op_norm(m); }

Diagonalization canonical_diagonalizer(const Mat2B& a) {
  const BigReal tr = a.trace();
  if (!(babs(tr) < 2)) throw NumericalAbort("canonical diagonalizer needs |tr A| < 2, got " + show(tr));
  const BigComplex lambda = big_polar_unit(tr / 2);
  const BigComplex partner = big_conj(lambda);
  const BigReal scale = frobenius_norm(a);
  Mat2BC s;
  if (babs(a.a12) >= BigReal(1e-12) * scale) {
    s = {BigComplex(a.a12), BigComplex(a.a12), lambda - BigComplex(a.a11), partner - BigComplex(a.a11)};
  } else {
    s = {lambda - BigComplex(a.a22), partner - BigComplex(a.a22), BigComplex(a.a21), BigComplex(a.a21)};
  }
  const BigComplex root = big_sqrt(s.det());
  const BigComplex inv = BigComplex(1) / root;
  s *= inv;
  return {s, lambda, partner};
}

std::optional<Diagonalization> continue_diagonalizer(const Diagonalization& prev, const Mat2B& next) {
  const BigReal tr = next.trace();
  if (!(babs(tr) < 2)) return std::nullopt;
  const BigComplex l2 = prev.lambda * prev.lambda;
  const BigComplex l2b = prev.partner * prev.partner;
  const Mat2BC b = adjugate(prev.s) * to_bc(next) * prev.s;

  BigComplex mu = big_polar_unit(tr / 2);
  if (big_abs2(big_conj(mu) - l2) < big_abs2(mu - l2)) mu = big_conj(mu);
  const BigComplex mu_b = big_conj(mu);

  const BigComplex d11 = b.a11 - l2, d22 = b.a22 - l2b;
  const Mat2BC v{l2b - mu + d22, b.a12, -b.a21, mu_b - l2 - d11};
  BigComplex root = big_sqrt(v.det());
  const BigComplex ref = l2b - l2;
  if (big_abs2(root - ref) > big_abs2(root + ref)) root = -root;
  Mat2BC vt = v;
  vt *= BigComplex(1) / root;
  return Diagonalization{prev.s * vt, mu, mu_b};
}

BigReal reconstruction_error(const Diagonalization& d, const Mat2B& a) {
  const Mat2BC diag{d.lambda, BigComplex(0), BigComplex(0), d.partner};
  const Mat2BC back = d.s * diag * adjugate(d.s);
  return op_norm(back - to_bc(a)) / std::max(BigReal(1), op_norm(a));
}

// --- build helpers -------------------------------------------------------------------

int EusBuild::origin(const BigReal& t) const {
  for (std::size_t j = 0; j < windows.size(); ++j)
    if (windows[j].contains(t)) return static_cast<int>(j);
  return -1;
}

BasicDyadicKicks<BigReal> EusBuild::kicks() const { return BasicDyadicKicks<BigReal>(c, BigReal(0)); }

BigReal eps_for_level(const std::vector<EusInterval>& windows, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > windows.size()) throw std::out_of_range("eps_for_level");
  BigReal m = windows[0].width();
  for (int j = 1; j < n; ++j) m = std::min(m, windows[static_cast<std::size_t>(j)].width());
  return m / mp::pow(BigReal(3), n);
}

namespace {

std::vector<Diagonalization> chain_from(const EusBuild& build, const BigReal& t, const std::vector<Mat2B>& a,
                                        int upto) {
  const int m = build.origin(t);
  if (m < 0) throw std::invalid_argument("parameter " + show(t) + " lies in no construction window");
  if (m > upto) throw std::invalid_argument("parameter window starts above the requested level");
  std::vector<Diagonalization> out;
  out.push_back(canonical_diagonalizer(a[static_cast<std::size_t>(m)]));
  for (int j = m + 1; j <= upto; ++j) {
    auto next = continue_diagonalizer(out.back(), a[static_cast<std::size_t>(j)]);
    if (!next) throw NumericalAbort("diagonalizer chain left the elliptic range at level " + std::to_string(j));
    out.push_back(*next);
  }
  return out;
}

struct SamplePoint {
  BigReal t;
  Mat2B a;      // A_{n-1}(t)
  Mat2B a2;     // A_{n-1}(t)^2
  BigReal gap;  // 2 - |tr A_{n-1}^2|
  Diagonalization d;
};

struct LevelSamples {
  std::vector<BigReal> roots;
  EusSet e_tilde;
  BigReal excised;
  std::vector<SamplePoint> points;
  unsigned digits_needed = 0;
};

LevelSamples prepare_level(const EusBuild& b, const BigReal& eps, const EusOptions& opt) {
  const int n = b.depth() + 1;
  const EusSet& e = b.e.back();
  const unsigned digits = BigReal::default_precision();
  LevelSamples out;

  for (const auto& piece : e.intervals()) {
    const int m = b.origin(piece.mid());
    const int cells = 16 << std::min(n - 1 - m, 10);
    const BigReal tol = std::max(BigReal(eps * BigReal(1e-6)),
                                 BigReal(piece.hi * mp::pow(BigReal(10), -static_cast<int>(digits) + 10)));
    auto f = [&](const BigReal& t) { return trace_at(b.c, t, n - 1); };
    const auto r = isolate_roots<BigReal>(f, piece.lo, piece.hi, std::max(64, cells), tol);
    out.roots.insert(out.roots.end(), r.begin(), r.end());
  }
  out.e_tilde = e;
  if (!out.roots.empty()) {
    const BigReal half_width = eps / (4 * static_cast<int>(out.roots.size()));
    for (const auto& r : out.roots) out.e_tilde.remove_open(r - half_width, r + half_width);
  }
  out.excised = e.measure() - out.e_tilde.measure();

  double need = 0.0;
  for (const auto& piece : out.e_tilde.intervals()) {
    const int count = piece.width() > 0 ? opt.samples : 1;
    for (int i = 0; i < count; ++i) {
      SamplePoint p;
      p.t = count == 1 ? piece.lo : BigReal(piece.lo + piece.width() * i / (count - 1));
      const auto chain = a_chain(b.c, p.t, n - 1);
      p.a = chain.back();
      p.a2 = p.a * p.a;
      p.gap = 2 - babs(p.a2.trace());
      p.d = chain_from(b, p.t, chain, n - 1).back();
      // Rounding in the drift test scales like ||A||^2 ||S||^2 / gap.
      const BigReal sn = op_norm_big(p.d.s);
      const double cond = 2 * log10_of(frobenius_norm(p.a) + 1) + 2 * log10_of(sn) -
                          log10_of(std::max(p.gap, BigReal(1e-300)));
      need = std::max(need, 20.0 + cond - log10_of(eps));
      out.points.push_back(std::move(p));
    }
  }
  out.digits_needed = static_cast<unsigned>(std::ceil(std::max(need, 0.0)));
  return out;
}

/// First-order size of c keeping both tests with a factor 2 to spare.
BigReal first_order_magnitude(const LevelSamples& ls, const BigReal& eps, double slack) {
  BigReal best = -1;
  for (const auto& p : ls.points) {
    // A M(c) A = A^2 + c P with P = A e2 e1^T A.
    const Mat2B pm{p.a.a12 * p.a.a11, p.a.a12 * p.a.a12, p.a.a22 * p.a.a11, p.a.a22 * p.a.a12};
    if (p.a2.a12 != 0) {
      const BigReal cap = BigReal(slack) * p.gap / babs(p.a2.a12);
      if (best < 0 || cap < best) best = cap;
    }
    const Mat2BC q = adjugate(p.d.s) * to_bc(pm) * p.d.s;
    const BigComplex ref = p.d.partner * p.d.partner - p.d.lambda * p.d.lambda;
    const Mat2BC off{BigComplex(0), q.a12, -q.a21, BigComplex(0)};
    const BigReal rate = op_norm_big(p.d.s * off) / big_abs(ref);
    if (rate > 0) {
      const BigReal cap = eps / rate;
      if (best < 0 || cap < best) best = cap;
    }
  }
  if (best < 0) best = 1;
  return best / 2;
}

struct CheckOutcome {
  bool ok = true;
  BigReal max_drift = 0;
  BigReal min_margin = 2;
  BigReal max_shift = 0;
};

CheckOutcome check_candidate(const LevelSamples& ls, const BigReal& c, const BigReal& eps, double slack) {
  CheckOutcome o;
  for (const auto& p : ls.points) {
    const Mat2B at = kick_product(p.a, c);
    const BigReal tr = at.trace();
    const BigReal shift = babs(tr - p.a2.trace()) / p.gap;
    o.max_shift = std::max(o.max_shift, shift);
    o.min_margin = std::min(o.min_margin, BigReal(2 - babs(tr)));
    if (!(shift <= slack) || !(babs(tr) < 2)) {
      o.ok = false;
      return o;
    }
    const auto next = continue_diagonalizer(p.d, at);
    if (!next) {
      o.ok = false;
      return o;
    }
    const BigReal drift = op_norm_big(next->s - p.d.s);
    o.max_drift = std::max(o.max_drift, drift);
    if (!(drift < eps)) {
      o.ok = false;
      return o;
    }
  }
  return o;
}

ClosenessResult run_closeness(const EusBuild& b, const LevelSamples& ls, const BigReal& eps, BigReal c,
                              const EusOptions& opt, const std::function<bool(const BigReal&)>& extra) {
  ClosenessResult r;
  r.e_tilde = ls.e_tilde;
  r.roots = ls.roots;
  r.samples = static_cast<int>(ls.points.size());
  r.digits_needed = ls.digits_needed;
  for (int h = 0; h <= opt.max_halvings; ++h) {
    const CheckOutcome o = check_candidate(ls, c, eps, opt.trace_slack);
    if (o.ok && (!extra || extra(c))) {
      r.c = c;
      r.halvings = h;
      r.max_drift = o.max_drift;
      r.min_trace_margin = o.min_margin;
      r.max_trace_shift = o.max_shift;
      return r;
    }
    c /= 2;
  }
  std::ostringstream os;
  os << "level " << b.depth() + 1 << ": no coefficient passed after " << opt.max_halvings
     << " halvings (eps " << show(eps) << ", last c " << show(c) << ")";
  throw NumericalAbort(os.str());
}

}  // namespace

std::vector<Diagonalization> diagonalizer_chain(const EusBuild& build, const BigReal& t, int upto) {
  return chain_from(build, t, a_chain(build.c, t, upto), upto);
}

ClosenessResult shrink_for_closeness(const EusBuild& partial, const BigReal& eps, const BigReal& c_candidate,
                                     const EusOptions& options) {
  if (c_candidate == 0) throw std::invalid_argument("shrink_for_closeness needs a nonzero candidate");
  const LevelSamples ls = prepare_level(partial, eps, options);
  return run_closeness(partial, ls, eps, c_candidate, options, {});
}

NewWindow find_new_interval(const std::vector<BigReal>& c, const Poly<BigReal>& trace, const BigReal& floor,
                            double level) {
  const int n = static_cast<int>(c.size()) - 1;
  const unsigned digits = BigReal::default_precision();
  const BigReal resolution = mp::pow(BigReal(10), -static_cast<int>(digits) + 8);
  auto f = [&](const BigReal& t) { return trace_at(c, t, n); };

  const int s_floor = bsign(f(floor));
  const BigReal bound = trace.cauchy_bound();
  BigReal hi = std::max(bound, floor) * 2 + 1;
  if (s_floor == 0 || bsign(f(hi)) == s_floor)
    throw NumericalAbort("no sign change of the trace between the floor " + show(floor) + " and " + show(hi));
  BigReal lo = floor;

  while (hi > 2 * lo) {
    const BigReal m = mp::sqrt(lo * hi);
    if (bsign(f(m)) == s_floor) lo = m; else hi = m;
  }
  // Bisect until a point inside the window is found.
  BigReal inside;
  for (;;) {
    const BigReal m = (lo + hi) / 2;
    const BigReal fm = f(m);
    if (babs(fm) < 1) {
      inside = m;
      break;
    }
    if (hi - lo <= lo * resolution) {
      const double need = 20.0 + 2.0 * log10_of(frobenius_norm(a_chain(c, m, n).back()) + 1);
      throw PrecisionShortfall("trace zero not resolvable at this precision",
                               static_cast<unsigned>(std::ceil(std::max(need, 1.5 * digits))));
    }
    if (bsign(fm) == s_floor) lo = m; else hi = m;
  }
  const BigReal start_step = std::max(BigReal(hi - lo), BigReal(inside * resolution));

  auto edge = [&](int dir) {
    BigReal step = start_step;
    BigReal in = inside, out = inside + dir * step;
    while (babs(f(out)) < level) {
      in = out;
      step *= 2;
      out = inside + dir * step;
    }
    for (int i = 0; i < 80; ++i) {
      const BigReal m = (in + out) / 2;
      if (babs(f(m)) < level) in = m; else out = m;
    }
    return in;
  };
  NewWindow w;
  BigReal left = edge(-1);
  const BigReal right = edge(1);
  if (left <= floor) left = floor + (right - floor) / 1000;
  w.window = {left, right};

  // Sign-change root inside the window.
  BigReal a = left, b = right;
  const int sa = bsign(f(a));
  for (int i = 0; i < 200 && sa != 0; ++i) {
    const BigReal m = (a + b) / 2;
    if (bsign(f(m)) == sa) a = m; else b = m;
  }
  w.root = (a + b) / 2;

  const Mat2B at_root = a_chain(c, w.root, n).back();
  const double need = 20.0 + 2.0 * log10_of(frobenius_norm(at_root) + 1) +
                      std::max(0.0, log10_of(w.root) - log10_of(w.window.width()));
  w.digits_needed = static_cast<unsigned>(std::ceil(need));
  return w;
}

// --- the induction -----------------------------------------------------------

namespace {

void say(const EusOptions& opt, const std::string& line) {
  if (opt.log) opt.log(line);
}

EusBuild start_build(const EusOptions& opt) {
  if (!(opt.c0 < 0.0)) throw std::invalid_argument("the construction needs c0 < 0");
  EusBuild b;
  b.digits = BigReal::default_precision();
  b.c0 = opt.c0;
  b.samples = opt.samples;
  b.trace_slack = opt.trace_slack;
  b.window_level = opt.window_level;

  const auto a0 = poly_chain<double>({opt.c0}).front();
  const auto windows = good_region(a0, {0.0, -4.0 / opt.c0});
  if (windows.empty()) throw NumericalAbort("A_0 has no elliptic window");
  const auto widest = *std::max_element(windows.begin(), windows.end(), [](const auto& x, const auto& y) {
    return x.interval.width() < y.interval.width();
  });
  const BigReal lo(widest.interval.lo), hi(widest.interval.hi);
  const BigReal third = (hi - lo) / 3;
  const EusInterval e0{lo + third, hi - third};

  b.c.push_back(BigReal(opt.c0));
  b.e.push_back(EusSet{e0});
  b.windows.push_back(e0);
  b.eps.push_back(e0.width() / 3);
  double margin = 2.0;
  for (int i = 0; i < opt.samples; ++i) {
    const BigReal t = e0.lo + e0.width() * i / (opt.samples - 1);
    margin = std::min(margin, to_double(BigReal(2 - babs(trace_at(b.c, t, 0)))));
  }
  b.e0_margin = margin;
  return b;
}

double window_margin(const std::vector<BigReal>& c, const EusInterval& w, int samples) {
  const int n = static_cast<int>(c.size()) - 1;
  double margin = 2.0;
  for (int i = 0; i < samples; ++i) {
    const BigReal t = w.lo + w.width() * i / (samples - 1);
    margin = std::min(margin, to_double(BigReal(2 - babs(trace_at(c, t, n)))));
  }
  return margin;
}

void run_level(EusBuild& b, const EusOptions& opt) {
  const int n = b.depth() + 1;
  const unsigned digits = BigReal::default_precision();
  const BigReal eps = eps_for_level(b.windows, n);
  say(opt, "level " + std::to_string(n) + ": eps " + show(eps, 6) + " at " + std::to_string(digits) + " digits");

  LevelSamples ls = prepare_level(b, eps, opt);
  if (ls.digits_needed > digits) throw PrecisionShortfall("drift test", ls.digits_needed);

  // Upper right dominance of A_{n-1}^2 and the side on which the new zero appears.
  const auto polys = poly_chain(b.c);
  const PolyMat2<BigReal>& a_poly = polys.back();
  const PolyMat2<BigReal> sq = a_poly * a_poly;
  LevelStats st;
  st.level = n;
  st.eps = eps;
  st.square_pattern = degree_pattern(sq);
  if (!st.square_pattern.upper_right_dominating())
    throw NumericalAbort("level " + std::to_string(n) + ": A^2 is not upper right dominating");
  const int lead_sign = bsign(sq.a12.leading());
  const BigReal floor = std::max(BigReal(n), b.e.back().sup());
  const Mat2B a_floor = a_chain(b.c, floor, n - 1).back();
  const BigReal tr_sq_floor = (a_floor * a_floor).trace();
  const int floor_sign = bsign(tr_sq_floor) == 0 ? 1 : bsign(tr_sq_floor);
  // c * lead(b12) must have the sign opposite to tr A^2 at the floor.
  const int c_sign = -floor_sign * lead_sign;

  const BigReal magnitude = first_order_magnitude(ls, eps, opt.trace_slack);
  auto keeps_bracket = [&](const BigReal& c) {
    const BigReal tr = kick_product(a_floor, c).trace();
    return bsign(tr) == floor_sign;
  };
  ClosenessResult cr = run_closeness(b, ls, eps, BigReal(c_sign * magnitude), opt, keeps_bracket);

  st.c = cr.c;
  st.halvings = cr.halvings;
  st.excised_roots = static_cast<int>(cr.roots.size());
  st.excised_measure = ls.excised;
  st.max_drift = cr.max_drift;
  st.min_trace_margin = cr.min_trace_margin;
  st.max_trace_shift = cr.max_trace_shift;
  st.samples = cr.samples;
  st.floor = floor;

  const PolyMat2<BigReal> next_poly = kick_step(a_poly, cr.c, BigReal(1e-10));
  st.trace_identity = true;
  st.det_defect = to_double(det_defect(next_poly));

  std::vector<BigReal> c_next = b.c;
  c_next.push_back(cr.c);
  const NewWindow w = find_new_interval(c_next, next_poly.trace(), floor, opt.window_level);
  st.root = w.root;
  st.digits_needed = std::max(ls.digits_needed, w.digits_needed);
  if (w.digits_needed > digits) throw PrecisionShortfall("new trace window", w.digits_needed);
  st.window_margin = window_margin(c_next, w.window, opt.samples);
  if (st.window_margin < 2.0 - opt.window_level - 1e-9)
    throw NumericalAbort("level " + std::to_string(n) + ": new window does not keep its trace margin");

  EusSet e = cr.e_tilde;
  e.add(w.window.lo, w.window.hi);
  b.c = std::move(c_next);
  b.e.push_back(std::move(e));
  b.windows.push_back(w.window);
  b.eps.push_back(eps);
  b.levels.push_back(std::move(st));
  say(opt, "level " + std::to_string(n) + ": c " + show(b.c.back(), 6) + ", zero at " + show(w.root, 8) +
               ", window width " + show(w.window.width(), 4));
}

}  // namespace

EusBuild build_eus(const EusOptions& options) {
  if (options.samples < 2) throw std::invalid_argument("construction needs at least 2 samples per interval");
  unsigned digits = std::max(30u, options.start_digits);
  std::optional<EusBuild> best;  // deepest prefix reached at a sufficient precision
  for (;;) {
    PrecisionGuard guard(digits);
    EusBuild b = start_build(options);
    int level = 0;
    try {
      for (level = 1; level <= options.depth; ++level) run_level(b, options);
      return b;
    } catch (const PrecisionShortfall& np) {
      if (!best || b.depth() > best->depth()) best = b;
      const unsigned next = std::max(np.digits() + np.digits() / 4, digits + digits / 2);
      say(options, "level " + std::to_string(level) + " (" + np.what() + ") needs " + std::to_string(np.digits()) +
                       " digits");
      if (next > options.max_digits) {
        std::ostringstream os;
        os << "level " << level << " (" << np.what() << ") needs about " << np.digits()
           << " significant digits, above the cap of " << options.max_digits;
        throw EusAbort(os.str(), *best, level);
      }
      digits = next;
    } catch (const NumericalAbort& e) {
      if (!best || b.depth() > best->depth()) best = b;
      const unsigned next = digits * 2;
      say(options, std::string("level ") + std::to_string(level) + " failed: " + e.what());
      if (next > options.max_digits) throw EusAbort(e.what(), *best, level);
      digits = next;
    }
  }
}

// --- verification ---------------------------------------------------------------

MembershipReport verify_membership(const EusBuild& build, const BigReal& t, std::uint64_t k_max) {
  if (!build.e.back().contains(t)) throw std::invalid_argument("parameter is outside the constructed set");
  if (k_max < 2) throw std::invalid_argument("verification needs K_max >= 2");
  MembershipReport r;
  r.t = to_exact_string(t);
  r.t_approx = to_double(t);
  r.origin = build.origin(t);
  r.horizon = k_max;

  // Precision: what the window of this parameter needed, with a margin.
  unsigned digits = 60;
  if (r.origin >= 1) digits = std::max(digits, build.levels[static_cast<std::size_t>(r.origin - 1)].digits_needed + 30);
  digits = std::min(digits, build.digits);
  r.digits = digits;
  PrecisionGuard guard(digits);

  const BigReal tt = at_current_precision(t);
  std::vector<BigReal> c;
  for (const auto& cj : build.c) c.push_back(at_current_precision(cj));
  const BasicDyadicKicks<BigReal> kicks(c, BigReal(0));

  const int top = depth_for(k_max) + 1;
  std::vector<Mat2B> step(static_cast<std::size_t>(top + 1));
  for (int j = 0; j <= top; ++j) step[static_cast<std::size_t>(j)] = lower_shear(kicks.coefficient(static_cast<std::size_t>(j))) * shear(tt);

  std::vector<std::uint64_t> probes{1, 2, 3, 5, 6, 12, 84};
  for (std::uint64_t p = 4; p <= k_max; p *= 2) {
    probes.push_back(p - 1);
    probes.push_back(p);
    probes.push_back(p + p / 2 - 1);
  }
  probes.push_back(k_max);
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  while (!probes.empty() && probes.back() > k_max) probes.pop_back();

  const DyadicState<BigReal> state(kicks, tt, depth_for(k_max));
  ScaledProduct<BigReal> p;
  r.early_max = -std::numeric_limits<double>::infinity();
  r.late_max = -std::numeric_limits<double>::infinity();
  std::size_t next_probe = 0;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    p.left_multiply(step[ruler(k)]);
    double& slot = k <= k_max / 2 ? r.early_max : r.late_max;
    slot = std::max(slot, p.log_norm());
    if (next_probe < probes.size() && probes[next_probe] == k) {
      r.dyadic_mismatch = std::max(r.dyadic_mismatch, relative_distance(state.partial_product(k), p));
      ++next_probe;
    }
  }
  r.stabilized = r.late_max <= r.early_max + std::log(2.0);

  const int depth = build.depth();
  const auto chain = a_chain(c, tt, depth);
  r.traces_elliptic = true;
  for (int n = r.origin; n <= depth; ++n) {
    const double tr = to_double(chain[static_cast<std::size_t>(n)].trace());
    r.traces.push_back(tr);
    r.traces_elliptic = r.traces_elliptic && std::abs(tr) < 2.0;
  }

  double big_c = 1.0;
  try {
    for (const auto& d : chain_from(build, tt, chain, depth)) big_c = std::max(big_c, to_double(op_norm_big(d.s)));
    double sum_c = 0.0, sum_eps = 0.0;
    for (std::size_t j = 1; j < build.c.size(); ++j) sum_c += std::abs(to_double(build.c[j]));
    for (std::size_t j = 1; j < build.eps.size(); ++j) sum_eps += to_double(build.eps[j]);
    r.log_bound = 2.0 * std::log(big_c) + big_c * (big_c * sum_c + sum_eps);
  } catch (const NumericalAbort&) {
    r.log_bound = std::numeric_limits<double>::infinity();
  }
  return r;
}

std::vector<BigReal> sample_members(const EusBuild& build, int count) {
  std::map<int, std::vector<EusInterval>> by_origin;
  for (const auto& piece : build.e.back().intervals()) by_origin[build.origin(piece.mid())].push_back(piece);
  std::vector<BigReal> out;
  if (by_origin.empty() || count <= 0) return out;
  const int groups = static_cast<int>(by_origin.size());
  int g = 0;
  for (const auto& [origin, pieces] : by_origin) {
    const int share = count / groups + (g < count % groups ? 1 : 0);
    ++g;
    BigReal total = 0;
    for (const auto& p : pieces) total += p.width();
    for (int i = 0; i < share; ++i) {
      BigReal pos = total * (2 * i + 1) / (2 * share);
      for (const auto& p : pieces) {
        if (pos <= p.width()) {
          out.push_back(p.lo + pos);
          break;
        }
        pos -= p.width();
      }
    }
  }
  return out;
}

}  // namespace kicked

namespace kicked {

std::vector<InvariantCheck> check_invariants(const EusBuild& b) {
  PrecisionGuard guard(b.digits);
  std::vector<InvariantCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  const BigReal rel = mp::pow(BigReal(10), -static_cast<int>(b.digits) + 10);
  const double margin_floor = 2.0 - b.window_level - 1e-9;

  add("E0 trace margin", b.e0_margin >= margin_floor, "min 2-|tr A_0| = " + std::to_string(b.e0_margin));
  for (int n = 1; n <= b.depth(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    const LevelStats& st = b.levels[i - 1];
    const std::string tag = "level " + std::to_string(n) + ": ";
    const BigReal want = eps_for_level(b.windows, n);
    add(tag + "eps formula", babs(b.eps[i] - want) <= rel * want, "eps = " + show(b.eps[i]));
    const EusInterval& w = b.windows[i];
    add(tag + "window beyond n and E_{n-1}", w.lo > n && w.lo > b.e[i - 1].sup() && w.hi > w.lo,
        "I = [" + show(w.lo) + ", " + show(w.hi) + "]");
    add(tag + "drift below eps", st.max_drift < st.eps,
        "max drift " + show(st.max_drift, 4) + " over " + std::to_string(st.samples) + " samples");
    add(tag + "sampled traces elliptic", st.min_trace_margin > 0 && st.max_trace_shift <= b.trace_slack,
        "min 2-|tr| " + show(st.min_trace_margin, 4) + ", max shift " + show(st.max_trace_shift, 4));
    add(tag + "window trace margin", st.window_margin >= margin_floor,
        "min 2-|tr A_n| on I_n = " + std::to_string(st.window_margin));
    add(tag + "excised measure", st.excised_measure <= st.eps / 2 * (1 + rel),
        show(st.excised_measure, 4) + " around " + std::to_string(st.excised_roots) + " zeros");
    bool nested = true;
    for (const auto& p : b.e[i].intervals()) {
      const bool in_window = w.lo <= p.lo && p.hi <= w.hi;
      bool in_prev = false;
      for (const auto& q : b.e[i - 1].intervals()) in_prev = in_prev || (q.lo <= p.lo && p.hi <= q.hi);
      nested = nested && (in_window || in_prev);
    }
    add(tag + "E_n inside E_{n-1} plus I_n", nested, std::to_string(b.e[i].size()) + " pieces");
    add(tag + "A^2 upper right dominating", st.square_pattern.upper_right_dominating(),
        "degrees " + std::to_string(st.square_pattern.d11) + "," + std::to_string(st.square_pattern.d12) + "," +
            std::to_string(st.square_pattern.d21) + "," + std::to_string(st.square_pattern.d22));
    add(tag + "trace identity", st.trace_identity, "det defect " + std::to_string(st.det_defect));
  }
  return out;
}

}  // namespace kicked
