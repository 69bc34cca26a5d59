#include "kicked/analysis.hpp"

#include "kicked/errors.hpp"
#include "kicked/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace kicked {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

/// Runs task(i) for i in [0, count) on `workers` threads. Each index writes
/// only its own slot, so the merged result does not depend on scheduling.
template <class Task>
void parallel_for(std::size_t count, unsigned workers, Task&& task) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

json rule_json(const HorizonRule& r) {
  return {{"horizon", r.horizon}, {"threshold", r.threshold}, {"slope_tol", r.slope_tol}};
}

}  // namespace

// --- scan ---------------------------------------------------------------------------

CellVerdict classify(const KickSource& kicks, double t, const HorizonRule& rule) {
  if (rule.horizon < 2) throw std::invalid_argument("horizon must be at least 2");
  CellVerdict v;
  v.t = t;
  SlopeFit fit(rule.horizon);
  double sup = 0.0;
  run_evolution(kicks, t, rule.horizon, [&](std::uint64_t n, const ScaledProduct<double>& p) {
    const double y = p.log_norm();
    sup = std::max(sup, y);
    fit.add(n, y);
  });
  v.sup_log_norm = sup;
  v.slope = fit.slope();
  v.sup_bounded = sup <= std::log(rule.threshold);
  v.slope_bounded = v.slope <= rule.slope_tol;
  return v;
}

ScanResult scan(const KickSource& kicks, const ScanOptions& options) {
  if (!(options.t_max > 0.0)) throw std::invalid_argument("scan needs T > 0");
  if (options.cells == 0) throw std::invalid_argument("scan needs at least one cell");
  ScanResult r;
  r.options = options;
  r.kicks = kicks.name();
  r.cell_width = options.t_max / static_cast<double>(options.cells);
  r.cells.resize(options.cells);
  parallel_for(options.cells, options.workers, [&](std::size_t i) {
    r.cells[i] = classify(kicks, (static_cast<double>(i) + 0.5) * r.cell_width, options.rule);
    r.cells[i].width = r.cell_width;
  });

  // Cells adjacent to a verdict change are split once.
  std::vector<bool> split(options.cells, false);
  if (options.refine_boundary) {
    for (std::size_t i = 0; i + 1 < options.cells; ++i) {
      if (r.cells[i].bounded() != r.cells[i + 1].bounded()) split[i] = split[i + 1] = true;
    }
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < options.cells; ++i)
      if (split[i]) which.push_back(i);
    r.refined.resize(2 * which.size());
    parallel_for(r.refined.size(), options.workers, [&](std::size_t k) {
      const double lo = static_cast<double>(which[k / 2]) * r.cell_width;
      const double t = lo + (k % 2 == 0 ? 0.25 : 0.75) * r.cell_width;
      r.refined[k] = classify(kicks, t, options.rule);
      r.refined[k].width = r.cell_width / 2;
    });
  }

  // Edges j T / parts, computed the same way for cells and half cells so
  // neighbouring pieces of the bounded set touch exactly.
  auto edge = [&](std::size_t j, std::size_t parts) {
    return options.t_max * static_cast<double>(j) / static_cast<double>(parts);
  };
  CompensatedSum<double> both, sup_only, slope_only;
  auto tally = [&](const CellVerdict& v, double lo, double hi) {
    if (v.bounded()) {
      both.add(v.width);
      r.bounded_set.add(lo, hi);
    }
    if (v.sup_bounded) sup_only.add(v.width);
    if (v.slope_bounded) slope_only.add(v.width);
  };
  std::size_t next_refined = 0;
  for (std::size_t i = 0; i < options.cells; ++i) {
    if (r.cells[i].bounded()) ++r.bounded_cells;
    if (!split[i]) {
      tally(r.cells[i], edge(i, options.cells), edge(i + 1, options.cells));
      continue;
    }
    for (std::size_t h = 0; h < 2; ++h, ++next_refined)
      tally(r.refined[next_refined], edge(2 * i + h, 2 * options.cells), edge(2 * i + h + 1, 2 * options.cells));
  }
  r.measure = both.value();
  r.measure_sup_only = sup_only.value();
  r.measure_slope_only = slope_only.value();
  return r;
}

void write_scan_csv(std::ostream& out, const ScanResult& r) {
  out << "t,verdict,sup_lognorm,slope\n";
  auto row = [&](const CellVerdict& v) {
    out << fmt17(v.t) << ',' << (v.bounded() ? "bounded" : "growing") << ',' << fmt17(v.sup_log_norm) << ','
        << fmt17(v.slope) << '\n';
  };
  for (const auto& v : r.cells) row(v);
  for (const auto& v : r.refined) row(v);
}

json scan_summary(const ScanResult& r) {
  json bounded = json::array();
  for (const auto& p : r.bounded_set.intervals()) bounded.push_back({p.lo, p.hi});
  return {{"kicks", r.kicks},
          {"T", r.options.t_max},
          {"cells", r.options.cells},
          {"cell_width", r.cell_width},
          {"rule", rule_json(r.options.rule)},
          {"refine_boundary", r.options.refine_boundary},
          {"bounded_cells", r.bounded_cells},
          {"measure", r.measure},
          {"measure_sup_only", r.measure_sup_only},
          {"measure_slope_only", r.measure_slope_only},
          {"bounded_intervals", bounded}};
}

// --- growth map ---------------------------------------------------------------------

GrowthMapResult growth_map(const KickSource& kicks, const GrowthMapOptions& o) {
  if (o.re_points == 0 || o.im_points == 0 || o.horizon == 0) throw std::invalid_argument("empty growth map");
  GrowthMapResult r;
  r.options = o;
  r.kicks = kicks.name();
  r.k = kicks.growth_constant();
  const std::size_t count = o.re_points * o.im_points;
  r.points.resize(count);
  auto coord = [](double lo, double hi, std::size_t i, std::size_t n) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };

  // The angle sum does not depend on z; compute it once through a probe point.
  std::optional<double> angle_sum;
  if (kicks.bound()) angle_sum = growth_lower_bound(kicks, {0.0, 1.0}, o.horizon).angle_sum;

  parallel_for(count, o.workers, [&](std::size_t idx) {
    const std::size_t row = idx / o.re_points, col = idx % o.re_points;
    GrowthPoint& g = r.points[idx];
    g.z = {coord(o.re_min, o.re_max, col, o.re_points), coord(o.im_min, o.im_max, row, o.im_points)};
    double log_norm = 0.0;
    if (g.z.imag() == 0.0) {
      run_evolution(kicks, g.z.real(), o.horizon,
                    [&](std::uint64_t, const ScaledProduct<double>& p) { log_norm = p.log_norm(); });
    } else {
      run_evolution(kicks, g.z, o.horizon,
                    [&](std::uint64_t, const ScaledProduct<std::complex<double>>& p) { log_norm = p.log_norm(); });
    }
    const double n = static_cast<double>(o.horizon);
    g.u = log_norm / n;
    g.majorant = std::log1p(std::abs(g.z)) + std::log(r.k);
    g.violates = g.u > g.majorant + 1e-9;
    if (angle_sum && g.z.imag() > 0.0) {
      const std::complex<double> half = g.z / 2.0;
      const double bound = half.imag() / (8.0 * r.k * (1.0 + std::abs(half))) * *angle_sum;
      const double slack = std::log(op_norm(shear(half))) + std::log(op_norm(shear(-half)));
      g.certified = (bound - slack) / n;
    }
  });
  for (const auto& g : r.points) {
    if (g.violates) ++r.violations;
    if (g.certified) {
      const double excess = g.u - *g.certified;
      if (!r.min_certified_excess || excess < *r.min_certified_excess) r.min_certified_excess = excess;
    }
  }
  return r;
}

void write_growth_map_csv(std::ostream& out, const GrowthMapResult& r) {
  out << "re_z,im_z,u_N\n";
  for (const auto& g : r.points) out << fmt17(g.z.real()) << ',' << fmt17(g.z.imag()) << ',' << fmt17(g.u) << '\n';
}

json growth_map_summary(const GrowthMapResult& r) {
  const auto& o = r.options;
  json j = {{"kicks", r.kicks},
            {"re", {o.re_min, o.re_max, o.re_points}},
            {"im", {o.im_min, o.im_max, o.im_points}},
            {"horizon", o.horizon},
            {"k", r.k},
            {"majorization_violations", r.violations},
            {"majorization", r.violations == 0 ? "PASS" : "FAIL"}};
  j["min_certified_excess"] = r.min_certified_excess ? json(*r.min_certified_excess) : json(nullptr);
  if (r.min_certified_excess) j["lower_bound"] = *r.min_certified_excess >= -1e-9 ? "PASS" : "FAIL";
  return j;
}

// --- upper-triangular windows ----------------------------------------------------------

TriKicks::TriKicks(std::vector<double> lambdas, std::vector<double> shifts)
    : lambdas_(std::move(lambdas)), shifts_(std::move(shifts)) {
  if (lambdas_.empty() || lambdas_.size() != shifts_.size())
    throw std::invalid_argument("triangular kicks need equally long, non-empty lambda and shift lists");
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    if (lambdas_[i] == 0.0 || !std::isfinite(lambdas_[i]) || !std::isfinite(shifts_[i]))
      throw std::invalid_argument("triangular kick " + std::to_string(i + 1) + " is degenerate");
    t0_ = std::max(t0_, std::abs(shifts_[i] / lambdas_[i]));
  }
}

KickSource TriKicks::kick_source() const { return triangular_kicks(lambdas_, shifts_); }

TriProduct tri_product(const TriKicks& tri, double t, std::uint64_t j, std::uint64_t m) {
  TriProduct p;
  for (std::uint64_t i = 1; i <= m; ++i) {
    const double lambda = tri.lambda(j + i), s = tri.shift(j + i);
    p.s += (t + s / lambda) / (p.pi * p.pi);
    p.pi *= lambda;
  }
  return p;
}

Mat2R tri_product_direct(const TriKicks& tri, double t, std::uint64_t j, std::uint64_t m) {
  Mat2R p = Mat2R::identity();
  const Mat2R h = shear(t);
  for (std::uint64_t i = 1; i <= m; ++i) {
    const double lambda = tri.lambda(j + i);
    const Mat2R psi{lambda, tri.shift(j + i), 0.0, 1.0 / lambda};
    p = psi * h * p;
  }
  return p;
}

WindowResult rost_window(const TriKicks& tri, double t, double k_level, std::uint64_t n_max, std::uint64_t starts) {
  if (!(t > tri.t0())) throw std::invalid_argument("window detector needs t > t0 = " + fmt17(tri.t0()));
  if (!(k_level > 0.0)) throw std::invalid_argument("window detector needs K > 0");
  if (starts == 0) starts = tri.size();
  WindowResult r;
  const double k4 = std::pow(std::max(k_level, 1.0), 4);
  r.proven_bound = k4 / (t - tri.t0()) + 1.0;
  r.stated_bound = k4 / (t * (t - tri.t0())) + 1.0;
  r.first_exit.assign(starts, 0);
  std::uint64_t worst = 0;
  bool all = true;
  for (std::uint64_t j = 0; j < starts; ++j) {
    TriProduct p;
    for (std::uint64_t m = 1; m <= n_max; ++m) {
      const double lambda = tri.lambda(j + m), s = tri.shift(j + m);
      p.s += (t + s / lambda) / (p.pi * p.pi);
      p.pi *= lambda;
      if (op_norm(p.matrix()) > k_level) {
        r.first_exit[j] = m;
        break;
      }
    }
    if (r.first_exit[j] == 0) {
      all = false;
    } else if (r.first_exit[j] > worst) {
      worst = r.first_exit[j];
      r.worst_start = j;
    }
  }
  if (all) r.window = worst;
  return r;
}

double case_a_threshold(const KickSource& kicks, std::uint64_t n) {
  double t0 = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const auto f = iwasawa(kicks.at(k));
    t0 = std::max(t0, std::abs(f.s / (f.lambda * f.lambda)));
  }
  return t0;
}

// --- Schrodinger ---------------------------------------------------------------------

double SchrodingerResult::log_abs(std::size_t k) const {
  if (mantissa[k] == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mantissa[k])) + exponent[k] * std::log(2.0);
}

SchrodingerResult schrodinger(const std::vector<double>& c, double t, const SchrodingerOptions& o) {
  if (o.horizon < 2) throw std::invalid_argument("Schrodinger horizon must be at least 2");
  if (c.empty()) throw std::invalid_argument("Schrodinger needs a potential sequence");
  SchrodingerResult r;
  r.mantissa.reserve(o.horizon + 1);
  r.exponent.reserve(o.horizon + 1);
  double prev = o.q0, cur = o.q1;
  int scale = 0;  // both prev and cur carry the factor 2^scale
  r.mantissa = {prev, cur};
  r.exponent = {0, 0};
  constexpr int kShift = 512;
  const double big = std::ldexp(1.0, kShift), small = std::ldexp(1.0, -kShift);
  for (std::uint64_t k = 1; k < o.horizon; ++k) {
    const double next = (2.0 + t * c[(k - 1) % c.size()]) * cur - prev;
    prev = cur;
    cur = next;
    const double m = std::max(std::abs(prev), std::abs(cur));
    if (m > big) {
      prev = std::ldexp(prev, -kShift);
      cur = std::ldexp(cur, -kShift);
      scale += kShift;
    } else if (m != 0.0 && m < small) {
      prev = std::ldexp(prev, kShift);
      cur = std::ldexp(cur, kShift);
      scale -= kShift;
    }
    if (!std::isfinite(cur)) throw NumericalAbort("Schrodinger recurrence overflowed at k = " + std::to_string(k));
    r.mantissa.push_back(cur);
    r.exponent.push_back(scale);
  }
  r.early_max = r.late_max = -std::numeric_limits<double>::infinity();
  SlopeFit fit(o.horizon);
  for (std::uint64_t k = 1; k <= o.horizon; ++k) {
    const double y = r.log_abs(k);
    if (2 * k <= o.horizon) r.early_max = std::max(r.early_max, y);
    else r.late_max = std::max(r.late_max, y);
    if (std::isfinite(y)) fit.add(k, y);
  }
  r.slope = fit.slope();
  r.bounded = r.late_max <= r.early_max + o.tolerance;
  return r;
}

CellVerdict schrodinger_matrix_verdict(const std::vector<double>& c, double t, const HorizonRule& rule) {
  if (c.empty()) throw std::invalid_argument("Schrodinger needs a potential sequence");
  const KickSource kicks("schrodinger", [c](std::uint64_t k) { return lower_shear(c[(k - 1) % c.size()]); });
  return classify(kicks, t, rule);
}

}  // namespace kicked
