#include "kicked/eus_io.hpp"

#include <fstream>
#include <stdexcept>

namespace kicked {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json big(const BigReal& x) { return to_exact_string(x); }
BigReal big_from(const json& j) { return BigReal(j.get<std::string>()); }

json interval_json(const EusInterval& i) { return json::array({big(i.lo), big(i.hi)}); }
EusInterval interval_from(const json& j) { return {big_from(j.at(0)), big_from(j.at(1))}; }

json set_json(const EusSet& s) {
  json out = json::array();
  for (const auto& p : s.intervals()) out.push_back(interval_json(p));
  return out;
}

EusSet set_from(const json& j) {
  EusSet s;
  for (const auto& p : j) {
    const auto i = interval_from(p);
    s.add(i.lo, i.hi);
  }
  return s;
}

json pattern_json(const DegreePattern& p) { return json::array({p.d11, p.d12, p.d21, p.d22}); }
DegreePattern pattern_from(const json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

json level_json(const LevelStats& s) {
  return {{"level", s.level},
          {"eps", big(s.eps)},
          {"c", big(s.c)},
          {"halvings", s.halvings},
          {"excised_roots", s.excised_roots},
          {"excised_measure", big(s.excised_measure)},
          {"max_drift", big(s.max_drift)},
          {"min_trace_margin", big(s.min_trace_margin)},
          {"max_trace_shift", big(s.max_trace_shift)},
          {"samples", s.samples},
          {"root", big(s.root)},
          {"floor", big(s.floor)},
          {"window_margin", s.window_margin},
          {"digits_needed", s.digits_needed},
          {"square_degrees", pattern_json(s.square_pattern)},
          {"trace_identity", s.trace_identity},
          {"det_defect", s.det_defect}};
}

LevelStats level_from(const json& j) {
  LevelStats s;
  s.level = j.at("level").get<int>();
  s.eps = big_from(j.at("eps"));
  s.c = big_from(j.at("c"));
  s.halvings = j.at("halvings").get<int>();
  s.excised_roots = j.at("excised_roots").get<int>();
  s.excised_measure = big_from(j.at("excised_measure"));
  s.max_drift = big_from(j.at("max_drift"));
  s.min_trace_margin = big_from(j.at("min_trace_margin"));
  s.max_trace_shift = big_from(j.at("max_trace_shift"));
  s.samples = j.at("samples").get<int>();
  s.root = big_from(j.at("root"));
  s.floor = big_from(j.at("floor"));
  s.window_margin = j.at("window_margin").get<double>();
  s.digits_needed = j.at("digits_needed").get<unsigned>();
  s.square_pattern = pattern_from(j.at("square_degrees"));
  s.trace_identity = j.at("trace_identity").get<bool>();
  s.det_defect = j.at("det_defect").get<double>();
  return s;
}

}  // namespace

json eus_to_json(const EusBuild& b) {
  json j;
  j["format"] = "kicked-eus";
  j["version"] = kFormatVersion;
  j["digits"] = b.digits;
  j["c0"] = b.c0;
  j["samples"] = b.samples;
  j["trace_slack"] = b.trace_slack;
  j["window_level"] = b.window_level;
  j["depth"] = b.depth();
  j["e0_margin"] = b.e0_margin;
  j["c"] = json::array();
  for (const auto& c : b.c) j["c"].push_back(big(c));
  j["eps"] = json::array();
  for (const auto& e : b.eps) j["eps"].push_back(big(e));
  j["windows"] = json::array();
  for (const auto& w : b.windows) j["windows"].push_back(interval_json(w));
  j["sets"] = json::array();
  for (const auto& e : b.e) j["sets"].push_back(set_json(e));
  j["levels"] = json::array();
  for (const auto& l : b.levels) j["levels"].push_back(level_json(l));
  return j;
}

EusBuild eus_from_json(const json& j) {
  if (j.value("format", "") != "kicked-eus") throw std::runtime_error("not an EUS build file");
  if (j.value("version", 0) != kFormatVersion) throw std::runtime_error("unsupported EUS build version");
  const unsigned digits = j.at("digits").get<unsigned>();
  PrecisionGuard guard(digits);
  EusBuild b;
  b.digits = digits;
  b.c0 = j.at("c0").get<double>();
  b.samples = j.at("samples").get<int>();
  b.trace_slack = j.at("trace_slack").get<double>();
  b.window_level = j.at("window_level").get<double>();
  b.e0_margin = j.at("e0_margin").get<double>();
  for (const auto& c : j.at("c")) b.c.push_back(big_from(c));
  for (const auto& e : j.at("eps")) b.eps.push_back(big_from(e));
  for (const auto& w : j.at("windows")) b.windows.push_back(interval_from(w));
  for (const auto& e : j.at("sets")) b.e.push_back(set_from(e));
  for (const auto& l : j.at("levels")) b.levels.push_back(level_from(l));
  if (b.e.size() != b.c.size() || b.windows.size() != b.c.size() || b.eps.size() != b.c.size() ||
      b.levels.size() + 1 != b.c.size())
    throw std::runtime_error("EUS build file has inconsistent level counts");
  return b;
}

void save_eus(const EusBuild& build, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << eus_to_json(build).dump(2) << '\n';
}

EusBuild load_eus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return eus_from_json(json::parse(in));
}

json membership_to_json(const MembershipReport& r) {
  return {{"t", r.t},
          {"t_approx", r.t_approx},
          {"origin", r.origin},
          {"digits", r.digits},
          {"horizon", r.horizon},
          {"early_max", r.early_max},
          {"late_max", r.late_max},
          {"stabilized", r.stabilized},
          {"dyadic_mismatch", r.dyadic_mismatch},
          {"traces", r.traces},
          {"traces_elliptic", r.traces_elliptic},
          {"log_bound", r.log_bound}};
}

}  // namespace kicked
