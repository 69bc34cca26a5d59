#include "kicked/kick_spec.hpp"

#include "kicked/construct_seq.hpp"
#include "kicked/dyadic.hpp"
#include "kicked/eus_io.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

namespace kicked {

namespace {

double parse_real(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size()) throw std::invalid_argument("not a number: '" + token + "'");
  return v;
}

std::string dyadic_name(const std::vector<double>& c) {
  std::string name = "dyadic:";
  for (std::size_t i = 0; i < c.size(); ++i) name += (i ? "," : "") + std::to_string(c[i]);
  return name;
}

KickSource dyadic_source(std::vector<double> c, std::string name) {
  DyadicKicks kicks(std::move(c), 0.0);
  return KickSource(std::move(name), [kicks](std::uint64_t k) { return kicks.kick(k); });
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) out.push_back(parse_real(token));
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) flush();
    else token += ch;
  }
  flush();
  return out;
}

KickSource parse_kick_spec(const std::string& spec, const KickSpecOptions& options) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto need_arg = [&] {
    if (arg.empty()) throw std::invalid_argument("kick spec '" + kind + "' needs an argument after ':'");
  };

  if (kind == "identity") return identity_kicks();
  if (kind == "constant-m") {
    need_arg();
    return constant_lower_shear_kicks(parse_real(arg));
  }
  if (kind == "constant") {
    need_arg();
    const auto v = parse_real_list(arg);
    if (v.size() != 4) throw std::invalid_argument("constant kicks need four entries a,b,c,d");
    const Mat2R phi{v[0], v[1], v[2], v[3]};
    require_unimodular(phi);
    return constant_kicks(phi, spec);
  }
  if (kind == "random") {
    if (!(options.bound >= 1.0)) throw std::invalid_argument("random kicks need a bound C >= 1");
    return random_bounded_kicks(options.seed, options.bound);
  }
  if (kind == "triangular") {
    need_arg();
    const auto semi = arg.find(';');
    if (semi == std::string::npos) throw std::invalid_argument("triangular kicks need 'lambdas;shifts'");
    return triangular_kicks(parse_real_list(arg.substr(0, semi)), parse_real_list(arg.substr(semi + 1)));
  }
  if (kind == "rotation") {
    need_arg();
    const double alpha = parse_real(arg);
    return rotation_kicks([alpha](std::uint64_t) { return alpha; }, spec);
  }
  if (kind == "dyadic") {
    need_arg();
    auto c = parse_real_list(arg);
    if (c.empty()) throw std::invalid_argument("dyadic kicks need at least one coefficient");
    return dyadic_source(c, dyadic_name(c));
  }
  if (kind == "eus") {
    need_arg();
    const EusBuild build = load_eus(arg);
    std::vector<double> c;
    for (const auto& cj : build.c) c.push_back(to_double(cj));
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] == 0.0) throw std::invalid_argument("EUS coefficient c_" + std::to_string(j) + " underflows double");
    return dyadic_source(c, spec);
  }
  if (kind == "seq") {
    need_arg();
    const SeqConstruction construction(parse_real_list(arg));
    KickSource inner = construction.kick_source();
    return KickSource(spec, [inner](std::uint64_t k) { return inner.at(k); }, 1.0);
  }
  throw std::invalid_argument("unknown kick spec '" + spec + "'");
}

}  // namespace kicked
