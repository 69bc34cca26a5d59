#include "kicked/kicks.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace kicked {

KickSource::KickSource(std::string name, Provider provider, std::optional<double> bound,
                       std::optional<std::uint64_t> length)
    : name_(std::move(name)), provider_(std::move(provider)), bound_(bound), length_(length) {}

Mat2R KickSource::at(std::uint64_t k) const {
  if (k == 0) throw KickError(k, "kick indices start at 1");
  if (length_ && k > *length_) throw KickError(k, "beyond declared length");
  Mat2R phi;
  try {
    phi = provider_(k);
  } catch (const KickError&) {
    throw;
  } catch (const std::exception& e) {
    throw KickError(k, e.what());
  }
  if (!is_unimodular(phi)) throw KickError(k, "not unimodular: " + to_string(phi));
  // The relative slack absorbs rounding in kicks built exactly at the bound.
  if (bound_ && op_norm(phi) > *bound_ * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "norm " << op_norm(phi) << " exceeds declared bound " << *bound_;
    throw KickError(k, os.str());
  }
  return phi;
}

double KickSource::growth_constant() const {
  return bound_ ? std::max(1.0, *bound_ * *bound_) : 1.0;
}

KickSource identity_kicks() {
  return KickSource("identity", [](std::uint64_t) { return Mat2R::identity(); }, 1.0);
}

KickSource constant_kicks(const Mat2R& phi, std::string name) {
  require_unimodular(phi);
  return KickSource(std::move(name), [phi](std::uint64_t) { return phi; }, op_norm(phi));
}

KickSource constant_lower_shear_kicks(double c) {
  std::ostringstream os;
  os.precision(17);
  os << "constant-m:" << c;
  return constant_kicks(lower_shear(c), os.str());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double hashed_uniform(std::uint64_t seed, std::uint64_t k, std::uint64_t slot) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ k) ^ (slot * 0x632be59bd9b4e019ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

KickSource random_bounded_kicks(std::uint64_t seed, double bound) {
  if (!(bound >= 1.0)) throw std::invalid_argument("random kicks need a bound C >= 1");
  const double root = std::sqrt(bound);
  const double s_max = root - 1.0 / root;
  const double log_max = std::log(root);
  auto provider = [=](std::uint64_t k) {
    const double s = s_max * (2.0 * hashed_uniform(seed, k, 0) - 1.0);
    const double lambda = std::exp(log_max * (2.0 * hashed_uniform(seed, k, 1) - 1.0));
    const double alpha = std::numbers::pi * (hashed_uniform(seed, k, 2) - 0.5);
    return shear(s) * dilation(lambda) * rotation(alpha);
  };
  std::ostringstream os;
  os.precision(17);
  os << "random:seed=" << seed << ",C=" << bound;
  return KickSource(os.str(), provider, bound);
}

KickSource triangular_kicks(std::vector<double> lambdas, std::vector<double> shifts) {
  if (lambdas.empty() || lambdas.size() != shifts.size())
    throw std::invalid_argument("triangular kicks need equally long, non-empty lambda and shift lists");
  double bound = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] == 0.0) throw std::invalid_argument("triangular kick with lambda = 0");
    bound = std::max(bound, op_norm(Mat2R{lambdas[i], shifts[i], 0.0, 1.0 / lambdas[i]}));
  }
  auto provider = [l = std::move(lambdas), s = std::move(shifts)](std::uint64_t k) {
    const std::size_t i = (k - 1) % l.size();
    return Mat2R{l[i], s[i], 0.0, 1.0 / l[i]};
  };
  return KickSource("triangular", provider, bound);
}

KickSource rotation_kicks(std::function<double(std::uint64_t)> angle, std::string name) {
  return KickSource(std::move(name), [angle = std::move(angle)](std::uint64_t k) { return rotation(angle(k)); },
                    1.0);
}

}  // namespace kicked
