#pragma once

// Indexed kick providers k -> Phi_k (1-based). Providers are pure functions
// of the index so one source can be shared by any number of workers.

#include "kicked/mat2.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kicked {

class KickSource {
 public:
  using Provider = std::function<Mat2R(std::uint64_t)>;

  KickSource(std::string name, Provider provider, std::optional<double> bound = std::nullopt,
             std::optional<std::uint64_t> length = std::nullopt);

  /// Phi_k after validation: unimodular, within the declared bound, and k
  /// inside the declared length. Throws KickError carrying k otherwise.
  Mat2R at(std::uint64_t k) const;

  const std::string& name() const { return name_; }
  std::optional<double> bound() const { return bound_; }
  std::optional<std::uint64_t> length() const { return length_; }

  /// max(1, C^2) for the declared bound C; 1 when no bound is declared.
  double growth_constant() const;

 private:
  std::string name_;
  Provider provider_;
  std::optional<double> bound_;
  std::optional<std::uint64_t> length_;
};

KickSource identity_kicks();
KickSource constant_kicks(const Mat2R& phi, std::string name = "constant");
/// Phi_k = lower_shear(c) for every k.
KickSource constant_lower_shear_kicks(double c);

/// Uniform draws from a stateless hash of (seed, k, slot); the same triple
/// always gives the same value in [0, 1).
double hashed_uniform(std::uint64_t seed, std::uint64_t k, std::uint64_t slot);

/// Phi_k = shear(s) dilation(lambda) rotation(alpha) with |s| <= sqrt(C) - 1/sqrt(C),
/// |log lambda| <= log(C)/2 and alpha uniform in [-pi/2, pi/2]. Each factor pair
/// stays within sqrt(C) in norm, so ||Phi_k|| <= C holds by construction.
KickSource random_bounded_kicks(std::uint64_t seed, double bound);

/// Phi_k = ((lambda_k, s_k), (0, 1/lambda_k)), cycling through the lists.
KickSource triangular_kicks(std::vector<double> lambdas, std::vector<double> shifts);

/// Kicks from their Iwasawa angles: Phi_k = rotation(angle(k)).
KickSource rotation_kicks(std::function<double(std::uint64_t)> angle, std::string name);

}  // namespace kicked
