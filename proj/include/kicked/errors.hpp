#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kicked {

/// A matrix that was required to have determinant one does not.
class NotUnimodular : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A kick provider failed (or produced an invalid matrix) at a given index.
class KickError : public std::runtime_error {
 public:
  KickError(std::size_t index, const std::string& what)
      : std::runtime_error("kick " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A numerical procedure could not reach its contract (non-convergence,
/// exhausted precision, failed self-verification). Carries diagnostics.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kicked
