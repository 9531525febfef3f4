#pragma once

#include <stdexcept>
#include <string>

namespace affectlab {

// All recoverable failures surface as this type; `what()` carries the
// diagnostic, prefixed with context (trial id, file) where one exists.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A transfer or combined experiment whose feature blocks cannot be computed
// identically on every dataset. The CLI maps it to exit code 2.
class FeatureSetMismatch : public Error {
 public:
  FeatureSetMismatch(const std::string& block, const std::string& detail)
      : Error("feature-set mismatch: block '" + block + "': " + detail), block_(block) {}
  const std::string& block() const { return block_; }

 private:
  std::string block_;
};

}  // namespace affectlab
