#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace tubecantor {

/// Argument outside the mathematical domain of an operation (τ ∉ (0,1], g = 0, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (non-unit tube direction, wrong pipeline stage).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad or unreadable configuration / run directory.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All resampling attempts of a generation were rejected.
class ConstructionFailed : public std::runtime_error {
 public:
  ConstructionFailed(const std::string& what, std::map<std::string, int> failures, int generation = -1)
      : std::runtime_error(what), failures_(std::move(failures)), generation_(generation) {}

  const std::map<std::string, int>& failures() const { return failures_; }
  int generation() const { return generation_; }

  /// Rejection reason seen most often, empty if none were recorded.
  std::string dominant_failure() const {
    std::string best;
    int count = -1;
    for (const auto& [reason, n] : failures_) {
      if (n > count) {
        best = reason;
        count = n;
      }
    }
    return best;
  }

 private:
  std::map<std::string, int> failures_;
  int generation_;
};

}  // namespace tubecantor
