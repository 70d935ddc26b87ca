#pragma once

// Desk-scale invariant suite behind `switchlab validate`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace switchlab {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct ValidateOptions {
  /// Test hook: run the matcher checks with a corrupted matcher.
  bool inject_matcher_fault = false;
  std::uint64_t seed = 20240601;
  int jobs = 1;
};

/// Runs every check; failures and exceptions are captured, never thrown.
/// Results are in a fixed order regardless of `jobs`.
std::vector<CheckResult> run_validation(const ValidateOptions& opts);

}  // namespace switchlab
