#pragma once

// c-weighted MaxWeight: each slot serve the permutation maximizing
// sum_i c_{i,perm[i]} Q_{i,perm[i]}, ties broken uniformly at random.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "switchlab/random.hpp"
#include "switchlab/wlinalg.hpp"

namespace switchlab {

/// perm[i] = j means queue (i, j) is served this slot.
struct Schedule {
  std::vector<int> perm;

  static Schedule identity(int n);
  int n() const noexcept { return static_cast<int>(perm.size()); }
  bool is_permutation() const;
  bool serves(int i, int j) const noexcept { return perm[static_cast<std::size_t>(i)] == j; }

  bool operator==(const Schedule&) const = default;
  auto operator<=>(const Schedule&) const = default;
};

enum class MatcherMode { exact, hungarian, automatic };

std::string_view to_string(MatcherMode m);
MatcherMode matcher_mode_from_string(std::string_view s);

struct MatcherConfig {
  MatcherMode mode = MatcherMode::automatic;
  int exact_threshold = 7;
  /// Negative control for the validation suite: return a minimum-weight
  /// schedule instead of a maximum-weight one.
  bool inject_fault = false;

  void validate() const;
  /// True when this configuration resolves to exact enumeration at size n.
  bool exact_for(int n) const noexcept;

  bool operator==(const MatcherConfig&) const = default;
};

/// Sum over rows in increasing i of c_{i,perm[i]} * Q_{i,perm[i]}. The fixed
/// order makes equal term sequences compare equal bit-for-bit.
double schedule_weight(const Schedule& s, std::span<const std::int64_t> q, const CostMatrix& c);

/// Every permutation attaining the maximum weight, in lexicographic order.
/// Throws std::invalid_argument for n > exact_threshold.
std::vector<Schedule> enumerate_argmax(std::span<const std::int64_t> q, const CostMatrix& c,
                                       int exact_threshold = 7);

/// A maximum-weight permutation via the O(n^3) Hungarian method on negated
/// weights. Deterministic: returns one arbitrary maximizer.
Schedule hungarian_max_weight(std::span<const std::int64_t> q, const CostMatrix& c);

/// Algorithm entry point. Exact mode samples uniformly from the argmax set;
/// Hungarian mode shuffles rows and columns first, which randomizes but does
/// not equalize tie-breaking.
Schedule max_weight_schedule(std::span<const std::int64_t> q, const CostMatrix& c, const MatcherConfig& cfg,
                             Rng& ties);

}  // namespace switchlab
