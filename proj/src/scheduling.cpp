#include "switchlab/scheduling.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace switchlab {

namespace {

void check_dims(std::span<const std::int64_t> q, const CostMatrix& c) {
  const auto n = static_cast<std::size_t>(c.n());
  if (q.size() != n * n) throw DimensionError("queue vector does not match cost matrix dimension");
}

double perm_weight(const std::vector<int>& perm, std::span<const std::int64_t> q, const CostMatrix& c) {
  const int n = c.n();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = perm[static_cast<std::size_t>(i)];
    acc += c(i, j) * static_cast<double>(q[static_cast<std::size_t>(i * n + j)]);
  }
  return acc;
}

// One pass over all n! permutations keeping a uniform reservoir sample of
// the extremal set. want_max = false picks a minimizer (fault injection).
Schedule enumerate_and_sample(std::span<const std::int64_t> q, const CostMatrix& c, Rng& ties, bool want_max) {
  std::vector<int> perm(static_cast<std::size_t>(c.n()));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> chosen = perm;
  double best = perm_weight(perm, q, c);
  std::uint64_t count = 1;
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double w = perm_weight(perm, q, c);
    const bool better = want_max ? (w > best) : (w < best);
    if (better) {
      best = w;
      chosen = perm;
      count = 1;
    } else if (w == best) {
      ++count;
      if (uniform_index(ties, count) == 0) chosen = perm;
    }
  }
  return Schedule{std::move(chosen)};
}

// Minimum-cost assignment with row/column potentials. cost is n x n row-major.
std::vector<int> hungarian_min_cost(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> u(un + 1, 0.0), v(un + 1, 0.0), minv(un + 1);
  std::vector<std::size_t> p(un + 1, 0), way(un + 1, 0);
  std::vector<char> used(un + 1);
  for (std::size_t i = 1; i <= un; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= un; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * un + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= un; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(un);
  for (std::size_t j = 1; j <= un; ++j) assignment[p[j] - 1] = static_cast<int>(j - 1);
  return assignment;
}

}  // namespace

Schedule Schedule::identity(int n) {
  Schedule s;
  s.perm.resize(static_cast<std::size_t>(n));
  std::iota(s.perm.begin(), s.perm.end(), 0);
  return s;
}

bool Schedule::is_permutation() const {
  std::vector<char> seen(perm.size(), 0);
  for (int j : perm) {
    if (j < 0 || j >= n() || seen[static_cast<std::size_t>(j)]) return false;
    seen[static_cast<std::size_t>(j)] = 1;
  }
  return true;
}

std::string_view to_string(MatcherMode m) {
  switch (m) {
    case MatcherMode::exact: return "exact";
    case MatcherMode::hungarian: return "hungarian";
    case MatcherMode::automatic: return "auto";
  }
  return "auto";
}

MatcherMode matcher_mode_from_string(std::string_view s) {
  if (s == "exact" || s == "exact-enumeration") return MatcherMode::exact;
  if (s == "hungarian") return MatcherMode::hungarian;
  if (s == "auto") return MatcherMode::automatic;
  throw std::invalid_argument("unknown matcher mode '" + std::string(s) + "'");
}

void MatcherConfig::validate() const {
  if (exact_threshold < 2) throw std::invalid_argument("matcher exact_threshold must be >= 2");
}

bool MatcherConfig::exact_for(int n) const noexcept {
  switch (mode) {
    case MatcherMode::exact: return true;
    case MatcherMode::hungarian: return false;
    case MatcherMode::automatic: return n <= exact_threshold;
  }
  return false;
}

double schedule_weight(const Schedule& s, std::span<const std::int64_t> q, const CostMatrix& c) {
  check_dims(q, c);
  if (s.n() != c.n()) throw DimensionError("schedule does not match cost matrix dimension");
  return perm_weight(s.perm, q, c);
}

std::vector<Schedule> enumerate_argmax(std::span<const std::int64_t> q, const CostMatrix& c, int exact_threshold) {
  check_dims(q, c);
  if (c.n() > exact_threshold) {
    throw std::invalid_argument("enumerate_argmax: n = " + std::to_string(c.n()) + " exceeds exact threshold " +
                                std::to_string(exact_threshold));
  }
  std::vector<int> perm(static_cast<std::size_t>(c.n()));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Schedule> out;
  double best = -std::numeric_limits<double>::infinity();
  do {
    const double w = perm_weight(perm, q, c);
    if (w > best) {
      best = w;
      out.clear();
    }
    if (w == best) out.push_back(Schedule{perm});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Schedule hungarian_max_weight(std::span<const std::int64_t> q, const CostMatrix& c) {
  check_dims(q, c);
  const int n = c.n();
  std::vector<double> cost(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) cost[k] = -c[k] * static_cast<double>(q[k]);
  return Schedule{hungarian_min_cost(cost, n)};
}

Schedule max_weight_schedule(std::span<const std::int64_t> q, const CostMatrix& c, const MatcherConfig& cfg,
                             Rng& ties) {
  check_dims(q, c);
  const int n = c.n();
  if (cfg.exact_for(n)) return enumerate_and_sample(q, c, ties, !cfg.inject_fault);

  // Relabel rows and columns at random, solve, and map back.
  std::vector<int> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  for (std::size_t k = rows.size(); k > 1; --k) std::swap(rows[k - 1], rows[uniform_index(ties, k)]);
  for (std::size_t k = cols.size(); k > 1; --k) std::swap(cols[k - 1], cols[uniform_index(ties, k)]);

  const double sign = cfg.inject_fault ? 1.0 : -1.0;
  std::vector<double> cost(q.size());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int i = rows[static_cast<std::size_t>(a)];
      const int j = cols[static_cast<std::size_t>(b)];
      cost[static_cast<std::size_t>(a * n + b)] = sign * c(i, j) * static_cast<double>(q[static_cast<std::size_t>(i * n + j)]);
    }
  }
  const std::vector<int> shuffled = hungarian_min_cost(cost, n);
  Schedule s;
  s.perm.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    s.perm[static_cast<std::size_t>(rows[static_cast<std::size_t>(a)])] =
        cols[static_cast<std::size_t>(shuffled[static_cast<std::size_t>(a)])];
  }
  return s;
}

}  // namespace switchlab
