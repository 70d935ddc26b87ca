#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "switchlab/scheduling.hpp"
#include "switchlab/stats.hpp"

using namespace switchlab;

namespace {

const std::vector<std::int64_t> kQ{5, 1, 2, 3};

std::vector<std::int64_t> random_q(int n, Rng& rng, std::uint64_t hi) {
  std::vector<std::int64_t> q(static_cast<std::size_t>(n * n));
  for (auto& v : q) v = static_cast<std::int64_t>(uniform_index(rng, hi + 1));
  return q;
}

}  // namespace

TEST_CASE("schedule basics") {
  CHECK(Schedule::identity(3).perm == std::vector<int>{0, 1, 2});
  CHECK(Schedule{{1, 0, 2}}.is_permutation());
  CHECK_FALSE(Schedule{{1, 1, 2}}.is_permutation());
  CHECK(Schedule{{1, 0}}.serves(0, 1));
  CHECK(matcher_mode_from_string("exact-enumeration") == MatcherMode::exact);
  CHECK(matcher_mode_from_string("auto") == MatcherMode::automatic);
  CHECK_THROWS(matcher_mode_from_string("greedy"));
  MatcherConfig bad;
  bad.exact_threshold = 1;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("schedule_weight examples") {
  const Schedule id = Schedule::identity(2), anti{{1, 0}};
  CHECK(schedule_weight(id, std::vector<std::int64_t>(4, 0), CostMatrix::ones(2)) == 0.0);
  CHECK(schedule_weight(anti, std::vector<std::int64_t>(4, 0), CostMatrix::ones(2)) == 0.0);
  CHECK(schedule_weight(id, kQ, CostMatrix::ones(2)) == 8.0);
  CHECK(schedule_weight(anti, kQ, CostMatrix::from_rows({{1, 4}, {4, 1}})) == 12.0);
  CHECK_THROWS_AS(schedule_weight(id, std::vector<std::int64_t>(9, 0), CostMatrix::ones(2)), DimensionError);
}

TEST_CASE("max_weight_schedule examples") {
  Rng ties(1);
  for (auto mode : {MatcherMode::exact, MatcherMode::hungarian, MatcherMode::automatic}) {
    MatcherConfig cfg{mode};
    CHECK(max_weight_schedule(kQ, CostMatrix::ones(2), cfg, ties) == Schedule::identity(2));
    CHECK(max_weight_schedule(kQ, CostMatrix::from_rows({{1, 4}, {4, 1}}), cfg, ties) == Schedule{{1, 0}});
  }
}

TEST_CASE("enumerate_argmax examples") {
  CHECK(enumerate_argmax(std::vector<std::int64_t>(9, 0), CostMatrix::ones(3)).size() == 6);
  const auto one = enumerate_argmax(kQ, CostMatrix::ones(2));
  REQUIRE(one.size() == 1);
  CHECK(one.front() == Schedule::identity(2));
  CHECK(enumerate_argmax(std::vector<std::int64_t>(4, 1), CostMatrix::ones(2)).size() == 2);
  CHECK_THROWS(enumerate_argmax(std::vector<std::int64_t>(64, 0), CostMatrix::ones(8)));
}

TEST_CASE("hungarian weight equals brute-force maximum on 1000 random instances") {
  Rng rng(99), ties(100);
  MatcherConfig hung{MatcherMode::hungarian};
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 6;
    const auto cv = trial % 3 == 0 ? std::vector<double>(static_cast<std::size_t>(n * n), 1.0)
                                   : oracle::random_positive(static_cast<std::size_t>(n * n), rng);
    const CostMatrix c(n, cv);
    const auto q = random_q(n, rng, trial % 2 == 0 ? 4 : 500);
    const double best = oracle::brute_max_weight(n, q, cv);
    const Schedule a = hungarian_max_weight(q, c);
    const Schedule b = max_weight_schedule(q, c, hung, ties);
    CHECK(a.is_permutation());
    CHECK(b.is_permutation());
    CHECK(schedule_weight(a, q, c) == best);
    CHECK(schedule_weight(b, q, c) == best);
    const auto all = enumerate_argmax(q, c);
    CHECK(schedule_weight(all.front(), q, c) == best);
    CHECK(std::is_sorted(all.begin(), all.end()));
  }
}

TEST_CASE("raising a scheduled queue's weight never lowers the optimum") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    const CostMatrix c(n, oracle::random_positive(static_cast<std::size_t>(n * n), rng));
    auto q = random_q(n, rng, 20);
    const Schedule s = hungarian_max_weight(q, c);
    const double before = schedule_weight(s, q, c);
    const int i = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    q[static_cast<std::size_t>(i * n + s.perm[static_cast<std::size_t>(i)])] += 5;
    CHECK(schedule_weight(hungarian_max_weight(q, c), q, c) >= before);
  }
}

TEST_CASE("exact mode breaks total ties uniformly (chi-square over 1e5 draws)") {
  Rng ties(2718);
  MatcherConfig exact{MatcherMode::exact};
  const CostMatrix c = CostMatrix::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  std::map<Schedule, std::int64_t> freq;
  for (int d = 0; d < 100'000; ++d) ++freq[max_weight_schedule(std::vector<std::int64_t>(9, 0), c, exact, ties)];
  REQUIRE(freq.size() == 6);
  std::vector<std::int64_t> counts;
  for (const auto& [s, k] : freq) counts.push_back(k);
  CHECK(chi_square_uniform_pvalue(counts) > 0.001);
}

TEST_CASE("exact mode samples uniformly within a partial tie set") {
  // Two of the six schedules tie at the maximum.
  Rng ties(5);
  MatcherConfig exact{MatcherMode::exact};
  const std::vector<std::int64_t> q{1, 0, 1, 0, 2, 0, 1, 0, 1};
  const auto c = CostMatrix::ones(3);
  const auto arg = enumerate_argmax(q, c);
  REQUIRE(arg.size() == 2);
  std::map<Schedule, std::int64_t> freq;
  for (int d = 0; d < 20'000; ++d) ++freq[max_weight_schedule(q, c, exact, ties)];
  REQUIRE(freq.size() == 2);
  std::vector<std::int64_t> counts;
  for (const auto& [s, k] : freq) counts.push_back(k);
  CHECK(chi_square_uniform_pvalue(counts) > 0.001);
}

TEST_CASE("the fault hook really breaks the matcher") {
  Rng ties(1);
  MatcherConfig f{MatcherMode::exact};
  f.inject_fault = true;
  CHECK(schedule_weight(max_weight_schedule(kQ, CostMatrix::ones(2), f, ties), kQ, CostMatrix::ones(2)) == 3.0);
  f.mode = MatcherMode::hungarian;
  CHECK(schedule_weight(max_weight_schedule(kQ, CostMatrix::ones(2), f, ties), kQ, CostMatrix::ones(2)) == 3.0);
}

TEST_CASE("chi-square helper") {
  const std::vector<std::int64_t> even{100, 100, 100};
  CHECK(chi_square_uniform_pvalue(even) == doctest::Approx(1.0));
  const std::vector<std::int64_t> skew{200, 50, 50};
  CHECK(chi_square_uniform_pvalue(skew) < 1e-6);
}
