#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "switchlab/traffic.hpp"

using namespace switchlab;

namespace {

FlatVector nu2(double a) { return FlatVector(2, std::vector<double>{a, 1 - a, 1 - a, a}); }

}  // namespace

TEST_CASE("face_check examples") {
  const auto c = CostMatrix::ones(3);
  CHECK(face_check(uniform_nu(3), c));
  CHECK_FALSE(face_check(FlatVector(3), c));
  CHECK(face_check(nu2(0.3), CostMatrix::ones(2)));
  CHECK_FALSE(face_check(FlatVector(2, std::vector<double>{0.5, 0.5, 0.6, 0.4}), CostMatrix::ones(2)));
  CHECK_FALSE(face_check(FlatVector(2, std::vector<double>{1.5, -0.5, -0.5, 1.5}), CostMatrix::ones(2)));
}

TEST_CASE("face_check does not depend on c") {
  Rng rng(4);
  const auto nu = nu2(0.3);
  const auto bad = FlatVector(2, std::vector<double>{0.3, 0.6, 0.7, 0.4});
  for (int trial = 0; trial < 100; ++trial) {
    const CostMatrix c(2, oracle::random_positive(4, rng));
    CHECK(face_check(nu, c));
    CHECK_FALSE(face_check(bad, c));
  }
}

TEST_CASE("moment examples") {
  const auto b = kind_moments(ArrivalKind::bernoulli, 0.5, 1);
  CHECK(b.var() == 0.25);
  CHECK(kind_moments(ArrivalKind::bernoulli, 0.0, 1).var() == 0.0);
  const auto u = kind_moments(ArrivalKind::uniform_integer, 1.0, 2);
  CHECK(u.mean == doctest::Approx(1.0));
  CHECK(u.var() == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const auto p = kind_moments(ArrivalKind::truncated_poisson, 0.7, 10);
  CHECK(p.mean == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(p.var() > 0.0);
}

TEST_CASE("truncated poisson rate solves for the truncated mean") {
  for (int a_max : {1, 2, 5, 10}) {
    for (double m : {0.1, 0.45, 0.9}) {
      if (m >= a_max) continue;
      const double theta = truncated_poisson_rate(m, a_max);
      double num = 0.0, den = 0.0, pk = std::exp(-theta);
      for (int k = 0; k <= a_max; ++k) {
        num += k * pk;
        den += pk;
        pk *= theta / (k + 1);
      }
      CHECK(num / den == doctest::Approx(m).epsilon(1e-10));
    }
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS(ArrivalModel(ArrivalKind::bernoulli, uniform_nu(2), 0.0));
  CHECK_THROWS(ArrivalModel(ArrivalKind::bernoulli, uniform_nu(2), 1.0));
  CHECK_THROWS(ArrivalModel(ArrivalKind::bernoulli, FlatVector(2, std::vector<double>{1, 0, 0, 1}), 0.1));
  CHECK_THROWS(ArrivalModel(ArrivalKind::bernoulli, FlatVector(2, std::vector<double>{0.5, 0.5, 0.6, 0.4}), 0.1));
  CHECK_THROWS(ArrivalModel(ArrivalKind::uniform_integer, uniform_nu(2), 0.1, 0));
  const ArrivalModel b(ArrivalKind::bernoulli, uniform_nu(2), 0.1, 7);
  CHECK(b.a_max() == 1);
  CHECK(b.nu_min() == 0.5);
}

TEST_CASE("means follow (1 - eps) nu exactly") {
  for (auto kind : {ArrivalKind::bernoulli, ArrivalKind::uniform_integer, ArrivalKind::truncated_poisson}) {
    const ArrivalModel m(kind, nu2(0.3), 0.25, 4);
    const auto mom = m.moments();
    const auto lim = m.limit_moments();
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(mom.mean[k] == doctest::Approx(0.75 * lim.mean[k]).epsilon(1e-14));
      CHECK(lim.mean[k] == doctest::Approx(m.nu()[k]).epsilon(1e-14));
      CHECK(mom.var[k] == doctest::Approx(mom.second_moment[k] - mom.mean[k] * mom.mean[k]).epsilon(1e-12));
      CHECK(mom.var[k] >= 0.0);
    }
    const auto m2 = m.with_epsilon(0.5);
    CHECK(m2.moments().mean[0] == doctest::Approx(0.5 * 0.3).epsilon(1e-14));
  }
  const ArrivalModel b(ArrivalKind::bernoulli, uniform_nu(2), 0.1);
  CHECK(b.limit_moments().var[0] == 0.25);
}

TEST_CASE("empirical moments of 1e6 samples match within 4 sigma") {
  Rng rng(31337);
  for (auto kind : {ArrivalKind::bernoulli, ArrivalKind::uniform_integer, ArrivalKind::truncated_poisson}) {
    const int a_max = kind == ArrivalKind::bernoulli ? 1 : 3;
    const ArrivalModel m(kind, nu2(0.3), 0.1, a_max);
    const auto mom = m.moments();
    const int draws = 250'000;  // 4 queues per draw: 1e6 samples
    std::vector<double> s1(4, 0.0), s2(4, 0.0), s4(4, 0.0);
    std::vector<std::int64_t> a(4);
    std::int64_t over = 0;
    for (int d = 0; d < draws; ++d) {
      m.sample_into(a, rng);
      for (std::size_t k = 0; k < 4; ++k) {
        const double v = static_cast<double>(a[k]);
        if (a[k] < 0 || a[k] > a_max) ++over;
        s1[k] += v;
        s2[k] += v * v;
        s4[k] += v * v * v * v;
      }
    }
    CHECK(over == 0);
    for (std::size_t k = 0; k < 4; ++k) {
      const double mean = s1[k] / draws;
      CHECK(std::abs(mean - mom.mean[k]) <= 4.0 * std::sqrt(mom.var[k] / draws));
      // Var of A^2 from the fourth moment bounds the second-moment error.
      const double m2 = s2[k] / draws;
      const double var_sq = s4[k] / draws - m2 * m2;
      CHECK(std::abs(m2 - mom.second_moment[k]) <= 4.0 * std::sqrt(var_sq / draws));
    }
  }
}

TEST_CASE("bernoulli at eps close to 1 is almost always empty") {
  Rng rng(1);
  const ArrivalModel m(ArrivalKind::bernoulli, uniform_nu(2), 0.9999);
  std::int64_t total = 0;
  for (int d = 0; d < 10'000; ++d) {
    for (auto v : m.sample(rng)) total += v;
  }
  CHECK(total < 20);
}

TEST_CASE("sampling is deterministic in the stream") {
  const ArrivalModel m(ArrivalKind::truncated_poisson, uniform_nu(3), 0.2, 5);
  Rng a(42), b(42);
  for (int d = 0; d < 100; ++d) CHECK(m.sample(a) == m.sample(b));
}
