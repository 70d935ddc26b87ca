#include "switchlab/traffic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace switchlab {

namespace {

constexpr double kFaceTol = 1e-12;

// Unnormalized truncated Poisson weights theta^k / k!, k = 0..a_max.
std::vector<double> poisson_weights(double theta, int a_max) {
  std::vector<double> w(static_cast<std::size_t>(a_max) + 1);
  w[0] = 1.0;
  for (int k = 1; k <= a_max; ++k) w[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k - 1)] * theta / k;
  return w;
}

ScalarMoments truncated_poisson_moments(double theta, int a_max) {
  const auto w = poisson_weights(theta, a_max);
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int k = 0; k <= a_max; ++k) {
    const double p = w[static_cast<std::size_t>(k)];
    z += p;
    m1 += k * p;
    m2 += static_cast<double>(k) * k * p;
  }
  return {m1 / z, m2 / z};
}

}  // namespace

std::string_view to_string(ArrivalKind k) {
  switch (k) {
    case ArrivalKind::bernoulli: return "bernoulli";
    case ArrivalKind::uniform_integer: return "uniform-integer";
    case ArrivalKind::truncated_poisson: return "truncated-poisson";
  }
  return "bernoulli";
}

ArrivalKind arrival_kind_from_string(std::string_view s) {
  if (s == "bernoulli") return ArrivalKind::bernoulli;
  if (s == "uniform-integer") return ArrivalKind::uniform_integer;
  if (s == "truncated-poisson") return ArrivalKind::truncated_poisson;
  throw std::invalid_argument("unknown arrival kind '" + std::string(s) + "'");
}

double truncated_poisson_rate(double mean, int a_max) {
  if (mean <= 0.0) return 0.0;
  if (mean >= a_max) throw std::invalid_argument("truncated-poisson mean must be below a_max");
  // The truncated mean is increasing in theta and at least theta's share
  // below a_max, so the root lies in (0, hi] for hi large enough.
  double lo = 0.0, hi = mean;
  while (truncated_poisson_moments(hi, a_max).mean < mean) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (truncated_poisson_moments(mid, a_max).mean < mean) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

ScalarMoments kind_moments(ArrivalKind kind, double mean, int a_max) {
  switch (kind) {
    case ArrivalKind::bernoulli: return {mean, mean};
    case ArrivalKind::uniform_integer: {
      const double q = 2.0 * mean / a_max;
      return {mean, q * a_max * (2.0 * a_max + 1.0) / 6.0};
    }
    case ArrivalKind::truncated_poisson: {
      if (mean <= 0.0) return {0.0, 0.0};
      auto m = truncated_poisson_moments(truncated_poisson_rate(mean, a_max), a_max);
      // Report the requested mean; bisection leaves it within an ulp or two.
      m.mean = mean;
      return m;
    }
  }
  return {};
}

bool face_check(const FlatVector& nu, const CostMatrix& c) {
  if (nu.n() != c.n()) return false;
  const int n = c.n();
  for (double v : nu.values()) {
    if (!(v >= 0.0)) return false;
  }
  for (int k = 0; k < n; ++k) {
    const double row = cdot(nu, row_generator(c, k), c);
    const double col = cdot(nu, column_generator(c, k), c);
    if (std::abs(row - 1.0) > kFaceTol || std::abs(col - 1.0) > kFaceTol) return false;
  }
  return true;
}

FlatVector uniform_nu(int n) { return FlatVector(n, 1.0 / n); }

ArrivalModel::ArrivalModel(ArrivalKind kind, FlatVector nu, double epsilon, int a_max)
    : kind_(kind), nu_(std::move(nu)), epsilon_(epsilon), a_max_(kind == ArrivalKind::bernoulli ? 1 : a_max) {
  if (nu_.n() < 2) throw std::invalid_argument("arrival model needs n >= 2");
  if (!(epsilon_ > 0.0 && epsilon_ < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1), got " + std::to_string(epsilon_));
  }
  if (a_max_ < 1) throw std::invalid_argument("a_max must be >= 1");
  if (!face_check(nu_, CostMatrix::ones(nu_.n()))) {
    throw std::invalid_argument("nu must be doubly stochastic (unit row and column sums)");
  }
  if (!(nu_min() > 0.0)) throw std::invalid_argument("nu must be strictly positive");

  lambda_.resize(nu_.size());
  for (std::size_t k = 0; k < nu_.size(); ++k) lambda_[k] = (1.0 - epsilon_) * nu_[k];

  switch (kind_) {
    case ArrivalKind::bernoulli:
      for (double l : lambda_) {
        if (l > 1.0) throw std::invalid_argument("bernoulli mean must be <= 1");
      }
      break;
    case ArrivalKind::uniform_integer:
      table_.reserve(lambda_.size());
      for (double l : lambda_) {
        const double q = 2.0 * l / a_max_;
        if (q > 1.0) throw std::invalid_argument("uniform-integer mean must be <= a_max / 2");
        table_.push_back(q);
      }
      break;
    case ArrivalKind::truncated_poisson:
      table_.reserve(lambda_.size() * (static_cast<std::size_t>(a_max_) + 1));
      for (double l : lambda_) {
        auto w = poisson_weights(truncated_poisson_rate(l, a_max_), a_max_);
        double z = 0.0;
        for (double p : w) z += p;
        double acc = 0.0;
        for (double p : w) {
          acc += p / z;
          table_.push_back(acc);
        }
        table_.back() = 1.0;
      }
      break;
  }
}

double ArrivalModel::nu_min() const noexcept {
  double m = nu_[0];
  for (double v : nu_.values()) m = std::min(m, v);
  return m;
}

ArrivalModel ArrivalModel::with_epsilon(double epsilon) const { return ArrivalModel(kind_, nu_, epsilon, a_max_); }

namespace {

MomentVector moments_for(ArrivalKind kind, const FlatVector& means, int a_max) {
  const int n = means.n();
  MomentVector m{FlatVector(n), FlatVector(n), FlatVector(n)};
  for (std::size_t k = 0; k < means.size(); ++k) {
    const auto s = kind_moments(kind, means[k], a_max);
    m.mean[k] = s.mean;
    m.second_moment[k] = s.second_moment;
    m.var[k] = std::max(0.0, s.var());
  }
  return m;
}

}  // namespace

MomentVector ArrivalModel::moments() const { return moments_for(kind_, FlatVector(n(), lambda_), a_max_); }

MomentVector ArrivalModel::limit_moments() const { return moments_for(kind_, nu_, a_max_); }

void ArrivalModel::sample_into(std::span<std::int64_t> out, Rng& rng) const {
  if (out.size() != lambda_.size()) throw DimensionError("sample_into: output size mismatch");
  switch (kind_) {
    case ArrivalKind::bernoulli:
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = uniform01(rng) < lambda_[k] ? 1 : 0;
      break;
    case ArrivalKind::uniform_integer:
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = uniform01(rng) < table_[k]
                     ? static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(a_max_) + 1))
                     : 0;
      }
      break;
    case ArrivalKind::truncated_poisson: {
      const auto stride = static_cast<std::size_t>(a_max_) + 1;
      for (std::size_t k = 0; k < out.size(); ++k) {
        const double u = uniform01(rng);
        const double* cdf = table_.data() + k * stride;
        std::int64_t a = 0;
        while (a < a_max_ && u >= cdf[a]) ++a;
        out[k] = a;
      }
      break;
    }
  }
}

std::vector<std::int64_t> ArrivalModel::sample(Rng& rng) const {
  std::vector<std::int64_t> out(lambda_.size());
  sample_into(out, rng);
  return out;
}

}  // namespace switchlab
