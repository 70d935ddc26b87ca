#pragma once

// Arrival laws for the heavy-traffic base family lambda(eps) = (1 - eps) nu,
// with nu doubly stochastic (every port saturated as eps -> 0).

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "switchlab/random.hpp"
#include "switchlab/wlinalg.hpp"

namespace switchlab {

enum class ArrivalKind { bernoulli, uniform_integer, truncated_poisson };

std::string_view to_string(ArrivalKind k);
ArrivalKind arrival_kind_from_string(std::string_view s);

struct MomentVector {
  FlatVector mean;
  FlatVector var;
  FlatVector second_moment;
};

/// Scalar moments of one queue's law with the given mean and support bound.
struct ScalarMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double var() const noexcept { return second_moment - mean * mean; }
};
ScalarMoments kind_moments(ArrivalKind kind, double mean, int a_max);

/// True iff <nu, e_c^(i)>_c = 1 and <nu, e~_c^(j)>_c = 1 for all i, j
/// (within 1e-12) and nu >= 0. The pairings reduce to unit row and column
/// sums, so the answer does not depend on c.
bool face_check(const FlatVector& nu, const CostMatrix& c);

/// Doubly stochastic nu with every entry 1/n.
FlatVector uniform_nu(int n);

/// Independent per-queue arrivals with mean (1 - eps) nu_ij, support
/// {0, ..., a_max}.
///
///  - bernoulli: A in {0, 1}; a_max is forced to 1.
///  - uniform-integer: with probability 2 lambda / a_max draw uniformly from
///    {0, ..., a_max}, otherwise 0. Needs lambda <= a_max / 2.
///  - truncated-poisson: Poisson(theta) conditioned on A <= a_max, with theta
///    solved so that the truncated mean is exactly lambda.
class ArrivalModel {
 public:
  ArrivalModel(ArrivalKind kind, FlatVector nu, double epsilon, int a_max = 1);

  int n() const noexcept { return nu_.n(); }
  ArrivalKind kind() const noexcept { return kind_; }
  const FlatVector& nu() const noexcept { return nu_; }
  double epsilon() const noexcept { return epsilon_; }
  int a_max() const noexcept { return a_max_; }
  double nu_min() const noexcept;

  /// Same law family and nu at a different eps.
  ArrivalModel with_epsilon(double epsilon) const;

  /// Exact moments of the configured law.
  MomentVector moments() const;
  /// Moments of the eps -> 0 law (mean nu); the variance used by the
  /// heavy-traffic formulas.
  MomentVector limit_moments() const;

  void sample_into(std::span<std::int64_t> out, Rng& rng) const;
  std::vector<std::int64_t> sample(Rng& rng) const;

 private:
  ArrivalKind kind_;
  FlatVector nu_;
  double epsilon_;
  int a_max_;
  std::vector<double> lambda_;
  // uniform-integer: activation probability per queue.
  // truncated-poisson: cumulative pmf, (a_max + 1) entries per queue.
  std::vector<double> table_;
};

/// theta such that Poisson(theta) conditioned on <= a_max has mean `mean`.
double truncated_poisson_rate(double mean, int a_max);

}  // namespace switchlab
