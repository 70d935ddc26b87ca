#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace switchlab {

/// Point estimate with its standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Batch-means accumulator over a run of `total` observation slots split into
/// `batches` contiguous batches. Observations may be sparse (some slots carry
/// none); each batch averages whatever landed in it.
class BatchMeans {
 public:
  BatchMeans(std::int64_t total, int batches);

  void add(std::int64_t index, double value) noexcept;
  std::int64_t count() const noexcept { return count_; }
  int batches() const noexcept { return static_cast<int>(sums_.size()); }

  /// Grand mean and sd(batch means) / sqrt(B) over nonempty batches.
  Estimate estimate() const;

 private:
  std::int64_t total_;
  std::vector<double> sums_;
  std::vector<std::int64_t> counts_;
  double grand_sum_ = 0.0;
  std::int64_t count_ = 0;
};

/// Pools independent replication estimates: mean of means and
/// sqrt(sum se^2) / R.
Estimate pool(std::span<const Estimate> reps);

/// Linear-interpolated empirical quantile, p in [0, 1]. Copies and sorts.
double quantile(std::vector<double> values, double p);

/// Least-squares slope of y on x.
double ls_slope(std::span<const double> x, std::span<const double> y);

/// Pearson chi-square goodness of fit of `counts` against equal cell
/// probabilities; returns the upper-tail p-value.
double chi_square_uniform_pvalue(std::span<const std::int64_t> counts);

}  // namespace switchlab
