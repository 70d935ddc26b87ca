#include "switchlab/stats.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace switchlab {

BatchMeans::BatchMeans(std::int64_t total, int batches)
    : total_(total), sums_(static_cast<std::size_t>(batches), 0.0), counts_(static_cast<std::size_t>(batches), 0) {
  if (batches < 2) throw std::invalid_argument("batch means needs at least 2 batches");
  if (total < batches) throw std::invalid_argument("fewer observation slots than batches");
}

void BatchMeans::add(std::int64_t index, double value) noexcept {
  const auto b = static_cast<std::size_t>((index * static_cast<std::int64_t>(sums_.size())) / total_);
  sums_[b] += value;
  ++counts_[b];
  grand_sum_ += value;
  ++count_;
}

Estimate BatchMeans::estimate() const {
  Estimate e;
  if (count_ == 0) return e;
  e.mean = grand_sum_ / static_cast<double>(count_);
  std::vector<double> means;
  means.reserve(sums_.size());
  for (std::size_t b = 0; b < sums_.size(); ++b) {
    if (counts_[b] > 0) means.push_back(sums_[b] / static_cast<double>(counts_[b]));
  }
  if (means.size() < 2) return e;
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(means.size());
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  const auto b = static_cast<double>(means.size());
  e.std_error = std::sqrt(ss / (b - 1.0) / b);
  return e;
}

Estimate pool(std::span<const Estimate> reps) {
  if (reps.empty()) throw std::invalid_argument("pool: no replications");
  Estimate e;
  double var = 0.0;
  for (const auto& r : reps) {
    e.mean += r.mean;
    var += r.std_error * r.std_error;
  }
  const auto k = static_cast<double>(reps.size());
  e.mean /= k;
  e.std_error = std::sqrt(var) / k;
  return e;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope needs >= 2 paired points");
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ls_slope: x has no spread");
  return sxy / sxx;
}

double chi_square_uniform_pvalue(std::span<const std::int64_t> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi-square needs at least 2 cells");
  double total = 0.0;
  for (auto k : counts) total += static_cast<double>(k);
  if (total <= 0.0) throw std::invalid_argument("chi-square needs at least one observation");
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto k : counts) {
    const double d = static_cast<double>(k) - expected;
    stat += d * d / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace switchlab
