#pragma once

// Closed-form heavy-traffic quantities: the zeta vector by two independent
// routes, the scaled-queue-length limit, the priority-system lower bound and
// collapse summaries over an eps sweep.

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "switchlab/scheduling.hpp"
#include "switchlab/simulator.hpp"
#include "switchlab/traffic.hpp"
#include "switchlab/wlinalg.hpp"

namespace switchlab {

enum class ZetaMethod { gmatrix, projection };
std::string_view to_string(ZetaMethod m);

/// zeta_ij = ||(e_ij) projected onto S_c||_c^2.
struct ZetaResult {
  FlatVector zeta;
  ZetaMethod method = ZetaMethod::projection;
  double cross_error = std::numeric_limits<double>::quiet_NaN();
};

/// The (2n-1) x (2n-1) coefficient matrix of the orthogonality conditions
/// on (x_1..x_{n-1}, y_1..y_{n-1}, z), in block form
///   [ D1  C    H1      ]
///   [ 0   H3^T -1/c_nn ]
///   [ C^T D2   H2      ]
struct GSystem {
  int n = 0;
  DenseMatrix g;

  explicit GSystem(const CostMatrix& c);
  /// Ones at equation rows i and n + j (0-based: i and n + j), the latter
  /// only when j < n - 1.
  std::vector<double> rhs_for(int i, int j) const;
};

ZetaResult zeta_projection(const CostMatrix& c);
ZetaResult zeta_gmatrix(const CostMatrix& c);

/// Both routes with cross_error = max_ij |zeta_g - zeta_p| on each.
struct ZetaPair {
  ZetaResult gmatrix;
  ZetaResult projection;
  double cross_error = 0.0;
};
ZetaPair zeta_both(const CostMatrix& c);

/// Heavy-traffic limit of eps E[sum c_ij Q_ij]: (n/2) sum_ij sigma2_ij zeta_ij.
double ht_limit(const CostMatrix& c, const FlatVector& sigma2);
double ht_limit(const FlatVector& zeta, const FlatVector& sigma2);

/// (n/2) <sigma2, zeta>_c, the c-weighted pairing. Agrees with ht_limit at
/// c = 1 and otherwise carries an extra factor c_ij per term; reported for
/// comparison only.
double ht_limit_c_weighted(const CostMatrix& c, const FlatVector& sigma2);

/// n = 2 closed form (1/2) sum sigma2_ij c_ij (1 - c_ij^2 / sum c^2).
double remark_n2_formula(const CostMatrix& c, const FlatVector& sigma2);

struct OrderingBound {
  std::vector<int> order;    // schedule indices, highest priority first
  double value_eps = 0.0;    // sum_ij c_ij Qhat^(eps)_ij
  double value_limit = 0.0;  // sum_ij c_ij Qhat_ij (literal limit form)
};

struct LowerBoundResult {
  int n = 0;
  double epsilon = 0.0;
  std::vector<Schedule> schedules;  // the L = n! schedules, lexicographic
  std::vector<OrderingBound> per_ordering;
  double qstar_eps = 0.0;
  double qstar_limit = 0.0;
  /// lim eps * Qhat*^(eps): the eps-form numerator over 2 at eps -> 0.
  double qstar_limit_eps_form = 0.0;
  /// Per-class values clamped at zero across all orderings.
  std::int64_t clamped_classes = 0;
};

/// Priority-ordering lower bound over all (n!)! orderings. n <= 3.
LowerBoundResult universal_lower_bound(const CostMatrix& c, const ArrivalModel& model);

struct SscRow {
  double epsilon = 0.0;
  double perp_norm_mean = 0.0;
  double perp_norm2_mean = 0.0;
  double parallel_norm_mean = 0.0;
  double scaled_weighted_qsum = 0.0;
};

struct SscTable {
  std::vector<SscRow> rows;  // sorted by decreasing eps
  double parallel_slope = 0.0;  // d log E||Q_par|| / d log eps
  double perp_slope = 0.0;      // d log E||Q_perp|| / d log eps
  double perp_ratio = 0.0;      // max / min of E||Q_perp|| across eps
};

/// Needs >= 3 distinct eps values.
SscTable ssc_curve(std::span<const RunStats> runs);

}  // namespace switchlab
