#include "switchlab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace switchlab {

std::string_view to_string(ZetaMethod m) { return m == ZetaMethod::gmatrix ? "gmatrix" : "projection"; }

GSystem::GSystem(const CostMatrix& c) : n(c.n()), g(static_cast<std::size_t>(2 * c.n() - 1), static_cast<std::size_t>(2 * c.n() - 1)) {
  const int m = n - 1;
  const auto x = [](int k) { return static_cast<std::size_t>(k); };
  const auto y = [m](int l) { return static_cast<std::size_t>(m + l); };
  const auto z = static_cast<std::size_t>(2 * m);
  const auto inv = [&c](int i, int j) { return 1.0 / c(i, j); };

  for (int i = 0; i < m; ++i) {
    const auto row = static_cast<std::size_t>(i);
    for (int j = 0; j < n; ++j) g(row, x(i)) += inv(i, j);
    for (int l = 0; l < m; ++l) {
      g(row, y(l)) = inv(i, l);
      g(row, z) += inv(i, l);
    }
  }
  {
    const auto row = static_cast<std::size_t>(m);
    for (int l = 0; l < m; ++l) g(row, y(l)) = inv(m, l);
    g(row, z) = -inv(m, m);
  }
  for (int j = 0; j < m; ++j) {
    const auto row = static_cast<std::size_t>(n + j);
    for (int k = 0; k < m; ++k) {
      g(row, x(k)) = inv(k, j);
      g(row, z) += inv(k, j);
    }
    for (int i = 0; i < n; ++i) g(row, y(j)) += inv(i, j);
  }
}

std::vector<double> GSystem::rhs_for(int i, int j) const {
  std::vector<double> e(static_cast<std::size_t>(2 * n - 1), 0.0);
  e[static_cast<std::size_t>(i)] = 1.0;
  if (j < n - 1) e[static_cast<std::size_t>(n + j)] = 1.0;
  return e;
}

ZetaResult zeta_projection(const CostMatrix& c) {
  const int n = c.n();
  const ProjectionBasis basis(c);
  ZetaResult out{FlatVector(n), ZetaMethod::projection};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // <e_ij, (e_ij)_par>_c = c_ij * [Z u]_ij with u = gram^{-1} Z^T diag(c) e_ij.
      const FlatVector e = FlatVector::unit(n, i, j);
      const auto u = basis.coefficients(e, c);
      const auto row = static_cast<std::size_t>(i * n + j);
      double par = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) par += basis.z()(row, k) * u[k];
      out.zeta(i, j) = c(i, j) * par;
    }
  }
  return out;
}

ZetaResult zeta_gmatrix(const CostMatrix& c) {
  const int n = c.n();
  const int m = n - 1;
  const GSystem sys(c);
  const LuFactorization lu(sys.g);
  ZetaResult out{FlatVector(n), ZetaMethod::gmatrix};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto u = lu.solve(sys.rhs_for(i, j));
      const double z = u[static_cast<std::size_t>(2 * m)];
      const double x = i < m ? u[static_cast<std::size_t>(i)] : 0.0;
      const double y = j < m ? u[static_cast<std::size_t>(m + j)] : 0.0;
      // (e_ij)_perp has entry 1 - (z + x_i + y_j)/c_ij inside the leading
      // block, 1 - x_i/c_in or 1 - y_j/c_nj on the last column/row and
      // 1 + z/c_nn at the corner; zeta_ij = c_ij - <e_ij, (e_ij)_perp>_c.
      double value = 0.0;
      if (i < m && j < m) value = z + x + y;
      else if (i < m) value = x;
      else if (j < m) value = y;
      else value = -z;
      out.zeta(i, j) = value;
    }
  }
  return out;
}

ZetaPair zeta_both(const CostMatrix& c) {
  ZetaPair p{zeta_gmatrix(c), zeta_projection(c)};
  for (std::size_t k = 0; k < p.gmatrix.zeta.size(); ++k) {
    p.cross_error = std::max(p.cross_error, std::abs(p.gmatrix.zeta[k] - p.projection.zeta[k]));
  }
  p.gmatrix.cross_error = p.cross_error;
  p.projection.cross_error = p.cross_error;
  return p;
}

double ht_limit(const FlatVector& zeta, const FlatVector& sigma2) {
  if (zeta.n() != sigma2.n()) throw DimensionError("ht_limit: dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    if (sigma2[k] < 0.0) throw std::invalid_argument("ht_limit: variances must be >= 0");
    acc += sigma2[k] * zeta[k];
  }
  return 0.5 * zeta.n() * acc;
}

double ht_limit(const CostMatrix& c, const FlatVector& sigma2) {
  return ht_limit(zeta_projection(c).zeta, sigma2);
}

double ht_limit_c_weighted(const CostMatrix& c, const FlatVector& sigma2) {
  return 0.5 * c.n() * cdot(sigma2, zeta_projection(c).zeta, c);
}

double remark_n2_formula(const CostMatrix& c, const FlatVector& sigma2) {
  if (c.n() != 2 || sigma2.n() != 2) throw std::invalid_argument("remark_n2_formula is defined for n = 2 only");
  double sum_sq = 0.0;
  for (double v : c.values()) sum_sq += v * v;
  double acc = 0.0;
  for (std::size_t k = 0; k < sigma2.size(); ++k) acc += sigma2[k] * c[k] * (1.0 - c[k] * c[k] / sum_sq);
  return 0.5 * acc;
}

namespace {

struct ClassBound {
  double eps_form = 0.0;
  double limit_form = 0.0;
};

// Per-ordering bounds. `members` maps each queue to its class (a queue's
// class is the highest-priority schedule containing it). Each nonempty class
// takes as composite arrival the single member queue minimizing
// E[A^2] - 2 E[A] E[V_{l-1}]; E[V_l] = E[V_{l-1}] - E[A_l] with E[V_0] = 1.
struct PriorityEvaluator {
  const CostMatrix& c;
  const MomentVector& now;    // moments at eps
  const MomentVector& limit;  // moments at eps -> 0
  double epsilon;
  const std::vector<Schedule>& schedules;

  std::int64_t clamped = 0;

  OrderingBound evaluate(const std::vector<int>& order) {
    const int n = c.n();
    const auto m = static_cast<std::size_t>(n * n);
    std::vector<int> owner(m, -1);
    std::vector<ClassBound> bounds(order.size());

    double idle_eps = 1.0;    // E[V_{l-1}] at eps
    double idle_limit = 1.0;  // same at the limit law
    for (std::size_t l = 0; l < order.size(); ++l) {
      const Schedule& s = schedules[static_cast<std::size_t>(order[l])];
      std::vector<std::size_t> members;
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i * n + s.perm[static_cast<std::size_t>(i)]);
        if (owner[k] < 0) {
          owner[k] = static_cast<int>(l);
          members.push_back(k);
        }
      }
      if (members.empty()) continue;

      auto pick = [&](const MomentVector& mv, double idle) {
        std::size_t best = members.front();
        double best_val = std::numeric_limits<double>::infinity();
        for (std::size_t k : members) {
          const double v = mv.second_moment[k] - 2.0 * mv.mean[k] * idle;
          if (v < best_val) {
            best_val = v;
            best = k;
          }
        }
        return std::pair{best, best_val};
      };

      const auto [k_eps, num_eps] = pick(now, idle_eps);
      const double idle_after_eps = idle_eps - now.mean[k_eps];
      // E[V_l^2] <= E[V_l] since V_l is a per-slot fraction in [0, 1].
      double eps_form = (num_eps - std::max(0.0, idle_after_eps)) / (2.0 * epsilon);
      if (eps_form < 0.0) {
        eps_form = 0.0;
        ++clamped;
      }
      idle_eps = idle_after_eps;

      const auto [k_lim, num_lim] = pick(limit, idle_limit);
      double limit_form = num_lim;
      if (limit_form < 0.0) {
        limit_form = 0.0;
        ++clamped;
      }
      idle_limit -= limit.mean[k_lim];

      bounds[l] = {eps_form, limit_form};
    }

    OrderingBound ob;
    ob.order = order;
    for (std::size_t k = 0; k < m; ++k) {
      const auto& b = bounds[static_cast<std::size_t>(owner[k])];
      ob.value_eps += c[k] * b.eps_form;
      ob.value_limit += c[k] * b.limit_form;
    }
    return ob;
  }
};

}  // namespace

LowerBoundResult universal_lower_bound(const CostMatrix& c, const ArrivalModel& model) {
  const int n = c.n();
  if (n > 3) {
    throw std::invalid_argument("universal_lower_bound: n = " + std::to_string(n) +
                                " needs (n!)! priority orderings; only n <= 3 is supported");
  }
  if (model.n() != n) throw DimensionError("universal_lower_bound: dimension mismatch");

  LowerBoundResult out;
  out.n = n;
  out.epsilon = model.epsilon();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    out.schedules.push_back(Schedule{perm});
  } while (std::next_permutation(perm.begin(), perm.end()));

  const MomentVector now = model.moments();
  const MomentVector limit = model.limit_moments();
  PriorityEvaluator eval{c, now, limit, model.epsilon(), out.schedules};

  std::vector<int> order(out.schedules.size());
  std::iota(order.begin(), order.end(), 0);
  out.qstar_eps = std::numeric_limits<double>::infinity();
  out.qstar_limit = std::numeric_limits<double>::infinity();
  do {
    out.per_ordering.push_back(eval.evaluate(order));
    out.qstar_eps = std::min(out.qstar_eps, out.per_ordering.back().value_eps);
    out.qstar_limit = std::min(out.qstar_limit, out.per_ordering.back().value_limit);
  } while (std::next_permutation(order.begin(), order.end()));
  out.clamped_classes = eval.clamped;
  out.qstar_limit_eps_form = 0.5 * out.qstar_limit;
  return out;
}

SscTable ssc_curve(std::span<const RunStats> runs) {
  std::set<double> distinct;
  for (const auto& r : runs) distinct.insert(r.epsilon);
  if (distinct.size() < 3) throw std::invalid_argument("ssc_curve: needs at least 3 distinct epsilon values");

  SscTable t;
  for (const auto& r : runs) {
    if (r.perp_samples == 0) throw std::invalid_argument("ssc_curve: run has no collapse samples");
    t.rows.push_back({r.epsilon, r.perp_norm_moment[0].mean, r.perp_norm_moment[1].mean, r.parallel_norm.mean,
                      r.epsilon * r.weighted_qsum.mean});
  }
  std::sort(t.rows.begin(), t.rows.end(), [](const SscRow& a, const SscRow& b) { return a.epsilon > b.epsilon; });

  std::vector<double> le, lpar, lperp;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& row : t.rows) {
    le.push_back(std::log(row.epsilon));
    lpar.push_back(std::log(row.parallel_norm_mean));
    lperp.push_back(std::log(row.perp_norm_mean));
    lo = std::min(lo, row.perp_norm_mean);
    hi = std::max(hi, row.perp_norm_mean);
  }
  t.parallel_slope = ls_slope(le, lpar);
  t.perp_slope = ls_slope(le, lperp);
  t.perp_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return t;
}

}  // namespace switchlab
