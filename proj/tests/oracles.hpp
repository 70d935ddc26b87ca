#pragma once

// Independent reference implementations used only by the tests. Nothing here
// calls the library's solvers or projection code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "switchlab/random.hpp"
#include "switchlab/wlinalg.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline double dot_c(const Vec& x, const Vec& y, const Vec& c) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += c[k] * x[k] * y[k];
  return s;
}

/// All 2n port generators: rows first, then columns.
inline std::vector<Vec> generators(int n, const Vec& c) {
  std::vector<Vec> g;
  for (int i = 0; i < n; ++i) {
    Vec v(static_cast<std::size_t>(n * n), 0.0);
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(i * n + j)] = 1.0 / c[static_cast<std::size_t>(i * n + j)];
    g.push_back(v);
  }
  for (int j = 0; j < n; ++j) {
    Vec v(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i * n + j)] = 1.0 / c[static_cast<std::size_t>(i * n + j)];
    g.push_back(v);
  }
  return g;
}

/// c-orthonormal basis of span(vs) by modified Gram-Schmidt with
/// reorthogonalization; near-dependent vectors are dropped.
inline std::vector<Vec> orthonormalize(const std::vector<Vec>& vs, const Vec& c) {
  std::vector<Vec> q;
  for (const Vec& v0 : vs) {
    Vec v = v0;
    const double before = std::sqrt(dot_c(v, v, c));
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& b : q) {
        const double r = dot_c(v, b, c);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= r * b[k];
      }
    }
    const double norm = std::sqrt(dot_c(v, v, c));
    if (norm <= 1e-10 * before) continue;
    for (double& x : v) x /= norm;
    q.push_back(std::move(v));
  }
  return q;
}

inline Vec project(const Vec& x, const std::vector<Vec>& q, const Vec& c) {
  Vec p(x.size(), 0.0);
  for (const Vec& b : q) {
    const double r = dot_c(x, b, c);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += r * b[k];
  }
  return p;
}

/// zeta_ij = ||proj_S(e_ij)||_c^2 via an orthonormal basis of S_c.
inline Vec zeta(int n, const Vec& c) {
  const auto q = orthonormalize(generators(n, c), c);
  Vec z(static_cast<std::size_t>(n * n));
  for (std::size_t k = 0; k < z.size(); ++k) {
    double s = 0.0;
    for (const Vec& b : q) {
      const double r = c[k] * b[k];  // <e_k, b>_c
      s += r * r;
    }
    z[k] = s;
  }
  return z;
}

/// Plain Gaussian elimination with partial pivoting; nullopt if singular.
inline std::optional<Vec> gauss(std::vector<Vec> a, Vec b) {
  const std::size_t m = b.size();
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-12) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < m; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  Vec x(m);
  for (std::size_t r = m; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < m; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

/// Nearest point of the cone K_c by active-set enumeration: the optimum lies
/// on the span of a linearly independent subset of generators with
/// nonnegative coefficients. Returns the squared c-distance.
inline double cone_distance2(int n, const Vec& x, const Vec& c) {
  const auto g = generators(n, c);
  const std::size_t m = g.size();
  double best = dot_c(x, x, c);  // the apex 0
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < m; ++k) {
      if (mask & (1u << k)) idx.push_back(k);
    }
    std::vector<Vec> gram(idx.size(), Vec(idx.size()));
    Vec rhs(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      rhs[a] = dot_c(g[idx[a]], x, c);
      for (std::size_t b = 0; b < idx.size(); ++b) gram[a][b] = dot_c(g[idx[a]], g[idx[b]], c);
    }
    const auto coef = gauss(gram, rhs);
    if (!coef || std::any_of(coef->begin(), coef->end(), [](double v) { return v < 0.0; })) continue;
    Vec r = x;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t k = 0; k < r.size(); ++k) r[k] -= (*coef)[a] * g[idx[a]][k];
    }
    best = std::min(best, dot_c(r, r, c));
  }
  return best;
}

/// Maximum of sum_i c_{i,p(i)} q_{i,p(i)} over all permutations, summed in
/// row order like the library does.
inline double brute_max_weight(int n, const std::vector<std::int64_t>& q, const Vec& c) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double w = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i * n + p[static_cast<std::size_t>(i)]);
      w += c[k] * static_cast<double>(q[k]);
    }
    best = std::max(best, w);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

inline Vec random_positive(std::size_t m, switchlab::Rng& rng, double lo = 0.1, double hi = 10.0) {
  Vec v(m);
  for (double& x : v) x = lo + (hi - lo) * switchlab::uniform01(rng);
  return v;
}

inline Vec to_vec(const switchlab::FlatVector& v) { return Vec(v.values().begin(), v.values().end()); }
inline Vec to_vec(const switchlab::CostMatrix& c) { return Vec(c.values().begin(), c.values().end()); }

}  // namespace oracle
