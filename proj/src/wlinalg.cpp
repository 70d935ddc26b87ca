#include "switchlab/wlinalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace switchlab {

namespace {

void require_same(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

}  // namespace

CostMatrix::CostMatrix(int n, std::vector<double> values) : n_(n), c_(std::move(values)) {
  if (n_ < 2) throw std::invalid_argument("cost matrix needs n >= 2");
  if (c_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_)) {
    throw DimensionError("cost matrix must have n*n entries");
  }
  for (double v : c_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("cost entries must be finite and > 0");
  }
}

CostMatrix CostMatrix::ones(int n) {
  return CostMatrix(n, std::vector<double>(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 1.0));
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<double> flat;
  flat.reserve(rows.size() * rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n) throw DimensionError("cost matrix must be square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return CostMatrix(n, std::move(flat));
}

double CostMatrix::max() const noexcept { return *std::max_element(c_.begin(), c_.end()); }
double CostMatrix::min() const noexcept { return *std::min_element(c_.begin(), c_.end()); }

FlatVector::FlatVector(int n, double fill)
    : n_(n), v_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill) {}

FlatVector::FlatVector(int n, std::vector<double> values) : n_(n), v_(std::move(values)) {
  if (v_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw DimensionError("flat vector must have n*n entries");
  }
}

FlatVector FlatVector::unit(int n, int i, int j) {
  FlatVector e(n);
  e(i, j) = 1.0;
  return e;
}

FlatVector& FlatVector::operator+=(const FlatVector& o) {
  require_same(n_, o.n_, "operator+=");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
  return *this;
}

FlatVector& FlatVector::operator-=(const FlatVector& o) {
  require_same(n_, o.n_, "operator-=");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
  return *this;
}

FlatVector& FlatVector::operator*=(double a) noexcept {
  for (double& v : v_) v *= a;
  return *this;
}

FlatVector operator+(FlatVector a, const FlatVector& b) { return a += b; }
FlatVector operator-(FlatVector a, const FlatVector& b) { return a -= b; }
FlatVector operator*(double s, FlatVector a) { return a *= s; }

double cdot(const FlatVector& x, const FlatVector& y, const CostMatrix& c) {
  require_same(x.n(), y.n(), "cdot");
  require_same(x.n(), c.n(), "cdot");
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += c[k] * x[k] * y[k];
  return acc;
}

double cnorm2(const FlatVector& x, const CostMatrix& c) { return cdot(x, x, c); }

FlatVector row_generator(const CostMatrix& c, int i) {
  FlatVector e(c.n());
  for (int j = 0; j < c.n(); ++j) e(i, j) = 1.0 / c(i, j);
  return e;
}

FlatVector column_generator(const CostMatrix& c, int j) {
  FlatVector e(c.n());
  for (int i = 0; i < c.n(); ++i) e(i, j) = 1.0 / c(i, j);
  return e;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  DenseMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (rows[i].size() != m.cols) throw DimensionError("ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return m;
}

std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols) throw DimensionError("multiply: dimension mismatch");
  std::vector<double> y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

LuFactorization::LuFactorization(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows) {
  if (lu_.rows != lu_.cols) throw DimensionError("LU: matrix must be square");
  const std::size_t n = lu_.rows;
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  double scale = 0.0;
  for (double v : lu_.data) scale = std::max(scale, std::abs(v));
  const double pivot_floor = 1e-12 * scale;
  if (scale == 0.0 && n > 0) throw SingularMatrixError("LU: zero matrix");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (best < pivot_floor) {
      throw SingularMatrixError("LU: pivot " + std::to_string(best) + " below tolerance at column " +
                                std::to_string(k));
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows;
  if (b.size() != n) throw DimensionError("LU solve: rhs length mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * y[j];
    y[i] = acc;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= lu_(ii, j) * y[j];
    y[ii] = acc / lu_(ii, ii);
  }
  return y;
}

std::vector<double> solve_dense(const DenseMatrix& a, std::span<const double> b) {
  if (b.size() != a.rows) throw DimensionError("solve_dense: rhs length mismatch");
  return LuFactorization(a).solve(b);
}

namespace {

DenseMatrix build_z(const CostMatrix& c) {
  const int n = c.n();
  DenseMatrix z(static_cast<std::size_t>(n * n), static_cast<std::size_t>(2 * n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto row = static_cast<std::size_t>(i * n + j);
      z(row, static_cast<std::size_t>(i)) = 1.0 / c(i, j);
      if (j < n - 1) z(row, static_cast<std::size_t>(n + j)) = 1.0 / c(i, j);
    }
  }
  return z;
}

DenseMatrix build_gram(const DenseMatrix& z, const CostMatrix& c) {
  DenseMatrix g(z.cols, z.cols);
  for (std::size_t a = 0; a < z.cols; ++a) {
    for (std::size_t b = a; b < z.cols; ++b) {
      double acc = 0.0;
      for (std::size_t r = 0; r < z.rows; ++r) acc += z(r, a) * c[r] * z(r, b);
      g(a, b) = acc;
      g(b, a) = acc;
    }
  }
  return g;
}

}  // namespace

ProjectionBasis::ProjectionBasis(const CostMatrix& c)
    : n_(c.n()), z_(build_z(c)), gram_(build_gram(z_, c)), lu_(gram_) {}

std::vector<double> ProjectionBasis::coefficients(const FlatVector& x, const CostMatrix& c) const {
  require_same(x.n(), n_, "project_space");
  require_same(c.n(), n_, "project_space");
  std::vector<double> rhs(z_.cols, 0.0);
  for (std::size_t r = 0; r < z_.rows; ++r) {
    const double cx = c[r] * x[r];
    if (cx == 0.0) continue;
    for (std::size_t k = 0; k < z_.cols; ++k) rhs[k] += z_(r, k) * cx;
  }
  return lu_.solve(rhs);
}

FlatVector ProjectionBasis::expand(std::span<const double> u) const {
  return FlatVector(n_, multiply(z_, u));
}

SpaceProjection project_space(const FlatVector& x, const ProjectionBasis& basis, const CostMatrix& c) {
  FlatVector parallel = basis.expand(basis.coefficients(x, c));
  FlatVector perp = x - parallel;
  return {std::move(parallel), std::move(perp)};
}

ConeProjection project_cone(const FlatVector& x, const CostMatrix& c, const ConeOptions& opts) {
  require_same(x.n(), c.n(), "project_cone");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("project_cone: tol must be > 0");
  const int n = c.n();

  // f(w, wt) = sum_ij (y_ij - w_i - wt_j)^2 / c_ij with y = c .* x.
  std::vector<double> y(x.size());
  std::vector<double> inv(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    y[k] = c[k] * x[k];
    inv[k] = 1.0 / c[k];
  }
  std::vector<double> row_inv(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col_inv(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      row_inv[static_cast<std::size_t>(i)] += inv[static_cast<std::size_t>(i * n + j)];
      col_inv[static_cast<std::size_t>(j)] += inv[static_cast<std::size_t>(i * n + j)];
    }
  }

  ConeProjection out;
  out.w.assign(static_cast<std::size_t>(n), 0.0);
  out.wt.assign(static_cast<std::size_t>(n), 0.0);
  auto& w = out.w;
  auto& wt = out.wt;

  bool converged = false;
  for (long sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(i * n + j);
        acc += (y[k] - wt[static_cast<std::size_t>(j)]) * inv[k];
      }
      const double next = std::max(0.0, acc / row_inv[static_cast<std::size_t>(i)]);
      change = std::max(change, std::abs(next - w[static_cast<std::size_t>(i)]));
      w[static_cast<std::size_t>(i)] = next;
    }
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i * n + j);
        acc += (y[k] - w[static_cast<std::size_t>(i)]) * inv[k];
      }
      const double next = std::max(0.0, acc / col_inv[static_cast<std::size_t>(j)]);
      change = std::max(change, std::abs(next - wt[static_cast<std::size_t>(j)]));
      wt[static_cast<std::size_t>(j)] = next;
    }
    out.sweeps = sweep + 1;
    if (change < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("project_cone: no convergence after " + std::to_string(opts.max_sweeps) + " sweeps");
  }

  out.parallel = FlatVector(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.parallel(i, j) = (w[static_cast<std::size_t>(i)] + wt[static_cast<std::size_t>(j)]) / c(i, j);
    }
  }
  out.perp = x - out.parallel;
  return out;
}

}  // namespace switchlab
