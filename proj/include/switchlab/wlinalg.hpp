#pragma once

// Dense R^{n^2} arithmetic under the cost-weighted inner product
//   <x, y>_c = sum_ij c_ij x_ij y_ij
// plus projections onto the span S_c of the port generators and onto the
// cone K_c = { x : x_ij = (w_i + wt_j) / c_ij, w, wt >= 0 }.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace switchlab {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Strictly positive n x n per-queue costs, row-major. n >= 2.
class CostMatrix {
 public:
  CostMatrix(int n, std::vector<double> values);

  static CostMatrix ones(int n);
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  int n() const noexcept { return n_; }
  double operator()(int i, int j) const noexcept { return c_[static_cast<std::size_t>(i * n_ + j)]; }
  double operator[](std::size_t k) const noexcept { return c_[k]; }
  std::span<const double> values() const noexcept { return c_; }
  double max() const noexcept;
  double min() const noexcept;

  bool operator==(const CostMatrix&) const = default;

 private:
  int n_;
  std::vector<double> c_;
};

/// Element of R^{n^2} indexed (i, j) row-major.
class FlatVector {
 public:
  FlatVector() = default;
  explicit FlatVector(int n, double fill = 0.0);
  FlatVector(int n, std::vector<double> values);

  /// Unit vector with a 1 at (i, j).
  static FlatVector unit(int n, int i, int j);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return v_.size(); }
  double& operator()(int i, int j) noexcept { return v_[static_cast<std::size_t>(i * n_ + j)]; }
  double operator()(int i, int j) const noexcept { return v_[static_cast<std::size_t>(i * n_ + j)]; }
  double& operator[](std::size_t k) noexcept { return v_[k]; }
  double operator[](std::size_t k) const noexcept { return v_[k]; }
  std::span<const double> values() const noexcept { return v_; }

  FlatVector& operator+=(const FlatVector& o);
  FlatVector& operator-=(const FlatVector& o);
  FlatVector& operator*=(double a) noexcept;

  bool operator==(const FlatVector&) const = default;

 private:
  int n_ = 0;
  std::vector<double> v_;
};

FlatVector operator+(FlatVector a, const FlatVector& b);
FlatVector operator-(FlatVector a, const FlatVector& b);
FlatVector operator*(double s, FlatVector a);

double cdot(const FlatVector& x, const FlatVector& y, const CostMatrix& c);
double cnorm2(const FlatVector& x, const CostMatrix& c);

/// Row generator e_c^(i): 1/c_ij on row i, zero elsewhere.
FlatVector row_generator(const CostMatrix& c, int i);
/// Column generator e~_c^(j): 1/c_ij on column j, zero elsewhere.
FlatVector column_generator(const CostMatrix& c, int j);

/// Row-major dense matrix; only what the small solves here need.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t cl) : rows(r), cols(cl), data(r * cl, 0.0) {}
  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
};

std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x);

/// LU factorization with partial pivoting. A pivot below
/// 1e-12 * max|A| raises SingularMatrixError.
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix a);

  std::vector<double> solve(std::span<const double> b) const;
  std::size_t size() const noexcept { return lu_.rows; }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

std::vector<double> solve_dense(const DenseMatrix& a, std::span<const double> b);

/// Z = [e_c^(1) .. e_c^(n), e~_c^(1) .. e~_c^(n-1)] (n^2 x (2n-1)) and its
/// prefactored gram matrix Z^T diag(c) Z.
class ProjectionBasis {
 public:
  explicit ProjectionBasis(const CostMatrix& c);

  int n() const noexcept { return n_; }
  std::size_t rank() const noexcept { return z_.cols; }
  const DenseMatrix& z() const noexcept { return z_; }
  const DenseMatrix& gram() const noexcept { return gram_; }

  /// Coefficients u of the projection Z u for x, i.e. gram^{-1} Z^T diag(c) x.
  std::vector<double> coefficients(const FlatVector& x, const CostMatrix& c) const;
  FlatVector expand(std::span<const double> u) const;

 private:
  int n_;
  DenseMatrix z_;
  DenseMatrix gram_;
  LuFactorization lu_;
};

struct SpaceProjection {
  FlatVector parallel;
  FlatVector perp;
};

SpaceProjection project_space(const FlatVector& x, const ProjectionBasis& basis, const CostMatrix& c);

struct ConeOptions {
  double tol = 1e-10;
  long max_sweeps = 1'000'000;
};

struct ConeProjection {
  FlatVector parallel;
  FlatVector perp;
  std::vector<double> w;   // row weights, >= 0
  std::vector<double> wt;  // column weights, >= 0
  long sweeps = 0;
};

/// Nearest point of K_c to x in the c-norm, by cyclic coordinate descent over
/// (w, wt) with each coordinate set to its clamped exact minimizer.
ConeProjection project_cone(const FlatVector& x, const CostMatrix& c, const ConeOptions& opts = {});

}  // namespace switchlab
