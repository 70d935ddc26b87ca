#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "switchlab/wlinalg.hpp"

using namespace switchlab;

namespace {

FlatVector rows2(std::vector<std::vector<double>> r) {
  const int n = static_cast<int>(r.size());
  std::vector<double> flat;
  for (auto& row : r) flat.insert(flat.end(), row.begin(), row.end());
  return FlatVector(n, flat);
}

FlatVector random_flat(int n, Rng& rng, double lo, double hi) {
  FlatVector x(n);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = lo + (hi - lo) * uniform01(rng);
  return x;
}

}  // namespace

TEST_CASE("cost matrix validation") {
  CHECK_THROWS_AS(CostMatrix(1, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(CostMatrix(2, {1.0, 1.0, 1.0}), DimensionError);
  CHECK_THROWS(CostMatrix(2, {1.0, 0.0, 1.0, 1.0}));
  CHECK_THROWS(CostMatrix(2, {1.0, -2.0, 1.0, 1.0}));
  CHECK_THROWS(CostMatrix(2, {1.0, NAN, 1.0, 1.0}));
  const auto c = CostMatrix::from_rows({{1, 2}, {3, 4}});
  CHECK(c(1, 0) == 3.0);
  CHECK(c.max() == 4.0);
  CHECK(c.min() == 1.0);
}

TEST_CASE("cdot examples") {
  const CostMatrix ones = CostMatrix::ones(2);
  CHECK(cdot(FlatVector(2, 1.0), FlatVector(2, 1.0), ones) == 4.0);
  const auto c = CostMatrix::from_rows({{1, 2}, {2, 1}});
  CHECK(cdot(FlatVector::unit(2, 0, 0), FlatVector::unit(2, 1, 1), c) == 0.0);
  CHECK(cdot(rows2({{1, 2}, {3, 4}}), FlatVector(2, 1.0), c) == 15.0);
  CHECK_THROWS_AS(cdot(FlatVector(2), FlatVector(3), c), DimensionError);
}

TEST_CASE("cnorm2 examples") {
  CHECK(cnorm2(FlatVector(2), CostMatrix::ones(2)) == 0.0);
  CHECK(cnorm2(FlatVector::unit(2, 0, 0), CostMatrix::from_rows({{3, 1}, {1, 1}})) == 3.0);
  CHECK(cnorm2(FlatVector(3, 1.0), CostMatrix::ones(3)) == 9.0);
}

TEST_CASE("cdot is bilinear and symmetric; cnorm2 is positive definite") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    const CostMatrix c(n, oracle::random_positive(static_cast<std::size_t>(n * n), rng));
    const auto x = random_flat(n, rng, -3, 3), y = random_flat(n, rng, -3, 3), z = random_flat(n, rng, -3, 3);
    const double a = uniform01(rng) * 4 - 2;
    CHECK(cdot(x, y, c) == doctest::Approx(cdot(y, x, c)).epsilon(1e-12));
    CHECK(cdot(a * x + y, z, c) == doctest::Approx(a * cdot(x, z, c) + cdot(y, z, c)).epsilon(1e-9));
    CHECK(cnorm2(x, c) > 0.0);
  }
}

TEST_CASE("generators") {
  const auto c = CostMatrix::from_rows({{1, 2}, {4, 8}});
  const auto r = row_generator(c, 1);
  CHECK(r(1, 0) == 0.25);
  CHECK(r(1, 1) == 0.125);
  CHECK(r(0, 0) == 0.0);
  const auto col = column_generator(c, 0);
  CHECK(col(0, 0) == 1.0);
  CHECK(col(1, 0) == 0.25);
  CHECK(col(0, 1) == 0.0);
}

TEST_CASE("solve_dense examples") {
  const auto id = DenseMatrix::identity(3);
  const std::vector<double> b{1, 2, 3};
  CHECK(solve_dense(id, b) == b);

  const auto g = DenseMatrix::from_rows({{2, 1, 1}, {0, 1, -1}, {1, 2, 1}});
  const auto u = solve_dense(g, std::vector<double>{1, 0, 1});
  for (double v : u) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));

  CHECK_THROWS_AS(solve_dense(DenseMatrix(2, 2), std::vector<double>{1, 1}), SingularMatrixError);
  CHECK_THROWS_AS(solve_dense(DenseMatrix(2, 3), std::vector<double>{1, 1}), DimensionError);
}

TEST_CASE("solve_dense residual on random well-conditioned systems") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 12);
    DenseMatrix a(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) a(i, j) = uniform01(rng) * 2 - 1;
      a(i, i) += static_cast<double>(m);  // diagonally dominant
    }
    std::vector<double> b(m);
    double bmax = 0.0;
    for (double& v : b) {
      v = uniform01(rng) * 20 - 10;
      bmax = std::max(bmax, std::abs(v));
    }
    const auto u = solve_dense(a, b);
    const auto au = multiply(a, u);
    for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(au[i] - b[i]) <= 1e-10 * (1 + bmax));
  }
}

TEST_CASE("projection basis layout") {
  const auto c = CostMatrix::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const ProjectionBasis basis(c);
  REQUIRE(basis.rank() == 5);
  REQUIRE(basis.z().rows == 9);
  // Column 1 is the second row generator; column 3 is the first column generator.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto r = static_cast<std::size_t>(i * 3 + j);
      CHECK(basis.z()(r, 1) == (i == 1 ? 1.0 / c(i, j) : 0.0));
      CHECK(basis.z()(r, 3) == (j == 0 ? 1.0 / c(i, j) : 0.0));
    }
  }
  const auto& g = basis.gram();
  for (std::size_t a = 0; a < g.rows; ++a) {
    for (std::size_t b = 0; b < g.cols; ++b) CHECK(g(a, b) == doctest::Approx(g(b, a)).epsilon(1e-14));
  }
}

TEST_CASE("project_space examples") {
  const auto ones = CostMatrix::ones(2);
  const ProjectionBasis basis(ones);

  const auto gen = row_generator(ones, 0);
  const auto p1 = project_space(gen, basis, ones);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(p1.parallel[k] == doctest::Approx(gen[k]).epsilon(1e-12));
    CHECK(std::abs(p1.perp[k]) < 1e-12);
  }

  const auto x = rows2({{1, -1}, {-1, 1}});
  const auto p2 = project_space(x, basis, ones);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(p2.parallel[k]) < 1e-12);
    CHECK(p2.perp[k] == doctest::Approx(x[k]).epsilon(1e-12));
  }

  const auto p3 = project_space(FlatVector::unit(2, 0, 0), basis, ones);
  CHECK(cnorm2(p3.parallel, ones) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("project_space: Pythagoras, idempotence, orthogonality against the MGS oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 5;
    const auto cv = oracle::random_positive(static_cast<std::size_t>(n * n), rng);
    const CostMatrix c(n, cv);
    const ProjectionBasis basis(c);
    const auto x = random_flat(n, rng, -10, 10);
    const auto p = project_space(x, basis, c);
    const double total = cnorm2(x, c);
    CHECK(cnorm2(p.parallel, c) + cnorm2(p.perp, c) == doctest::Approx(total).epsilon(1e-8));
    CHECK(std::abs(cdot(p.parallel, p.perp, c)) <= 1e-9 * total);

    const auto again = project_space(p.parallel, basis, c);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(again.parallel[k] - p.parallel[k]) <= 1e-9 * (1 + std::abs(p.parallel[k])));

    if (trial % 10 == 0) {
      const auto q = oracle::orthonormalize(oracle::generators(n, cv), cv);
      CHECK(q.size() == static_cast<std::size_t>(2 * n - 1));
      const auto ref = oracle::project(oracle::to_vec(x), q, cv);
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(p.parallel[k] == doctest::Approx(ref[k]).epsilon(1e-8).scale(10));
    }
  }
}

TEST_CASE("project_cone examples") {
  const auto ones = CostMatrix::ones(2);
  const auto c = CostMatrix::from_rows({{1, 3}, {2, 0.5}});

  // (w_i + wt_j) / c_ij with nonnegative weights is a fixed point.
  FlatVector in_cone(2);
  const double w[2] = {1.5, 0.0}, wt[2] = {0.25, 2.0};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) in_cone(i, j) = (w[i] + wt[j]) / c(i, j);
  }
  const auto p0 = project_cone(in_cone, c);
  CHECK(cnorm2(p0.perp, c) < 1e-16);

  const auto x = rows2({{1, -1}, {-1, 1}});
  const auto p1 = project_cone(x, ones);
  CHECK(cnorm2(p1.parallel, ones) < 1e-20);
  CHECK(cnorm2(p1.perp, ones) == doctest::Approx(4.0));

  const auto neg = -1.0 * row_generator(c, 0);
  const auto p2 = project_cone(neg, c);
  CHECK(cnorm2(p2.parallel, c) < 1e-20);

  CHECK_THROWS(project_cone(x, ones, ConeOptions{0.0, 10}));
}

TEST_CASE("project_cone: nearest point against active-set oracle, and dominated by the space projection") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 3;
    const auto cv = oracle::random_positive(static_cast<std::size_t>(n * n), rng);
    const CostMatrix c(n, cv);
    const auto x = random_flat(n, rng, -5, 10);
    const auto p = project_cone(x, c);
    for (double v : p.w) CHECK(v >= 0.0);
    for (double v : p.wt) CHECK(v >= 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(p.parallel(i, j) == doctest::Approx((p.w[static_cast<std::size_t>(i)] + p.wt[static_cast<std::size_t>(j)]) / c(i, j)).epsilon(1e-12));
      }
    }
    const double d2 = cnorm2(p.perp, c);
    const double ref = oracle::cone_distance2(n, oracle::to_vec(x), cv);
    CHECK(d2 == doctest::Approx(ref).epsilon(1e-7).scale(1.0));

    const auto s = project_space(x, ProjectionBasis(c), c);
    CHECK(d2 >= cnorm2(s.perp, c) - 1e-9);

    // Variational inequality against the generators and the apex.
    const double tol = 1e-6 * (1 + cnorm2(x, c));
    CHECK(cdot(p.perp, -1.0 * p.parallel, c) <= tol);
    for (int k = 0; k < n; ++k) {
      CHECK(cdot(p.perp, row_generator(c, k), c) <= tol);
      CHECK(cdot(p.perp, column_generator(c, k), c) <= tol);
    }
  }
}

TEST_CASE("project_cone: nonnegative combinations of generators have no perpendicular part") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const CostMatrix c(n, oracle::random_positive(static_cast<std::size_t>(n * n), rng));
    FlatVector x(n);
    for (int i = 0; i < n; ++i) x += (uniform01(rng) * 3) * row_generator(c, i);
    for (int j = 0; j < n; ++j) x += (uniform01(rng) * 3) * column_generator(c, j);
    const auto p = project_cone(x, c);
    CHECK(std::sqrt(cnorm2(p.perp, c)) <= 1e-6 * (1 + std::sqrt(cnorm2(x, c))));
  }
}
