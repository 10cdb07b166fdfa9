#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "colprune/error.hpp"
#include "colprune/oracle.hpp"
#include "support/random_matrix.hpp"

using namespace colprune;
using colprune::testing::gaussian;

TEST(GridOracleTest, IdentityAndKnownAngle) {
  std::mt19937_64 rng(61);
  const Matrix z = gaussian(rng, 2, 10);
  const auto same = oracle::best_orthogonal_2d(z, z, {1e-3, true});
  EXPECT_LE(same.residual, 1e-9);
  EXPECT_NEAR(same.angle, 0.0, 1e-3);
  EXPECT_FALSE(same.reflection);

  const double a = std::numbers::pi / 4;
  const Matrix r{{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}};
  const auto fit = oracle::best_orthogonal_2d(matmul(r, z), z, {1e-4, true});
  EXPECT_NEAR(fit.angle, a, 1e-4);
  EXPECT_THROW(oracle::best_orthogonal_2d(Matrix(3, 2), Matrix(3, 2)), ShapeError);
  EXPECT_THROW(oracle::best_orthogonal_2d(z, z, {0.0, true}), ConfigError);
}

TEST(GridOracleTest, ReflectionsOnlyWhenAsked) {
  std::mt19937_64 rng(62);
  const Matrix z = gaussian(rng, 2, 8);
  const Matrix y = matmul(Matrix{{1, 0}, {0, -1}}, z);
  EXPECT_LE(oracle::best_orthogonal_2d(y, z, {1e-3, true}).residual, 1e-9);
  EXPECT_GT(oracle::best_orthogonal_2d(y, z, {1e-3, false}).residual, 1e-3);
}

TEST(OlsOracleTest, IdentityAndScalar) {
  std::mt19937_64 rng(63);
  const Matrix z = gaussian(rng, 3, 10);
  EXPECT_LE(max_abs_diff(oracle::ols_per_row(z, z), Matrix::identity(3)), 1e-12);
  const Matrix zs{{1, 2, 3}};
  const Matrix ys{{1, 1, 4}};
  EXPECT_NEAR(oracle::ols_per_row(ys, zs)(0, 0), 15.0 / 14.0, 1e-14);
  EXPECT_THROW(oracle::ols_per_row(Matrix(2, 3), Matrix(2, 4)), ShapeError);
}

TEST(LineSearchOracleTest, Examples) {
  std::mt19937_64 rng(64);
  const Matrix qz = gaussian(rng, 3, 5);
  EXPECT_NEAR(oracle::line_search_scale(scaled(qz, 3.0), qz), 3.0, 1e-8);
  EXPECT_EQ(oracle::line_search_scale(qz, Matrix(3, 5)), 0.0);
}

TEST(NaiveOracleTest, ProductsAndNorms) {
  EXPECT_EQ(oracle::naive_matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{1}, {1}}), (Matrix{{3}, {7}}));
  EXPECT_DOUBLE_EQ(oracle::naive_frob(Matrix{{3, 4}}), 5.0);
}

TEST(EigenOracleTest, SymmetricDecomposition) {
  std::mt19937_64 rng(65);
  const Matrix a = gaussian(rng, 5, 5);
  const Matrix s = oracle::naive_matmul(transpose(a), a);
  const auto e = oracle::symmetric_eigen(s);
  for (std::size_t k = 0; k < 5; ++k) {
    if (k) EXPECT_GE(e.values[k - 1], e.values[k]);
    for (std::size_t i = 0; i < 5; ++i) {
      double sv = 0.0;
      for (std::size_t j = 0; j < 5; ++j) sv += s(i, j) * e.vectors(j, k);
      EXPECT_NEAR(sv, e.values[k] * e.vectors(i, k), 1e-9);
    }
  }
}

TEST(PolarOracleTest, OrthogonalFactor) {
  std::mt19937_64 rng(66);
  const Matrix m = gaussian(rng, 4, 4);
  const Matrix q = oracle::polar_orthogonal_factor(m);
  EXPECT_LE(max_abs_diff(oracle::naive_matmul(transpose(q), q), Matrix::identity(4)), 1e-10);
  // Q^T M is the symmetric positive factor
  const Matrix p = oracle::naive_matmul(transpose(q), m);
  EXPECT_LE(max_abs_diff(p, transpose(p)), 1e-10);
}
