#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "colprune/compensation.hpp"
#include "colprune/error.hpp"
#include "colprune/oracle.hpp"
#include "frozen_values.hpp"
#include "support/random_matrix.hpp"

using namespace colprune;
using colprune::testing::gaussian;
using colprune::testing::uniform_real;
using colprune::testing::uniform_size;

namespace {

Matrix from(const double* v, std::size_t r, std::size_t c) { return Matrix(r, c, std::vector<double>(v, v + r * c)); }

Matrix rotation3(double a, double b) {
  const Matrix rz{{std::cos(a), -std::sin(a), 0}, {std::sin(a), std::cos(a), 0}, {0, 0, 1}};
  const Matrix rx{{1, 0, 0}, {0, std::cos(b), -std::sin(b)}, {0, std::sin(b), std::cos(b)}};
  return matmul(rz, rx);
}

std::pair<Matrix, Matrix> random_pair(std::mt19937_64& rng, std::size_t d, std::size_t n) {
  const Matrix z = gaussian(rng, d, n);
  return {add(matmul(gaussian(rng, d, d), z), gaussian(rng, d, n, 0.5)), z};
}

double fitted(const CompensationResult& r, const Matrix& y, const Matrix& z) { return residual(y, compensate(r, z)); }

}  // namespace

TEST(CompensationTest, VariantNames) {
  for (auto v : {CompensationVariant::none, CompensationVariant::rot, CompensationVariant::rot_scale,
                 CompensationVariant::ls, CompensationVariant::bias}) {
    EXPECT_EQ(parse_compensation_variant(to_string(v)), v);
  }
  EXPECT_EQ(report_label(CompensationVariant::bias), "bias_proxy");
  EXPECT_EQ(report_label(CompensationVariant::rot), "rot");
  EXPECT_THROW(parse_compensation_variant("rotation"), ConfigError);
}

TEST(CompensationTest, FrozenSmallExample) {
  const Matrix y = from(frozen::kY, 2, 3), z = from(frozen::kZ, 2, 3);
  const auto rot = fit_procrustes(y, z);
  EXPECT_LE(max_abs_diff(*rot.q, from(frozen::kProcrustesQ, 2, 2)), 1e-12);
  EXPECT_NEAR(rot.in_sample_residual, frozen::kProcrustesResidual, 1e-12);
  const auto rs = fit_scaled_procrustes(y, z);
  EXPECT_NEAR(rs.s, frozen::kScaledS, 1e-12);
  EXPECT_NEAR(rs.in_sample_residual, frozen::kScaledResidual, 1e-12);
  const auto ls = fit_least_squares(y, z);
  EXPECT_LE(max_abs_diff(*ls.a, from(frozen::kLeastSquaresA, 2, 2)), 1e-12);
  EXPECT_NEAR(ls.in_sample_residual, frozen::kLeastSquaresResidual, 1e-12);
  const auto b = fit_bias(y, z);
  EXPECT_NEAR((*b.bias)[0], frozen::kBias[0], 1e-14);
  EXPECT_NEAR((*b.bias)[1], frozen::kBias[1], 1e-14);
  EXPECT_NEAR(b.in_sample_residual, frozen::kBiasResidual, 1e-12);
}

TEST(ProcrustesTest, IdentityAndExactRotation) {
  std::mt19937_64 rng(21);
  const Matrix z = gaussian(rng, 3, 8);
  EXPECT_LE(max_abs_diff(*fit_procrustes(z, z).q, Matrix::identity(3)), 1e-10);
  const Matrix r = rotation3(0.7, -1.1);
  const auto fitres = fit_procrustes(matmul(r, z), z);
  EXPECT_LE(max_abs_diff(*fitres.q, r), 1e-8);
  EXPECT_LE(fitres.in_sample_residual, 1e-10);
}

TEST(ProcrustesTest, ReflectionAllowed) {
  std::mt19937_64 rng(22);
  const Matrix z = gaussian(rng, 2, 6);
  const Matrix flip{{1, 0}, {0, -1}};
  const auto r = fit_procrustes(matmul(flip, z), z);
  EXPECT_NEAR(determinant(*r.q), -1.0, 1e-10);
  EXPECT_LE(r.in_sample_residual, 1e-10);
}

TEST(ProcrustesTest, ZeroCrossProductGivesIdentity) {
  const Matrix z{{1, 2}, {3, 4}};
  const auto r = fit_procrustes(Matrix(2, 2), z);
  EXPECT_EQ(*r.q, Matrix::identity(2));
  const auto s = fit_scaled_procrustes(z, Matrix(2, 2));
  EXPECT_EQ(*s.q, Matrix::identity(2));
  EXPECT_EQ(s.s, 0.0);
}

TEST(ProcrustesTest, MatchesGridOracleIn2D) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 10; ++i) {
    auto [y, z] = random_pair(rng, 2, 3 + i);
    const double closed = fit_procrustes(y, z).in_sample_residual;
    const auto grid = oracle::best_orthogonal_2d(y, z, {1e-4, true});
    EXPECT_LE(closed, grid.residual + 1e-6);
    EXPECT_NEAR(closed, grid.residual, 1e-6);
  }
}

TEST(ProcrustesTest, MatchesPolarFactor) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 10; ++i) {
    auto [y, z] = random_pair(rng, 5, 20);
    const Matrix m = oracle::naive_matmul(y, transpose(z));
    EXPECT_LE(max_abs_diff(*fit_procrustes(y, z).q, oracle::polar_orthogonal_factor(m)), 1e-8);
  }
}

TEST(ProcrustesTest, OrthogonalityAndGeometry) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = uniform_size(rng, 1, 10);
    auto [y, z] = random_pair(rng, d, uniform_size(rng, 1, 30));
    const Matrix q = *fit_procrustes(y, z).q;
    EXPECT_LE(frob_norm(subtract(matmul(transpose(q), q), Matrix::identity(d))), 1e-8);
    EXPECT_NEAR(std::abs(determinant(q)), 1.0, 1e-6);
    const Matrix u = gaussian(rng, d, 1), v = gaussian(rng, d, 1);
    const Matrix qu = matmul(q, u), qv = matmul(q, v);
    EXPECT_NEAR(matmul(transpose(qu), qv)(0, 0), matmul(transpose(u), v)(0, 0), 1e-9);
    EXPECT_NEAR(frob_norm(qu), frob_norm(u), 1e-9);
    EXPECT_LE(fitted(fit_procrustes(y, z), y, z), residual(y, z) + 1e-10);
  }
}

TEST(ScaledProcrustesTest, PureScaling) {
  std::mt19937_64 rng(26);
  const Matrix z = gaussian(rng, 3, 7);
  const auto two = fit_scaled_procrustes(scaled(z, 2.0), z);
  EXPECT_NEAR(two.s, 2.0, 1e-12);
  EXPECT_LE(max_abs_diff(*two.q, Matrix::identity(3)), 1e-10);
  EXPECT_NEAR(fit_scaled_procrustes(z, z).s, 1.0, 1e-12);
}

TEST(ScaledProcrustesTest, MatchesLineSearch) {
  std::mt19937_64 rng(27);
  for (int i = 0; i < 20; ++i) {
    auto [y, z] = random_pair(rng, uniform_size(rng, 1, 8), uniform_size(rng, 1, 30));
    const auto r = fit_scaled_procrustes(y, z);
    EXPECT_NEAR(r.s, oracle::line_search_scale(y, matmul(*r.q, z)), 1e-6);
  }
}

TEST(ScaledProcrustesTest, PreservesRelativeLengths) {
  std::mt19937_64 rng(28);
  auto [y, z] = random_pair(rng, 4, 12);
  const auto lz = col_norm(z);
  const auto lc = col_norm(compensate(fit_scaled_procrustes(y, z), z));
  for (std::size_t i = 0; i + 1 < lz.size(); ++i) EXPECT_NEAR(lc[i] / lc[i + 1], lz[i] / lz[i + 1], 1e-9);
}

TEST(LeastSquaresTest, ExactRecoveryAndZero) {
  std::mt19937_64 rng(29);
  const Matrix a0 = gaussian(rng, 3, 3), z = gaussian(rng, 3, 10);
  EXPECT_LE(max_abs_diff(*fit_least_squares(matmul(a0, z), z).a, a0), 1e-8);
  EXPECT_EQ(*fit_least_squares(gaussian(rng, 2, 4), Matrix(2, 4)).a, Matrix(2, 2));
}

TEST(LeastSquaresTest, MatchesQrOracle) {
  std::mt19937_64 rng(30);
  auto [y, z] = random_pair(rng, 3, 20);
  const auto ls = fit_least_squares(y, z);
  const Matrix a = oracle::ols_per_row(y, z);
  EXPECT_LE(max_abs_diff(*ls.a, a), 1e-8);
  EXPECT_NEAR(ls.in_sample_residual, oracle::naive_frob(subtract(y, oracle::naive_matmul(a, z))), 1e-8);
}

TEST(LeastSquaresTest, SingleRowRegression) {
  const Matrix z{{1, 2, 3, 4}};
  const Matrix y{{2, 3.5, 6.5, 8}};
  const double slope = (2 + 7 + 19.5 + 32) / 30.0;
  EXPECT_NEAR((*fit_least_squares(y, z).a)(0, 0), slope, 1e-12);
}

TEST(BiasTest, ExactOffsetAndMeanOracle) {
  std::mt19937_64 rng(31);
  const Matrix z = gaussian(rng, 3, 9);
  const auto same = fit_bias(z, z);
  for (double b : *same.bias) EXPECT_EQ(b, 0.0);
  const std::vector<double> c{1.5, -2.0, 0.25};
  const auto r = fit_bias(add_row_offsets(z, c), z);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR((*r.bias)[i], c[i], 1e-14);

  const Matrix y = gaussian(rng, 3, 9);
  const auto fitb = fit_bias(y, z);
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (std::size_t t = 0; t < 9; ++t) sum += y(i, t) - z(i, t);
    EXPECT_NEAR((*fitb.bias)[i], sum / 9.0, 1e-12);
  }
}

TEST(NestedOrderingTest, RandomInstances) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    auto [y, z] = random_pair(rng, uniform_size(rng, 1, 8), uniform_size(rng, 1, 25));
    const double ls = fitted(fit_least_squares(y, z), y, z);
    const double rs = fitted(fit_scaled_procrustes(y, z), y, z);
    const double rot = fitted(fit_procrustes(y, z), y, z);
    const double none = fitted(fit_none(y, z), y, z);
    EXPECT_LE(ls, rs + 1e-9);
    EXPECT_LE(rs, rot + 1e-9);
    EXPECT_LE(rot, none + 1e-10);
    EXPECT_LE(fitted(fit_bias(y, z), y, z), none + 1e-10);
  }
}

TEST(ApplyTest, FoldingMatchesCompensation) {
  std::mt19937_64 rng(33);
  const Matrix w_k = gaussian(rng, 4, 6), x_k = gaussian(rng, 6, 15);
  const Matrix z = matmul(w_k, x_k);
  const Matrix y = add(z, gaussian(rng, 4, 15, 0.3));
  for (auto v : {CompensationVariant::none, CompensationVariant::rot, CompensationVariant::rot_scale,
                 CompensationVariant::ls, CompensationVariant::bias}) {
    const auto r = fit(v, y, z);
    EXPECT_EQ(r.variant, v);
    const auto folded = apply(r, w_k);
    Matrix out = matmul(folded.weight, x_k);
    if (folded.bias) out = add_row_offsets(out, *folded.bias);
    EXPECT_LE(max_abs_diff(out, compensate(r, z)), 1e-10);
    EXPECT_NEAR(residual(y, out), r.in_sample_residual, 1e-9);
    EXPECT_EQ(folded.bias.has_value(), v == CompensationVariant::bias);
  }
  EXPECT_EQ(apply(fit_none(y, z), w_k).weight, w_k);
  const auto rot = apply(fit_procrustes(y, z), w_k);
  EXPECT_NEAR(frob_norm(matmul(rot.weight, x_k)), frob_norm(z), 1e-10);
  CompensationResult ident;
  ident.variant = CompensationVariant::rot;
  ident.q = Matrix::identity(4);
  EXPECT_EQ(apply(ident, w_k).weight, w_k);
}

TEST(ResidualTest, Examples) {
  EXPECT_EQ(residual(Matrix{{1, 2}}, Matrix{{1, 2}}), 0.0);
  EXPECT_DOUBLE_EQ(residual(Matrix(2, 2), Matrix::constant(2, 2, 1.0)), 2.0);
  std::mt19937_64 rng(34);
  const Matrix a = gaussian(rng, 3, 5), b = gaussian(rng, 3, 5);
  EXPECT_NEAR(residual(a, b), oracle::naive_frob(subtract(a, b)), 1e-12);
  EXPECT_THROW(residual(a, Matrix(3, 4)), ShapeError);
  EXPECT_THROW(fit_procrustes(a, Matrix(2, 5)), ShapeError);
}
