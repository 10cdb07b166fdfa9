#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colprune/matrix.hpp"

namespace colprune {

// Map fitted from the kept output Z to the original output Y.
enum class CompensationVariant {
  none,       // Z unchanged
  rot,        // Q Z, Q orthogonal (Procrustes)
  rot_scale,  // s Q Z, s >= 0
  ls,         // A Z, A unconstrained (least squares)
  bias,       // Z + b 1^T, b the mean residual (FLAP-style proxy)
};

std::string to_string(CompensationVariant v);
CompensationVariant parse_compensation_variant(std::string_view name);

// Label used in reports. Differs from to_string only for the bias variant,
// which is tagged as a proxy for the cited baseline.
std::string report_label(CompensationVariant v);

struct CompensationResult {
  CompensationVariant variant = CompensationVariant::none;
  std::optional<Matrix> q;                 // rot, rot_scale
  double s = 1.0;                          // rot_scale; 1 otherwise
  std::optional<Matrix> a;                 // ls
  std::optional<std::vector<double>> bias; // bias
  double in_sample_residual = 0.0;         // ||Y - compensated||_F
};

// Orthogonal Procrustes: Q = U V^T from M = Y Z^T = U S V^T. Q may be a
// reflection (det -1). If M is exactly zero, Q = I.
CompensationResult fit_procrustes(const Matrix& y, const Matrix& z);

// As fit_procrustes plus s = tr(S) / ||Z||_F^2. If ||Z||_F = 0 then s = 0 and
// Q = I.
CompensationResult fit_scaled_procrustes(const Matrix& y, const Matrix& z);

// A = Y Z^T pinv(Z Z^T, rcond).
CompensationResult fit_least_squares(const Matrix& y, const Matrix& z, double rcond = kDefaultRcond);

// b = row means of (Y - Z).
CompensationResult fit_bias(const Matrix& y, const Matrix& z);

CompensationResult fit_none(const Matrix& y, const Matrix& z);

CompensationResult fit(CompensationVariant variant, const Matrix& y, const Matrix& z,
                       double rcond = kDefaultRcond);

// The fitted map applied to an output block z (d_out x anything).
Matrix compensate(const CompensationResult& result, const Matrix& z);

struct CompensatedWeight {
  Matrix weight;
  std::optional<std::vector<double>> bias;  // set only for the bias variant
};

// Folds the fitted map into the kept weight block w_k (d_out x k).
CompensatedWeight apply(const CompensationResult& result, const Matrix& w_k);

// ||y - compensated||_F (the norm, not its square).
double residual(const Matrix& y, const Matrix& compensated);

}  // namespace colprune
