#include "colprune/compensation.hpp"

#include <algorithm>

#include "colprune/error.hpp"

namespace colprune {

std::string to_string(CompensationVariant v) {
  switch (v) {
    case CompensationVariant::none:
      return "none";
    case CompensationVariant::rot:
      return "rot";
    case CompensationVariant::rot_scale:
      return "rot_scale";
    case CompensationVariant::ls:
      return "ls";
    case CompensationVariant::bias:
      return "bias";
  }
  return "unknown";
}

std::string report_label(CompensationVariant v) {
  return v == CompensationVariant::bias ? "bias_proxy" : to_string(v);
}

CompensationVariant parse_compensation_variant(std::string_view name) {
  for (auto v : {CompensationVariant::none, CompensationVariant::rot, CompensationVariant::rot_scale,
                 CompensationVariant::ls, CompensationVariant::bias}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown compensation variant '" + std::string(name) + "'");
}

namespace {

void require_pair(const Matrix& y, const Matrix& z, const char* op) {
  if (y.rows() != z.rows() || y.cols() != z.cols()) {
    throw ShapeError(std::string(op) + ": Y is " + std::to_string(y.rows()) + "x" +
                     std::to_string(y.cols()) + " but Z is " + std::to_string(z.rows()) + "x" +
                     std::to_string(z.cols()));
  }
}

bool is_zero(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double v) { return v == 0.0; });
}

// Q = U V^T plus tr(Sigma), or (I, 0) when M vanishes.
std::pair<Matrix, double> procrustes_rotation(const Matrix& y, const Matrix& z) {
  const Matrix m = matmul(y, transpose(z));
  if (is_zero(m)) return {Matrix::identity(y.rows()), 0.0};
  const SvdResult f = svd(m);
  double trace_sigma = 0.0;
  for (double s : f.sigma) trace_sigma += s;
  return {matmul(f.u, f.vt), trace_sigma};
}

}  // namespace

CompensationResult fit_none(const Matrix& y, const Matrix& z) {
  require_pair(y, z, "fit_none");
  CompensationResult r;
  r.in_sample_residual = residual(y, z);
  return r;
}

CompensationResult fit_procrustes(const Matrix& y, const Matrix& z) {
  require_pair(y, z, "fit_procrustes");
  CompensationResult r;
  r.variant = CompensationVariant::rot;
  r.q = procrustes_rotation(y, z).first;
  r.in_sample_residual = residual(y, compensate(r, z));
  return r;
}

CompensationResult fit_scaled_procrustes(const Matrix& y, const Matrix& z) {
  require_pair(y, z, "fit_scaled_procrustes");
  CompensationResult r;
  r.variant = CompensationVariant::rot_scale;
  const double zz = frob_norm(z);
  if (zz == 0.0) {
    r.q = Matrix::identity(y.rows());
    r.s = 0.0;
  } else {
    auto [q, trace_sigma] = procrustes_rotation(y, z);
    r.q = std::move(q);
    r.s = trace_sigma / (zz * zz);
  }
  r.in_sample_residual = residual(y, compensate(r, z));
  return r;
}

CompensationResult fit_least_squares(const Matrix& y, const Matrix& z, double rcond) {
  require_pair(y, z, "fit_least_squares");
  CompensationResult r;
  r.variant = CompensationVariant::ls;
  const Matrix zt = transpose(z);
  r.a = matmul(matmul(y, zt), pinv(matmul(z, zt), rcond));
  r.in_sample_residual = residual(y, compensate(r, z));
  return r;
}

CompensationResult fit_bias(const Matrix& y, const Matrix& z) {
  require_pair(y, z, "fit_bias");
  CompensationResult r;
  r.variant = CompensationVariant::bias;
  r.bias = row_mean(subtract(y, z));
  r.in_sample_residual = residual(y, compensate(r, z));
  return r;
}

CompensationResult fit(CompensationVariant variant, const Matrix& y, const Matrix& z, double rcond) {
  switch (variant) {
    case CompensationVariant::none:
      return fit_none(y, z);
    case CompensationVariant::rot:
      return fit_procrustes(y, z);
    case CompensationVariant::rot_scale:
      return fit_scaled_procrustes(y, z);
    case CompensationVariant::ls:
      return fit_least_squares(y, z, rcond);
    case CompensationVariant::bias:
      return fit_bias(y, z);
  }
  throw ConfigError("fit: unknown variant");
}

Matrix compensate(const CompensationResult& result, const Matrix& z) {
  switch (result.variant) {
    case CompensationVariant::none:
      return z;
    case CompensationVariant::rot:
      return matmul(*result.q, z);
    case CompensationVariant::rot_scale:
      return scaled(matmul(*result.q, z), result.s);
    case CompensationVariant::ls:
      return matmul(*result.a, z);
    case CompensationVariant::bias:
      return add_row_offsets(z, *result.bias);
  }
  throw ConfigError("compensate: unknown variant");
}

CompensatedWeight apply(const CompensationResult& result, const Matrix& w_k) {
  const auto check_rows = [&](std::size_t d_out) {
    if (w_k.rows() != d_out) {
      throw ShapeError("apply: kept weight has " + std::to_string(w_k.rows()) +
                       " rows but the fitted map expects " + std::to_string(d_out));
    }
  };
  switch (result.variant) {
    case CompensationVariant::none:
      return {w_k, std::nullopt};
    case CompensationVariant::rot:
      check_rows(result.q->rows());
      return {matmul(*result.q, w_k), std::nullopt};
    case CompensationVariant::rot_scale:
      check_rows(result.q->rows());
      return {scaled(matmul(*result.q, w_k), result.s), std::nullopt};
    case CompensationVariant::ls:
      check_rows(result.a->rows());
      return {matmul(*result.a, w_k), std::nullopt};
    case CompensationVariant::bias:
      check_rows(result.bias->size());
      return {w_k, result.bias};
  }
  throw ConfigError("apply: unknown variant");
}

double residual(const Matrix& y, const Matrix& compensated) {
  return frob_norm(subtract(y, compensated));
}

}  // namespace colprune
