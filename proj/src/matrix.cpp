#include "colprune/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "colprune/error.hpp"

namespace colprune {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMajor>;
using View = Eigen::Map<RowMajor>;

ConstView view(const Matrix& m) { return ConstView(m.data().data(), m.rows(), m.cols()); }
View view(Matrix& m) { return View(m.data().data(), m.rows(), m.cols()); }

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + dims(a) + " vs " + dims(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0 || cols_ == 0) {
    throw ShapeError("Matrix: dimensions must be at least 1x1, got " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  if (rows_ == 0 || cols_ == 0) throw ShapeError("Matrix: empty initializer");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
  return Matrix(rows, cols, std::vector<double>(rows * cols, value));
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw NumericError(std::string(what) + ": non-finite value");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + dims(a) + " * " + dims(b));
  }
  Matrix out(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
  require_finite(out, "matmul");
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  view(out) = view(m).transpose();
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out(a.rows(), a.cols());
  view(out) = view(a) + view(b);
  require_finite(out, "add");
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out(a.rows(), a.cols());
  view(out) = view(a) - view(b);
  require_finite(out, "subtract");
  return out;
}

Matrix scaled(const Matrix& m, double factor) {
  Matrix out(m.rows(), m.cols());
  view(out) = view(m) * factor;
  require_finite(out, "scaled");
  return out;
}

Matrix add_row_offsets(const Matrix& m, std::span<const double> bias) {
  if (bias.size() != m.rows()) {
    throw ShapeError("add_row_offsets: bias length " + std::to_string(bias.size()) + " vs " +
                     std::to_string(m.rows()) + " rows");
  }
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) += bias[i];
  }
  require_finite(out, "add_row_offsets");
  return out;
}

Matrix gather_cols(const Matrix& m, std::span<const std::size_t> index) {
  if (index.empty()) throw ShapeError("gather_cols: empty index set");
  Matrix out(m.rows(), index.size());
  for (std::size_t c = 0; c < index.size(); ++c) {
    if (index[c] >= m.cols()) throw ShapeError("gather_cols: index out of range");
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = m(r, index[c]);
  }
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> index) {
  if (index.empty()) throw ShapeError("gather_rows: empty index set");
  Matrix out(index.size(), m.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= m.rows()) throw ShapeError("gather_rows: index out of range");
    auto src = m.row(index[r]);
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(r * m.cols()));
  }
  return out;
}

double frob_norm(const Matrix& m) { return view(m).norm(); }

double trace(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
  return t;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  return (view(a) - view(b)).cwiseAbs().maxCoeff();
}

double determinant(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("determinant: matrix is not square " + dims(m));
  return view(m).determinant();
}

std::vector<double> row_norm(const Matrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = view(m).row(static_cast<Eigen::Index>(i)).norm();
  return out;
}

std::vector<double> col_norm(const Matrix& m) {
  std::vector<double> out(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) out[j] = view(m).col(static_cast<Eigen::Index>(j)).norm();
  return out;
}

std::vector<double> row_mean(const Matrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = view(m).row(static_cast<Eigen::Index>(i)).mean();
  return out;
}

std::vector<double> row_variance(const Matrix& m, VarianceEstimator estimator) {
  const auto n = static_cast<double>(m.cols());
  if (estimator == VarianceEstimator::sample && m.cols() < 2) {
    throw ShapeError("row_variance: sample variance needs at least two columns");
  }
  const double denom = estimator == VarianceEstimator::population ? n : n - 1.0;
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    out[i] = ss / denom;
  }
  return out;
}

namespace {

template <typename Solver>
SvdResult unpack_svd(const Solver& solver, const Matrix& m) {
  const Eigen::MatrixXd& u = solver.matrixU();
  const Eigen::MatrixXd& v = solver.matrixV();
  const auto& s = solver.singularValues();

  SvdResult out{Matrix(m.rows(), m.rows()), std::vector<double>(static_cast<std::size_t>(s.size())),
                Matrix(m.cols(), m.cols())};
  view(out.u) = u;
  view(out.vt) = v.transpose();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.sigma[static_cast<std::size_t>(i)] = s(i);
  return out;
}

bool finite_factors(const SvdResult& f) {
  return f.u.all_finite() && f.vt.all_finite() &&
         std::all_of(f.sigma.begin(), f.sigma.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  constexpr unsigned kFull = Eigen::ComputeFullU | Eigen::ComputeFullV;
  Eigen::BDCSVD<Eigen::MatrixXd> bdc(view(m), kFull);
  if (bdc.info() == Eigen::Success) {
    SvdResult out = unpack_svd(bdc, m);
    if (finite_factors(out)) return out;
  }
  // Eigen 3.4.0's divide-and-conquer can emit NaN factors on heavily
  // deflated inputs (e.g. a constant 512x512 matrix) while reporting
  // success. One-sided Jacobi is slower but robust there.
  Eigen::JacobiSVD<Eigen::MatrixXd> jacobi(view(m), kFull);
  if (jacobi.info() != Eigen::Success) throw SolverError("svd: factorization did not converge");
  SvdResult out = unpack_svd(jacobi, m);
  if (!finite_factors(out)) throw SolverError("svd: non-finite factors");
  return out;
}

Matrix pinv(const Matrix& m, double rcond) {
  if (!(rcond > 0.0)) throw ConfigError("pinv: rcond must be positive");
  const SvdResult f = svd(m);
  const double cutoff = rcond * (f.sigma.empty() ? 0.0 : f.sigma.front());

  // pinv = V * diag(1/sigma) * U^T over the retained singular triplets.
  const Matrix ut = transpose(f.u);
  Matrix out(m.cols(), m.rows());
  for (std::size_t k = 0; k < f.sigma.size(); ++k) {
    if (!(f.sigma[k] > cutoff)) continue;
    const double inv = 1.0 / f.sigma[k];
    for (std::size_t i = 0; i < m.cols(); ++i) {
      const double vik = f.vt(k, i) * inv;
      if (vik == 0.0) continue;
      for (std::size_t j = 0; j < m.rows(); ++j) out(i, j) += vik * ut(k, j);
    }
  }
  require_finite(out, "pinv");
  return out;
}

}  // namespace colprune
