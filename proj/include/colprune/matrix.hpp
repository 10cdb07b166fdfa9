#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace colprune {

// Dense row-major matrix of doubles. Always at least 1x1.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

enum class VarianceEstimator {
  population,  // divide by N
  sample,      // divide by N - 1
};

struct SvdResult {
  Matrix u;                   // rows x rows, orthogonal
  std::vector<double> sigma;  // min(rows, cols) values, descending
  Matrix vt;                  // cols x cols, orthogonal
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& m, double factor);

// Adds bias[i] to every entry of row i.
Matrix add_row_offsets(const Matrix& m, std::span<const double> bias);

Matrix gather_cols(const Matrix& m, std::span<const std::size_t> index);
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> index);

double frob_norm(const Matrix& m);
double trace(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
double determinant(const Matrix& m);

std::vector<double> row_norm(const Matrix& m);
std::vector<double> col_norm(const Matrix& m);
std::vector<double> row_mean(const Matrix& m);
std::vector<double> row_variance(const Matrix& m,
                                 VarianceEstimator estimator = VarianceEstimator::population);

// Full SVD. Throws SolverError if the factorization does not converge and
// NumericError on non-finite input.
SvdResult svd(const Matrix& m);

inline constexpr double kDefaultRcond = 1e-12;

// Moore-Penrose pseudoinverse; singular values below rcond * sigma_max are
// treated as zero.
Matrix pinv(const Matrix& m, double rcond = kDefaultRcond);

// Throws NumericError naming `what` if m has a NaN/Inf entry.
void require_finite(const Matrix& m, const char* what);

}  // namespace colprune
