#pragma once

#include <vector>

#include "colprune/matrix.hpp"
#include "colprune/model.hpp"

// Brute-force reference computations for tests. Everything here is written
// with plain loops over Matrix elements and does not call the library's
// products, factorizations or solvers.
namespace colprune::oracle {

struct GridSpec {
  double angle_step = 1e-4;  // radians; 1e-2 is enough for quick checks
  bool include_reflections = true;
};

struct OrthogonalFit {
  double residual = 0.0;  // ||Y - Q Z||_F at the best grid point
  Matrix q{2, 2};
  double angle = 0.0;
  bool reflection = false;
};

// Scans Q(theta) = [[c,-s],[s,c]] (and reflections [[c,s],[s,-c]]) over a
// uniform grid of theta in [0, 2pi). Requires d_out == 2.
OrthogonalFit best_orthogonal_2d(const Matrix& y, const Matrix& z, const GridSpec& grid = {});

// Least-squares map A (d_out x d_out) with A z ~ y, solved one output row at a
// time by Householder QR of z^T. Needs z of full row rank (N >= d_out).
Matrix ols_per_row(const Matrix& y, const Matrix& z);

// Golden-section minimizer of ||y - s qz||_F over s in [0, 2||y|| / ||qz||].
// Returns 0 when qz vanishes.
double line_search_scale(const Matrix& y, const Matrix& qz, double tol = 1e-10);

Matrix naive_matmul(const Matrix& a, const Matrix& b);
double naive_frob(const Matrix& m);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns, matching values
};

// Cyclic Jacobi rotations on a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& s);

// Orthogonal polar factor M (M^T M)^{-1/2} of a square nonsingular M. Agrees
// with the Procrustes rotation U V^T without forming an SVD.
Matrix polar_orthogonal_factor(const Matrix& m);

// Layer-by-layer forward pass with explicit loops.
Matrix forward_reference(const ModelSpec& model, const Matrix& x);

}  // namespace colprune::oracle
