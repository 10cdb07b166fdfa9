#include "colprune/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "colprune/error.hpp"

namespace colprune::oracle {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("naive_matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

double naive_frob(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * m(i, j);
  }
  return std::sqrt(acc);
}

namespace {

double residual_2d(const Matrix& y, const Matrix& z, double q00, double q01, double q10, double q11) {
  double acc = 0.0;
  for (std::size_t t = 0; t < z.cols(); ++t) {
    const double r0 = y(0, t) - (q00 * z(0, t) + q01 * z(1, t));
    const double r1 = y(1, t) - (q10 * z(0, t) + q11 * z(1, t));
    acc += r0 * r0 + r1 * r1;
  }
  return std::sqrt(acc);
}

}  // namespace

OrthogonalFit best_orthogonal_2d(const Matrix& y, const Matrix& z, const GridSpec& grid) {
  if (y.rows() != 2 || z.rows() != 2 || y.cols() != z.cols()) {
    throw ShapeError("best_orthogonal_2d: needs 2 x N operands of equal shape");
  }
  if (!(grid.angle_step > 0.0 && grid.angle_step < std::numbers::pi)) {
    throw ConfigError("best_orthogonal_2d: angle step must lie in (0, pi)");
  }
  OrthogonalFit best;
  best.residual = INFINITY;
  const auto steps = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / grid.angle_step));
  for (std::size_t k = 0; k < steps; ++k) {
    const double theta = static_cast<double>(k) * grid.angle_step;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (int refl = 0; refl < (grid.include_reflections ? 2 : 1); ++refl) {
      // rotation [[c,-s],[s,c]]; reflection [[c,s],[s,-c]]
      const double q01 = refl ? s : -s;
      const double q11 = refl ? -c : c;
      const double r = residual_2d(y, z, c, q01, s, q11);
      if (r < best.residual) {
        best.residual = r;
        best.angle = theta;
        best.reflection = refl != 0;
        best.q = Matrix{{c, q01}, {s, q11}};
      }
    }
  }
  return best;
}

Matrix ols_per_row(const Matrix& y, const Matrix& z) {
  if (y.rows() != z.rows() || y.cols() != z.cols()) throw ShapeError("ols_per_row: Y and Z shapes differ");
  const std::size_t n = z.cols();
  const std::size_t p = z.rows();
  if (n < p) throw ShapeError("ols_per_row: needs at least as many tokens as outputs");

  // Design matrix D = Z^T (n x p); right-hand sides B = Y^T (n x d_out).
  std::vector<std::vector<double>> d(n, std::vector<double>(p));
  std::vector<std::vector<double>> b(n, std::vector<double>(y.rows()));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < p; ++j) d[t][j] = z(j, t);
    for (std::size_t i = 0; i < y.rows(); ++i) b[t][i] = y(i, t);
  }

  double scale = 0.0;
  for (const auto& r : d) {
    for (double v : r) scale = std::max(scale, std::abs(v));
  }

  // Householder QR in place; the reflectors are applied to B as we go.
  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (std::size_t t = k; t < n; ++t) norm += d[t][k] * d[t][k];
    norm = std::sqrt(norm);
    if (norm <= 1e-12 * scale || norm == 0.0) throw SolverError("ols_per_row: Z is rank deficient");
    const double alpha = d[k][k] > 0 ? -norm : norm;
    std::vector<double> v(n - k);
    for (std::size_t t = k; t < n; ++t) v[t - k] = d[t][k];
    v[0] -= alpha;
    double vv = 0.0;
    for (double e : v) vv += e * e;
    const auto reflect = [&](auto& mat, std::size_t cols, std::size_t from) {
      for (std::size_t c = from; c < cols; ++c) {
        double dot = 0.0;
        for (std::size_t t = k; t < n; ++t) dot += v[t - k] * mat[t][c];
        const double f = 2.0 * dot / vv;
        for (std::size_t t = k; t < n; ++t) mat[t][c] -= f * v[t - k];
      }
    };
    reflect(d, p, k);
    reflect(b, y.rows(), 0);
  }

  // Back substitution R a_i = (Q^T b)_i for every output row i.
  Matrix a(y.rows(), p);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t kk = p; kk-- > 0;) {
      double acc = b[kk][i];
      for (std::size_t j = kk + 1; j < p; ++j) acc -= d[kk][j] * a(i, j);
      a(i, kk) = acc / d[kk][kk];
    }
  }
  return a;
}

double line_search_scale(const Matrix& y, const Matrix& qz, double tol) {
  if (y.rows() != qz.rows() || y.cols() != qz.cols()) throw ShapeError("line_search_scale: shapes differ");
  const double qn = naive_frob(qz);
  if (qn == 0.0) return 0.0;
  const auto objective = [&](double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i) {
      for (std::size_t j = 0; j < y.cols(); ++j) {
        const double r = y(i, j) - s * qz(i, j);
        acc += r * r;
      }
    }
    return std::sqrt(acc);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = 2.0 * naive_frob(y) / std::max(qn, 1e-300);
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  while (hi - lo > tol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }
  return 0.5 * (lo + hi);
}

SymmetricEigen symmetric_eigen(const Matrix& s) {
  const std::size_t n = s.rows();
  if (s.cols() != n) throw ShapeError("symmetric_eigen: matrix is not square");
  Matrix a = s;
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Matrix polar_orthogonal_factor(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw ShapeError("polar_orthogonal_factor: matrix is not square");
  Matrix mtm(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += m(k, i) * m(k, j);
      mtm(i, j) = acc;
    }
  }
  const SymmetricEigen e = symmetric_eigen(mtm);
  if (!(e.values.back() > 1e-14 * e.values.front())) {
    throw SolverError("polar_orthogonal_factor: matrix is singular");
  }
  // (M^T M)^{-1/2} = V diag(1/sqrt(lambda)) V^T
  Matrix inv_sqrt(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += e.vectors(i, k) * e.vectors(j, k) / std::sqrt(e.values[k]);
      inv_sqrt(i, j) = acc;
    }
  }
  return naive_matmul(m, inv_sqrt);
}

Matrix forward_reference(const ModelSpec& model, const Matrix& x) {
  Matrix h = x;
  for (const auto& layer : model.layers) {
    const std::size_t n = h.cols();
    Matrix out(layer.weight.rows(), n);
    for (std::size_t i = 0; i < layer.weight.rows(); ++i) {
      for (std::size_t t = 0; t < n; ++t) {
        double acc = layer.bias ? (*layer.bias)[i] : 0.0;
        for (std::size_t c = 0; c < layer.weight.cols(); ++c) {
          const std::size_t src = layer.input_index.empty() ? c : layer.input_index[c];
          acc += layer.weight(i, c) * h(src, t);
        }
        switch (layer.nonlinearity) {
          case Nonlinearity::none:
            break;
          case Nonlinearity::relu:
            acc = std::max(acc, 0.0);
            break;
          case Nonlinearity::gelu:
            acc = 0.5 * acc * (1.0 + std::erf(acc / std::sqrt(2.0)));
            break;
        }
        out(i, t) = acc;
      }
    }
    h = std::move(out);
  }
  return h;
}

}  // namespace colprune::oracle
