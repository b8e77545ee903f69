#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>

#include "maicfeas/common.hpp"

namespace maicfeas {

/// Dense row-major matrix of doubles. Sizes here are small (p covariates,
/// n patients), so no attempt is made at blocking or expression templates.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const Vec& data() const { return data_; }

  Vec col(std::size_t j) const {
    Vec out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  Vec row(std::size_t i) const {
    Vec out(cols_);
    for (std::size_t j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
    return out;
  }

  bool finite() const { return all_finite(data_); }

 private:
  std::size_t rows_, cols_;
  Vec data_;
};

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline Vec matvec(const Matrix& m, const Vec& x) {
  Vec y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues sorted descending; eigenvectors are the matching columns of
/// `vectors` and form an orthonormal set. Deterministic for fixed input.
struct SymmetricEigen {
  Vec values;      // descending
  Matrix vectors;  // column k pairs with values[k]
};

inline SymmetricEigen eigen_symmetric(const Matrix& a_in) {
  const std::size_t n = a_in.rows();
  Matrix a = a_in;
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-300) break;

    for (std::size_t pq = 0, p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q, ++pq) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vec diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return diag[i] > diag[j]; });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// Solves S x = b for symmetric S through its eigendecomposition, rejecting
/// matrices whose condition estimate exceeds `cond_limit`.
inline Vec solve_symmetric(const SymmetricEigen& eig, const Vec& b,
                           double cond_limit = 1e12) {
  const std::size_t n = eig.values.size();
  const double lmax = eig.values.empty() ? 0.0 : eig.values.front();
  const double lmin = eig.values.empty() ? 0.0 : eig.values.back();
  if (lmin <= 0.0 || lmax / lmin > cond_limit)
    throw SingularityError("symmetric solve: matrix is singular or ill-conditioned");

  Vec q(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += eig.vectors(i, k) * b[i];
    q[k] = s / eig.values[k];
  }
  Vec x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += eig.vectors(i, k) * q[k];
    x[i] = s;
  }
  return x;
}

inline double sample_mean(const Vec& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation with denominator n-1.
inline double sample_sd(const Vec& x) {
  const std::size_t n = x.size();
  if (n < 2) throw Error("sample_sd: need at least two observations");
  const double m = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

/// Sample covariance matrix (denominator n-1) of the columns of `y` (p x n).
inline Matrix sample_covariance(const Matrix& y) {
  const std::size_t p = y.rows(), n = y.cols();
  if (n < 2) throw Error("sample_covariance: need at least two columns");
  Vec mean(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) mean[i] = sample_mean(y.row(i));
  Matrix s(p, p);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t a = 0; a < p; ++a) {
      const double da = y(a, j) - mean[a];
      for (std::size_t b = a; b < p; ++b) s(a, b) += da * (y(b, j) - mean[b]);
    }
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      s(a, b) /= static_cast<double>(n - 1);
      s(b, a) = s(a, b);
    }
  return s;
}

/// Average ranks (1-based, ties averaged).
inline Vec average_ranks(const Vec& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  Vec ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation (Pearson correlation of average ranks).
/// Identical rank vectors short-circuit to exactly 1 so that a perfect
/// monotone relation is reported without rounding noise.
inline double spearman(const Vec& x, const Vec& y) {
  const Vec rx = average_ranks(x), ry = average_ranks(y);
  if (rx == ry) return 1.0;
  const double mx = sample_mean(rx), my = sample_mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx, dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace maicfeas
