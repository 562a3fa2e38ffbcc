#pragma once

// Small dense linear algebra kernel: a row-major matrix, Cholesky with
// jitter escalation, and a cyclic Jacobi symmetric eigensolver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "latqubo/errors.hpp"

namespace latqubo {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix data size does not match shape");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& values() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vector matvec(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

/// aᵀ x
inline Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * xi;
  }
  return y;
}

/// aᵀ a, accumulated row by row over the upper triangle then mirrored.
inline Matrix gram(const Matrix& a) {
  const std::size_t p = a.cols();
  Matrix g(p, p);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const double rj = r[j];
      if (rj == 0.0) continue;
      double* gj = &g(j, 0);
      for (std::size_t k = j; k < p; ++k) gj[k] += rj * r[k];
    }
  }
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j + 1; k < p; ++k) g(k, j) = g(j, k);
  return g;
}

inline double frobenius_norm(const Matrix& a) { return norm2(a.values()); }

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

/// Lower-triangular factor L with a = L Lᵀ, or nullopt when a is not
/// numerically positive definite.
inline std::optional<Matrix> cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto lj = l.row(j);
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double djj = std::sqrt(d);
    l(j, j) = djj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const auto li = l.row(i);
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      l(i, j) = s / djj;
    }
  }
  return l;
}

/// Solves L Lᵀ x = b.
inline Vector cholesky_solve(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * y[k];
    y[ii] = s / l(ii, ii);
  }
  return y;
}

struct JitteredFactor {
  Matrix lower;
  double jitter = 0.0;  // amount added to the diagonal, 0 if none was needed
};

/// Cholesky of a symmetric positive semi-definite matrix. Tries the matrix
/// as given, then adds base·trace/n to the diagonal with base = 1e-10,
/// escalating by ×10 for up to three attempts. Returns nullopt if all fail.
inline std::optional<JitteredFactor> cholesky_with_jitter(const Matrix& a,
                                                          double base = 1e-10) {
  if (auto l = cholesky(a)) return JitteredFactor{std::move(*l), 0.0};
  const std::size_t n = a.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
  double jitter = base * std::max(trace, 1.0) / static_cast<double>(std::max<std::size_t>(n, 1));
  for (int attempt = 0; attempt < 3; ++attempt, jitter *= 10.0) {
    Matrix shifted = a;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += jitter;
    if (auto l = cholesky(shifted)) return JitteredFactor{std::move(*l), jitter};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // column i is the eigenvector for values[i]
};

enum class EigenOrder {
  value_descending,      // largest eigenvalue first
  magnitude_descending,  // largest |eigenvalue| first
};

/// Cyclic Jacobi rotations with a fixed (p, q) sweep order. Converges when
/// the off-diagonal Frobenius norm drops below `tol` times the Frobenius
/// norm of the input. Throws ConvergenceError after `max_sweeps`.
///
/// The result is unordered; see `order_eigenpairs`.
inline SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-10, int max_sweeps = 100) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("jacobi_eigen: matrix is not square");
  Matrix v = Matrix::identity(n);

  const double scale = frobenius_norm(a);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  double off = off_norm();
  while (scale > 0.0 && off > tol * scale) {
    if (sweep++ >= max_sweeps) {
      std::ostringstream msg;
      msg << "jacobi_eigen did not converge after " << max_sweeps
          << " sweeps (off-diagonal residual " << off << ")";
      throw ConvergenceError(off, msg.str());
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) /
              (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double nkp = c * akp - s * akq;
          const double nkq = s * akp + c * akq;
          a(k, p) = nkp;
          a(p, k) = nkp;
          a(k, q) = nkq;
          a(q, k) = nkq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_norm();
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = std::move(v);
  return out;
}

/// Sorts eigenpairs (stable: ties keep the lower original index first) and
/// flips each eigenvector so its largest-magnitude entry is positive (first
/// such entry on magnitude ties).
inline SymmetricEigen order_eigenpairs(const SymmetricEigen& eig, EigenOrder order) {
  const std::size_t n = eig.values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (order == EigenOrder::value_descending) return eig.values[a] > eig.values[b];
    const double ma = std::abs(eig.values[a]), mb = std::abs(eig.values[b]);
    // Equal magnitudes: the positive eigenvalue first.
    return ma != mb ? ma > mb : eig.values[a] > eig.values[b];
  });

  const std::size_t rows = eig.vectors.rows();
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(rows, n);
  for (std::size_t dst = 0; dst < n; ++dst) {
    const std::size_t src = idx[dst];
    out.values[dst] = eig.values[src];
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < rows; ++k) {
      const double mag = std::abs(eig.vectors(k, src));
      if (mag > best) {
        best = mag;
        pivot = k;
      }
    }
    const double sign = eig.vectors(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < rows; ++k) out.vectors(k, dst) = sign * eig.vectors(k, src);
  }
  return out;
}

inline SymmetricEigen symmetric_eigen(const Matrix& a, EigenOrder order) {
  return order_eigenpairs(jacobi_eigen(a), order);
}

}  // namespace latqubo
