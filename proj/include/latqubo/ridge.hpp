#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"

namespace latqubo {

struct RidgeSolution {
  Vector weights;
  double intercept = 0.0;
  double jitter = 0.0;  // diagonal jitter the Cholesky factorization needed
};

/// Minimizes ‖y - b - A w‖² + λ‖w‖² by normal equations and Cholesky.
///
/// With `fit_intercept` the columns of A and y are centered first so b is
/// unregularized and b = mean(y) - mean(A)·w. Without it, b = 0 and the
/// system is (AᵀA + λI) w = Aᵀy.
inline RidgeSolution ridge_solve(const Matrix& a, std::span<const double> y, double lambda,
                                 bool fit_intercept = true) {
  const std::size_t n = a.rows();
  const std::size_t p = a.cols();
  if (y.size() != n) throw DimensionError("ridge: design has " + std::to_string(n) + " rows, target " +
                                          std::to_string(y.size()));
  if (n == 0) throw ValidationError("ridge: empty design");
  if (!(lambda > 0.0)) throw ValidationError("ridge: lambda must be positive");

  Vector col_mean(p, 0.0);
  double y_mean = 0.0;
  if (fit_intercept) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = a.row(i);
      for (std::size_t j = 0; j < p; ++j) col_mean[j] += r[j];
      y_mean += y[i];
    }
    for (double& v : col_mean) v /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
  }

  Matrix centered = a;
  Vector yc(y.begin(), y.end());
  if (fit_intercept) {
    for (std::size_t i = 0; i < n; ++i) {
      auto r = centered.row(i);
      for (std::size_t j = 0; j < p; ++j) r[j] -= col_mean[j];
      yc[i] -= y_mean;
    }
  }

  Matrix normal = gram(centered);
  for (std::size_t j = 0; j < p; ++j) normal(j, j) += lambda;
  const Vector rhs = matvec_transposed(centered, yc);

  auto factor = cholesky_with_jitter(normal);
  if (!factor) {
    std::ostringstream msg;
    msg << "ridge normal equations are not positive definite after jitter escalation (lambda=" << lambda
        << ", p=" << p << ")";
    throw IllConditionedError(msg.str());
  }
  RidgeSolution out;
  out.weights = cholesky_solve(factor->lower, rhs);
  out.jitter = factor->jitter;
  out.intercept = fit_intercept ? y_mean - dot(col_mean, out.weights) : 0.0;
  return out;
}

}  // namespace latqubo
