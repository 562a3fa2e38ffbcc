#pragma once

// The QUBO surrogate f(x) = c + hᵀx + ½ xᵀJx over binary latent codes:
// feature construction, ridge fit, evaluation, and serialization.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "latqubo/codes.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"
#include "latqubo/ridge.hpp"

namespace latqubo {

inline constexpr double kDefaultSurrogateLambda = 1e-3;

/// Linear features x_1..x_m followed by the products x_k x_l (k < l) in
/// lexicographic pair order.
class FeatureMap {
 public:
  explicit FeatureMap(std::size_t m) : m_(m) {
    pairs_.reserve(m * (m - (m > 0)) / 2);
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t l = k + 1; l < m; ++l) pairs_.emplace_back(k, l);
  }

  static constexpr std::size_t feature_count(std::size_t m) noexcept { return m + m * (m - (m > 0)) / 2; }

  std::size_t latent_dim() const noexcept { return m_; }
  std::size_t size() const noexcept { return m_ + pairs_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const noexcept { return pairs_; }

  /// Writes φ(x) into `out` (length size()).
  void features(std::span<const std::uint8_t> x, std::span<double> out) const {
    for (std::size_t k = 0; k < m_; ++k) out[k] = x[k];
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      out[m_ + i] = static_cast<double>(x[pairs_[i].first] & x[pairs_[i].second]);
    }
  }

  Vector features(std::span<const std::uint8_t> x) const {
    Vector out(size());
    features(x, out);
    return out;
  }

 private:
  std::size_t m_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

/// Design matrix Φ, one row φ(x_i) per code.
inline Matrix build_features(const BinaryCodeSet& codes) {
  if (codes.dim() < 1) throw DimensionError("build_features: m must be at least 1");
  const FeatureMap map(codes.dim());
  Matrix phi(codes.size(), map.size());
  for (std::size_t i = 0; i < codes.size(); ++i) map.features(codes.row(i), phi.row(i));
  return phi;
}

struct QuboModel {
  Vector h;
  Matrix J;  // symmetric; zero diagonal unless produced by low-rank truncation
  double intercept = 0.0;
  double lambda = 0.0;

  std::size_t dim() const noexcept { return h.size(); }

  static QuboModel zeros(std::size_t m) {
    QuboModel q;
    q.h.assign(m, 0.0);
    q.J = Matrix(m, m);
    return q;
  }

  bool has_zero_diagonal() const {
    for (std::size_t k = 0; k < dim(); ++k)
      if (J(k, k) != 0.0) return false;
    return true;
  }

  /// Throws unless J is m × m and exactly symmetric (and, unless allowed,
  /// has an exactly zero diagonal).
  void validate(bool allow_diagonal = false) const {
    const std::size_t m = dim();
    if (J.rows() != m || J.cols() != m) throw DimensionError("QUBO: J must be m × m with m = |h|");
    for (std::size_t k = 0; k < m; ++k) {
      if (!allow_diagonal && J(k, k) != 0.0) throw ValidationError("QUBO: J has a nonzero diagonal");
      for (std::size_t l = k + 1; l < m; ++l)
        if (J(k, l) != J(l, k)) throw ValidationError("QUBO: J is not symmetric");
    }
  }

  /// Unary coefficient seen by bit k once x_k² = x_k folds the diagonal in.
  double effective_unary(std::size_t k) const { return h[k] + 0.5 * J(k, k); }
};

/// hᵀx + ½ xᵀJx, i.e. the surrogate without its intercept.
inline double predict_centered(const QuboModel& q, std::span<const std::uint8_t> x) {
  const std::size_t m = q.dim();
  if (x.size() != m) {
    throw DimensionError("predict: code has " + std::to_string(x.size()) + " bits, model has " +
                         std::to_string(m));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (!x[k]) continue;
    s += q.effective_unary(k);
    const auto jk = q.J.row(k);
    for (std::size_t l = k + 1; l < m; ++l)
      if (x[l]) s += jk[l];
  }
  return s;
}

/// c + hᵀx + ½ xᵀJx.
inline double predict(const QuboModel& q, std::span<const std::uint8_t> x) {
  return q.intercept + predict_centered(q, x);
}

/// Weight vector [h, J_upper] in FeatureMap order.
inline Vector pack_weights(const QuboModel& q) {
  const FeatureMap map(q.dim());
  Vector w(map.size());
  for (std::size_t k = 0; k < q.dim(); ++k) w[k] = q.h[k];
  for (std::size_t i = 0; i < map.pairs().size(); ++i) {
    const auto [k, l] = map.pairs()[i];
    w[q.dim() + i] = q.J(k, l);
  }
  return w;
}

inline QuboModel unpack_weights(std::size_t m, std::span<const double> w, double intercept = 0.0,
                                double lambda = 0.0) {
  const FeatureMap map(m);
  if (w.size() != map.size()) throw DimensionError("unpack_weights: expected " + std::to_string(map.size()) +
                                                   " weights, got " + std::to_string(w.size()));
  QuboModel q = QuboModel::zeros(m);
  q.intercept = intercept;
  q.lambda = lambda;
  for (std::size_t k = 0; k < m; ++k) q.h[k] = w[k];
  for (std::size_t i = 0; i < map.pairs().size(); ++i) {
    const auto [k, l] = map.pairs()[i];
    q.J(k, l) = w[m + i];
    q.J(l, k) = w[m + i];
  }
  return q;
}

struct SurrogateOptions {
  double lambda = kDefaultSurrogateLambda;
  bool fit_intercept = true;
};

/// Ridge fit of the QUBO coefficients on (codes, fitness). The intercept is
/// unregularized and kept out of h and J.
inline QuboModel fit_ridge(const BinaryCodeSet& codes, std::span<const double> fitness,
                           SurrogateOptions options = {}) {
  if (codes.empty()) throw ValidationError("fit_ridge needs at least one code");
  if (fitness.size() != codes.size()) throw DimensionError("fit_ridge: fitness length does not match codes");
  const Matrix phi = build_features(codes);
  const auto sol = ridge_solve(phi, fitness, options.lambda, options.fit_intercept);
  return unpack_weights(codes.dim(), sol.weights, sol.intercept, options.lambda);
}

inline QuboModel fit_ridge(const BinaryCodeSet& codes, std::span<const double> fitness, double lambda) {
  return fit_ridge(codes, fitness, SurrogateOptions{lambda, true});
}

// ---------------------------------------------------------------------------
// Regression metrics
// ---------------------------------------------------------------------------

struct RegressionMetrics {
  double spearman = 0.0;
  double pearson = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  bool degenerate = false;  // a constant input made a correlation undefined; reported as 0
};

/// Ranks starting at 1; tied values share their average rank.
inline Vector average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  Vector ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Pearson correlation; nullopt when either input has zero variance.
inline std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline RegressionMetrics regression_metrics(std::span<const double> predictions,
                                            std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw DimensionError("regression_metrics: length mismatch");
  if (predictions.empty()) throw ValidationError("regression_metrics: empty input");
  const std::size_t n = targets.size();
  RegressionMetrics out;

  const auto pearson = pearson_correlation(predictions, targets);
  const auto rp = average_ranks(predictions);
  const auto rt = average_ranks(targets);
  const auto spearman = pearson_correlation(rp, rt);
  out.pearson = pearson.value_or(0.0);
  out.spearman = spearman.value_or(0.0);
  out.degenerate = !pearson || !spearman;

  double sse = 0.0, sae = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = predictions[i] - targets[i];
    sse += e * e;
    sae += std::abs(e);
  }
  out.rmse = std::sqrt(sse / static_cast<double>(n));
  out.mae = sae / static_cast<double>(n);
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  double sst = 0.0;
  for (double t : targets) sst += (t - mean) * (t - mean);
  if (sst > 0.0) {
    out.r2 = 1.0 - sse / sst;
  } else {
    out.r2 = sse == 0.0 ? 1.0 : 0.0;
    out.degenerate = true;
  }
  return out;
}

inline void to_json(nlohmann::json& j, const RegressionMetrics& m) {
  j = nlohmann::json{{"spearman", m.spearman}, {"pearson", m.pearson}, {"rmse", m.rmse},
                     {"mae", m.mae},           {"r2", m.r2},           {"degenerate", m.degenerate}};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// {m, lambda, intercept, h, J_upper}; J_upper is the strict upper triangle
/// row-major. A nonzero diagonal (truncated models only) is written as
/// J_diag.
inline void to_json(nlohmann::json& j, const QuboModel& q) {
  const std::size_t m = q.dim();
  Vector upper;
  upper.reserve(m * (m - (m > 0)) / 2);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l) upper.push_back(q.J(k, l));
  j = nlohmann::json{{"m", m}, {"lambda", q.lambda}, {"intercept", q.intercept}, {"h", q.h}, {"J_upper", upper}};
  if (!q.has_zero_diagonal()) {
    Vector diag(m);
    for (std::size_t k = 0; k < m; ++k) diag[k] = q.J(k, k);
    j["J_diag"] = diag;
  }
}

inline void from_json(const nlohmann::json& j, QuboModel& q) {
  const auto m = j.at("m").get<std::size_t>();
  q.h = j.at("h").get<Vector>();
  if (q.h.size() != m) throw DimensionError("QUBO JSON: |h| does not match m");
  const auto upper = j.at("J_upper").get<Vector>();
  if (upper.size() != m * (m - (m > 0)) / 2) throw DimensionError("QUBO JSON: J_upper has the wrong length");
  q.J = Matrix(m, m);
  std::size_t i = 0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l, ++i) {
      q.J(k, l) = upper[i];
      q.J(l, k) = upper[i];
    }
  if (j.contains("J_diag")) {
    const auto diag = j["J_diag"].get<Vector>();
    if (diag.size() != m) throw DimensionError("QUBO JSON: J_diag has the wrong length");
    for (std::size_t k = 0; k < m; ++k) q.J(k, k) = diag[k];
  }
  q.intercept = j.value("intercept", 0.0);
  q.lambda = j.value("lambda", 0.0);
}

/// Coefficient list for external minimizing QUBO/Ising solvers: one
/// `i j coeff` line per term with i == j for unary terms and i < j for
/// pairs. Coefficients are those of the energy E(x) = -(f(x) - c), so
/// minimizing E maximizes the surrogate. The intercept c is not exported.
inline std::string export_qubo_text(const QuboModel& q) {
  std::string out;
  char buf[96];
  const std::size_t m = q.dim();
  for (std::size_t k = 0; k < m; ++k) {
    std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", k, k, -q.effective_unary(k) + 0.0);
    out += buf;
  }
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l) {
      std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", k, l, -q.J(k, l) + 0.0);
      out += buf;
    }
  return out;
}

}  // namespace latqubo
