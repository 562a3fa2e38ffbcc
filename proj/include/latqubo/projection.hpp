#pragma once

// Dense embedding -> binary latent code: a linear projection (PCA or Gaussian
// random) followed by per-dimension median thresholding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latqubo/codes.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"
#include "latqubo/rng.hpp"

namespace latqubo {

enum class ProjectionKind { pca, random_gaussian };

inline std::string to_string(ProjectionKind k) { return k == ProjectionKind::pca ? "pca" : "random_gaussian"; }

inline ProjectionKind parse_projection_kind(const std::string& s) {
  if (s == "pca") return ProjectionKind::pca;
  if (s == "random_gaussian" || s == "random" || s == "random_projection") return ProjectionKind::random_gaussian;
  throw ValidationError("unknown projection kind '" + s + "'");
}

struct ProjectionModel {
  ProjectionKind kind = ProjectionKind::pca;
  Matrix weights;      // m × d, rows are projection directions
  Vector mean;         // length d; zero for random projections
  Vector thresholds;   // length m once fitted
  std::optional<Vector> explained_variance;  // pca only, non-increasing
  std::uint64_t seed = 0;                    // random_gaussian only

  std::size_t latent_dim() const noexcept { return weights.rows(); }
  std::size_t input_dim() const noexcept { return weights.cols(); }
  bool has_thresholds() const noexcept { return thresholds.size() == latent_dim(); }
};

/// Top-m principal directions of the unbiased sample covariance, largest
/// eigenvalue first, each with its largest-magnitude entry positive.
inline ProjectionModel fit_pca(const Matrix& x, std::size_t m) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw DimensionError("fit_pca needs at least 2 samples");
  if (m < 1 || m > std::min(n - 1, d)) {
    throw DimensionError("fit_pca: m=" + std::to_string(m) + " must lie in [1, min(N-1, d)] = [1, " +
                         std::to_string(std::min(n - 1, d)) + "]");
  }

  ProjectionModel model;
  model.kind = ProjectionKind::pca;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += r[j];
  }
  for (double& v : model.mean) v /= static_cast<double>(n);

  Matrix centered = x;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = centered.row(i);
    for (std::size_t j = 0; j < d; ++j) r[j] -= model.mean[j];
  }
  Matrix cov = gram(centered);
  for (double& v : cov.values()) v /= static_cast<double>(n - 1);

  const auto eig = symmetric_eigen(cov, EigenOrder::value_descending);
  model.weights = Matrix(m, d);
  Vector variance(m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < d; ++j) model.weights(k, j) = eig.vectors(j, k);
    variance[k] = std::max(0.0, eig.values[k]);
  }
  model.explained_variance = std::move(variance);
  return model;
}

/// Entries i.i.d. N(0, 1/d) from the library's Rng stream tagged
/// "random_projection", filled row by row.
inline ProjectionModel fit_random_projection(std::size_t d, std::size_t m, std::uint64_t seed) {
  if (d < 1 || m < 1) throw DimensionError("fit_random_projection: d and m must be positive");
  ProjectionModel model;
  model.kind = ProjectionKind::random_gaussian;
  model.seed = seed;
  model.mean.assign(d, 0.0);
  model.weights = Matrix(m, d);
  Rng rng(seed, "random_projection");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& w : model.weights.values()) w = scale * rng.normal();
  return model;
}

/// z = W (e - mean) for every row of x; N × m.
inline Matrix project(const ProjectionModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) {
    throw DimensionError("projection expects " + std::to_string(model.input_dim()) +
                         "-dimensional embeddings, got " + std::to_string(x.cols()));
  }
  const std::size_t m = model.latent_dim();
  const std::size_t d = model.input_dim();
  Matrix z(x.rows(), m);
  Vector centered(d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - model.mean[j];
    for (std::size_t k = 0; k < m; ++k) z(i, k) = dot(model.weights.row(k), centered);
  }
  return z;
}

/// Median; even counts average the two middle order statistics.
inline double median(Vector v) {
  if (v.empty()) throw ValidationError("median of an empty sample");
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline Vector column_medians(const Matrix& z) {
  Vector tau(z.cols());
  Vector col(z.rows());
  for (std::size_t k = 0; k < z.cols(); ++k) {
    for (std::size_t i = 0; i < z.rows(); ++i) col[i] = z(i, k);
    tau[k] = median(col);
  }
  return tau;
}

inline ProjectionModel fit_thresholds(ProjectionModel model, const Matrix& training) {
  if (training.rows() == 0) throw ValidationError("fit_thresholds needs a non-empty training set");
  model.thresholds = column_medians(project(model, training));
  return model;
}

/// Bit k is 1 iff z_k > τ_k; a value equal to its threshold maps to 0.
inline BinaryCodeSet binarize_projected(const Matrix& z, std::span<const double> thresholds) {
  if (thresholds.size() != z.cols()) throw DimensionError("threshold count does not match projection width");
  BinaryCodeSet codes(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t k = 0; k < z.cols(); ++k) codes.set(i, k, z(i, k) > thresholds[k]);
  return codes;
}

inline BinaryCodeSet binarize(const ProjectionModel& model, const Matrix& x) {
  if (!model.has_thresholds()) throw ValidationError("binarize: projection thresholds are not fitted");
  return binarize_projected(project(model, x), model.thresholds);
}

// ---------------------------------------------------------------------------
// Latent-quality diagnostics
// ---------------------------------------------------------------------------

/// Shannon entropy (bits) of a Bernoulli(p) variable.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct LatentDiagnostics {
  Vector per_bit_entropy;
  double mean_entropy = 0.0;
  std::size_t active_dims = 0;
  std::optional<double> reconstruction_mse;
};

inline constexpr double kDefaultEntropyFloor = 0.01;

inline LatentDiagnostics latent_diagnostics(const BinaryCodeSet& codes,
                                            double entropy_floor = kDefaultEntropyFloor) {
  if (codes.empty()) throw ValidationError("latent_diagnostics needs at least one code");
  LatentDiagnostics out;
  const std::size_t n = codes.size();
  const std::size_t m = codes.dim();
  out.per_bit_entropy.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) ones += codes(i, k);
    const double h = binary_entropy(static_cast<double>(ones) / static_cast<double>(n));
    out.per_bit_entropy[k] = h;
    out.mean_entropy += h;
    if (h > entropy_floor) ++out.active_dims;
  }
  if (m > 0) out.mean_entropy /= static_cast<double>(m);
  return out;
}

/// Mean squared error between x and mean + Wᵀ W (x - mean), over all N·d
/// entries.
inline double reconstruction_mse(const ProjectionModel& model, const Matrix& x) {
  const Matrix z = project(model, x);
  const std::size_t d = model.input_dim();
  double sse = 0.0;
  Vector recon(d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    recon = model.mean;
    for (std::size_t k = 0; k < model.latent_dim(); ++k) {
      const double zk = z(i, k);
      const auto w = model.weights.row(k);
      for (std::size_t j = 0; j < d; ++j) recon[j] += zk * w[j];
    }
    const auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) sse += (r[j] - recon[j]) * (r[j] - recon[j]);
  }
  return sse / static_cast<double>(x.rows() * d);
}

inline LatentDiagnostics latent_diagnostics(const BinaryCodeSet& codes, const ProjectionModel& model,
                                            const Matrix& embeddings,
                                            double entropy_floor = kDefaultEntropyFloor) {
  auto out = latent_diagnostics(codes, entropy_floor);
  if (model.kind == ProjectionKind::pca) out.reconstruction_mse = reconstruction_mse(model, embeddings);
  return out;
}

inline void to_json(nlohmann::json& j, const LatentDiagnostics& d) {
  j = nlohmann::json{{"per_bit_entropy", d.per_bit_entropy},
                     {"mean_entropy", d.mean_entropy},
                     {"active_dims", d.active_dims}};
  j["reconstruction_mse"] = d.reconstruction_mse ? nlohmann::json(*d.reconstruction_mse) : nlohmann::json();
}

inline void to_json(nlohmann::json& j, const ProjectionModel& p) {
  j = nlohmann::json{{"kind", to_string(p.kind)},
                     {"m", p.latent_dim()},
                     {"d", p.input_dim()},
                     {"weights", p.weights.values()},
                     {"mean", p.mean},
                     {"thresholds", p.thresholds},
                     {"seed", p.seed}};
  j["explained_variance"] = p.explained_variance ? nlohmann::json(*p.explained_variance) : nlohmann::json();
}

inline void from_json(const nlohmann::json& j, ProjectionModel& p) {
  p.kind = parse_projection_kind(j.at("kind").get<std::string>());
  const auto m = j.at("m").get<std::size_t>();
  const auto d = j.at("d").get<std::size_t>();
  p.weights = Matrix(m, d, j.at("weights").get<std::vector<double>>());
  p.mean = j.at("mean").get<Vector>();
  p.thresholds = j.value("thresholds", Vector{});
  p.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("explained_variance") && !j["explained_variance"].is_null()) {
    p.explained_variance = j["explained_variance"].get<Vector>();
  } else {
    p.explained_variance.reset();
  }
  if (p.mean.size() != d) throw DimensionError("projection JSON: mean length does not match d");
  if (!p.thresholds.empty() && p.thresholds.size() != m) {
    throw DimensionError("projection JSON: threshold count does not match m");
  }
}

}  // namespace latqubo
