#pragma once

// Sequence-level fitness oracles over dense embeddings: standardized ridge
// regression, and a Gaussian process with a constant × RBF + white-noise
// kernel whose hyperparameters are picked on a log grid by exact log
// marginal likelihood.

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"
#include "latqubo/npy.hpp"
#include "latqubo/ridge.hpp"

namespace latqubo {

/// Per-column mean and population standard deviation; zero-variance columns
/// get std 1 and are flagged.
struct Standardizer {
  Vector mean;
  Vector std;
  std::vector<bool> constant;

  static Standardizer fit(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std.assign(d, 0.0);
    s.constant.assign(d, false);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
    for (double& v : s.mean) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) s.std[j] += (x(i, j) - s.mean[j]) * (x(i, j) - s.mean[j]);
    for (std::size_t j = 0; j < d; ++j) {
      s.std[j] = std::sqrt(s.std[j] / static_cast<double>(n));
      if (!(s.std[j] > 0.0)) {
        s.std[j] = 1.0;
        s.constant[j] = true;
      }
    }
    return s;
  }

  Matrix apply(const Matrix& x) const {
    if (x.cols() != mean.size()) {
      throw DimensionError("oracle expects " + std::to_string(mean.size()) + "-dimensional embeddings, got " +
                           std::to_string(x.cols()));
    }
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto r = out.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean[j]) / std[j];
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Ridge oracle
// ---------------------------------------------------------------------------

inline constexpr double kDefaultOracleAlpha = 1.0;

struct RidgeOracle {
  Vector feature_means;
  Vector feature_stds;
  Vector weights;  // on standardized features; 0 for constant columns
  double intercept = 0.0;
  double alpha = kDefaultOracleAlpha;

  std::size_t dim() const noexcept { return weights.size(); }
};

/// Standardize, then ridge with an unregularized intercept. Constant columns
/// are left out of the solve and keep weight 0; a warning goes to `warn`.
inline RidgeOracle fit_ridge_oracle(const Matrix& x, std::span<const double> y, double alpha = kDefaultOracleAlpha,
                                    std::ostream* warn = &std::cerr) {
  if (x.rows() < 2) throw ValidationError("fit_ridge_oracle needs N >= 2");
  if (y.size() != x.rows()) throw LengthMismatchError("fit_ridge_oracle: embeddings and fitness differ in length");
  const auto s = Standardizer::fit(x);
  const Matrix z = s.apply(x);

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    if (!s.constant[j]) active.push_back(j);
  }
  if (warn && active.size() < x.cols()) {
    *warn << "warning: " << (x.cols() - active.size())
          << " zero-variance embedding column(s) excluded from the ridge oracle\n";
  }

  RidgeOracle o;
  o.feature_means = s.mean;
  o.feature_stds = s.std;
  o.alpha = alpha;
  o.weights.assign(x.cols(), 0.0);
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(y.size());
  o.intercept = y_mean;
  if (active.empty()) return o;

  Matrix design(x.rows(), active.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t a = 0; a < active.size(); ++a) design(i, a) = z(i, active[a]);
  const auto sol = ridge_solve(design, y, alpha, true);
  for (std::size_t a = 0; a < active.size(); ++a) o.weights[active[a]] = sol.weights[a];
  o.intercept = sol.intercept;
  return o;
}

inline Vector predict_oracle(const RidgeOracle& o, const Matrix& x) {
  if (x.cols() != o.dim()) {
    throw DimensionError("ridge oracle expects " + std::to_string(o.dim()) + "-dimensional embeddings, got " +
                         std::to_string(x.cols()));
  }
  Vector out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double acc = o.intercept;
    for (std::size_t j = 0; j < x.cols(); ++j) acc += o.weights[j] * (x(i, j) - o.feature_means[j]) / o.feature_stds[j];
    out[i] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian-process oracle
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultGpCapacity = 2000;

struct GpParams {
  double signal_variance = 1.0;  // C
  double length_scale = 1.0;     // ℓ
  double noise_variance = 1e-5;  // σ_n²
};

/// n points log-spaced over [lo, hi], endpoints exact.
inline Vector log_grid(double lo, double hi, std::size_t n) {
  if (n == 1) return {lo};
  Vector out(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1.0));
  out.front() = lo;
  out.back() = hi;
  return out;
}

struct GpGrid {
  Vector signal_variance = log_grid(1e-3, 1e3, 5);
  Vector length_scale = log_grid(1e-3, 1e3, 5);
  Vector noise_variance = log_grid(1e-6, 1e1, 5);

  std::size_t size() const noexcept { return signal_variance.size() * length_scale.size() * noise_variance.size(); }
};

struct GpOracle {
  Vector feature_means;
  Vector feature_stds;
  Matrix inputs;  // standardized training inputs, N × d
  double target_mean = 0.0;
  double target_std = 1.0;
  GpParams params;
  Matrix factor;        // lower Cholesky factor of K + (σ_n² + jitter) I
  Vector alpha_vector;  // (K + σ_n² I)⁻¹ y on normalized targets
  double jitter = 0.0;
  double log_marginal_likelihood = 0.0;

  std::size_t dim() const noexcept { return inputs.cols(); }
  std::size_t size() const noexcept { return inputs.rows(); }
};

namespace gp_detail {

inline Matrix squared_distances(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const double d = a(i, k) - b(j, k);
        s += d * d;
      }
      out(i, j) = s;
    }
  return out;
}

struct Candidate {
  GpParams params;
  Matrix factor;
  Vector alpha;
  double jitter = 0.0;
  double lml = -std::numeric_limits<double>::infinity();
};

/// Exact LML = -½ yᵀα - Σ log L_ii - (n/2) log 2π; empty on Cholesky failure.
inline std::optional<Candidate> evaluate(const Matrix& sq, std::span<const double> y, const GpParams& p) {
  const std::size_t n = sq.rows();
  Matrix k(n, n);
  const double inv = 1.0 / (2.0 * p.length_scale * p.length_scale);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i, j) = p.signal_variance * std::exp(-sq(i, j) * inv);
  for (std::size_t i = 0; i < n; ++i) k(i, i) += p.noise_variance;
  auto f = cholesky_with_jitter(k);
  if (!f) return std::nullopt;
  Candidate c;
  c.params = p;
  c.alpha = cholesky_solve(f->lower, y);
  double log_det = 0.0;
  for (std::size_t i = 0; i < n; ++i) log_det += std::log(f->lower(i, i));
  c.lml = -0.5 * dot(y, c.alpha) - log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(c.lml)) return std::nullopt;
  c.factor = std::move(f->lower);
  c.jitter = f->jitter;
  return c;
}

}  // namespace gp_detail

/// Grid order is signal variance outermost, then length scale, then noise;
/// the first grid point reaching the maximum LML wins.
inline GpOracle fit_gp_oracle(const Matrix& x, std::span<const double> y, const GpGrid& grid = {},
                              std::size_t capacity = kDefaultGpCapacity) {
  const std::size_t n = x.rows();
  if (n < 2) throw ValidationError("fit_gp_oracle needs N >= 2");
  if (y.size() != n) throw LengthMismatchError("fit_gp_oracle: embeddings and fitness differ in length");
  if (n > capacity) {
    throw CapacityError("GP oracle capacity is " + std::to_string(capacity) + " points, got " + std::to_string(n) +
                        "; subsample the training set or use the ridge oracle");
  }
  if (grid.size() == 0) throw ValidationError("fit_gp_oracle: empty hyperparameter grid");
  auto within = [](const Vector& v, double lo, double hi, const char* name) {
    for (double a : v)
      if (!(a >= lo && a <= hi)) throw ValidationError(std::string("GP ") + name + " outside its bounds");
  };
  within(grid.signal_variance, 1e-3, 1e3, "signal variance");
  within(grid.length_scale, 1e-3, 1e3, "length scale");
  within(grid.noise_variance, 1e-6, 1e1, "noise variance");

  const auto s = Standardizer::fit(x);
  GpOracle o;
  o.feature_means = s.mean;
  o.feature_stds = s.std;
  o.inputs = s.apply(x);

  for (double v : y) o.target_mean += v;
  o.target_mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : y) ss += (v - o.target_mean) * (v - o.target_mean);
  o.target_std = std::sqrt(ss / static_cast<double>(n));
  if (!(o.target_std > 0.0)) o.target_std = 1.0;
  Vector yn(n);
  for (std::size_t i = 0; i < n; ++i) yn[i] = (y[i] - o.target_mean) / o.target_std;

  const Matrix sq = gp_detail::squared_distances(o.inputs, o.inputs);
  std::optional<gp_detail::Candidate> best;
  for (double c : grid.signal_variance)
    for (double l : grid.length_scale)
      for (double noise : grid.noise_variance) {
        auto cand = gp_detail::evaluate(sq, yn, {c, l, noise});
        if (cand && (!best || cand->lml > best->lml)) best = std::move(cand);
      }
  if (!best) throw IllConditionedError("GP oracle: every grid point failed Cholesky factorization");
  o.params = best->params;
  o.factor = std::move(best->factor);
  o.alpha_vector = std::move(best->alpha);
  o.jitter = best->jitter;
  o.log_marginal_likelihood = best->lml;
  return o;
}

inline Vector predict_oracle(const GpOracle& o, const Matrix& x) {
  if (x.cols() != o.dim()) {
    throw DimensionError("GP oracle expects " + std::to_string(o.dim()) + "-dimensional embeddings, got " +
                         std::to_string(x.cols()));
  }
  const Standardizer s{o.feature_means, o.feature_stds, {}};
  const Matrix sq = gp_detail::squared_distances(s.apply(x), o.inputs);
  const double inv = 1.0 / (2.0 * o.params.length_scale * o.params.length_scale);
  Vector out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < o.size(); ++j) acc += o.params.signal_variance * std::exp(-sq(i, j) * inv) * o.alpha_vector[j];
    out[i] = acc * o.target_std + o.target_mean;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Either oracle
// ---------------------------------------------------------------------------

enum class OracleKind { ridge, gp };

inline std::string to_string(OracleKind k) { return k == OracleKind::ridge ? "ridge" : "gp"; }

inline OracleKind parse_oracle_kind(const std::string& s) {
  if (s == "ridge") return OracleKind::ridge;
  if (s == "gp") return OracleKind::gp;
  throw ValidationError("unknown oracle kind '" + s + "' (expected ridge or gp)");
}

using Oracle = std::variant<RidgeOracle, GpOracle>;

inline OracleKind kind_of(const Oracle& o) {
  return std::holds_alternative<RidgeOracle>(o) ? OracleKind::ridge : OracleKind::gp;
}

inline Vector predict_oracle(const Oracle& o, const Matrix& x) {
  return std::visit([&](const auto& v) { return predict_oracle(v, x); }, o);
}

struct OracleSettings {
  OracleKind kind = OracleKind::ridge;
  double alpha = kDefaultOracleAlpha;
  GpGrid grid;
  std::size_t capacity = kDefaultGpCapacity;
};

inline Oracle fit_oracle(const Matrix& x, std::span<const double> y, const OracleSettings& s,
                         std::ostream* warn = &std::cerr) {
  if (s.kind == OracleKind::ridge) return fit_ridge_oracle(x, y, s.alpha, warn);
  return fit_gp_oracle(x, y, s.grid, s.capacity);
}

// ---------------------------------------------------------------------------
// Serialization: ridge as a single JSON document; GP as JSON plus two NPY
// files (Cholesky factor and standardized inputs) next to it.
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const RidgeOracle& o) {
  j = nlohmann::json{{"kind", "ridge"},
                     {"alpha", o.alpha},
                     {"intercept", o.intercept},
                     {"weights", o.weights},
                     {"feature_means", o.feature_means},
                     {"feature_stds", o.feature_stds}};
}

inline void from_json(const nlohmann::json& j, RidgeOracle& o) {
  o.alpha = j.at("alpha").get<double>();
  o.intercept = j.at("intercept").get<double>();
  o.weights = j.at("weights").get<Vector>();
  o.feature_means = j.at("feature_means").get<Vector>();
  o.feature_stds = j.at("feature_stds").get<Vector>();
  if (o.feature_means.size() != o.weights.size() || o.feature_stds.size() != o.weights.size()) {
    throw DimensionError("ridge oracle JSON: vector lengths disagree");
  }
}

inline void save_oracle(const std::filesystem::path& json_path, const Oracle& oracle) {
  nlohmann::json j;
  if (const auto* r = std::get_if<RidgeOracle>(&oracle)) {
    j = *r;
  } else {
    const auto& g = std::get<GpOracle>(oracle);
    const auto stem = json_path.stem().string();
    const auto factor_file = stem + ".factor.npy";
    const auto inputs_file = stem + ".inputs.npy";
    write_npy(json_path.parent_path() / factor_file, g.factor);
    write_npy(json_path.parent_path() / inputs_file, g.inputs);
    j = nlohmann::json{{"kind", "gp"},
                       {"signal_variance", g.params.signal_variance},
                       {"length_scale", g.params.length_scale},
                       {"noise_variance", g.params.noise_variance},
                       {"jitter", g.jitter},
                       {"log_marginal_likelihood", g.log_marginal_likelihood},
                       {"target_mean", g.target_mean},
                       {"target_std", g.target_std},
                       {"feature_means", g.feature_means},
                       {"feature_stds", g.feature_stds},
                       {"alpha_vector", g.alpha_vector},
                       {"factor_file", factor_file},
                       {"inputs_file", inputs_file}};
  }
  write_file_bytes(json_path, j.dump(2) + "\n");
}

inline Oracle load_oracle(const std::filesystem::path& json_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(json_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("oracle file " + json_path.string() + " is not valid JSON: " + e.what());
  }
  const auto kind = parse_oracle_kind(j.at("kind").get<std::string>());
  if (kind == OracleKind::ridge) return j.get<RidgeOracle>();
  GpOracle g;
  g.params = {j.at("signal_variance").get<double>(), j.at("length_scale").get<double>(),
              j.at("noise_variance").get<double>()};
  g.jitter = j.value("jitter", 0.0);
  g.log_marginal_likelihood = j.value("log_marginal_likelihood", 0.0);
  g.target_mean = j.at("target_mean").get<double>();
  g.target_std = j.at("target_std").get<double>();
  g.feature_means = j.at("feature_means").get<Vector>();
  g.feature_stds = j.at("feature_stds").get<Vector>();
  g.alpha_vector = j.at("alpha_vector").get<Vector>();
  g.factor = read_npy(json_path.parent_path() / j.at("factor_file").get<std::string>()).as_matrix();
  g.inputs = read_npy(json_path.parent_path() / j.at("inputs_file").get<std::string>()).as_matrix();
  if (g.inputs.rows() != g.alpha_vector.size() || g.inputs.cols() != g.feature_means.size()) {
    throw DimensionError("GP oracle files disagree on N or d");
  }
  return g;
}

}  // namespace latqubo
