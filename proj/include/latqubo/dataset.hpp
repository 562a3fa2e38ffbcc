#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latqubo/csv.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"
#include "latqubo/npy.hpp"
#include "latqubo/rng.hpp"

namespace latqubo {

/// Embeddings with aligned fitness labels and optional sequences / ids.
class Dataset {
 public:
  Dataset(Matrix embeddings, Vector fitness,
          std::optional<std::vector<std::string>> sequences = std::nullopt,
          std::optional<std::vector<std::string>> ids = std::nullopt)
      : embeddings_(std::move(embeddings)),
        fitness_(std::move(fitness)),
        sequences_(std::move(sequences)),
        ids_(std::move(ids)) {
    const std::size_t n = embeddings_.rows();
    if (fitness_.size() != n) {
      throw DimensionError("dataset: " + std::to_string(n) + " embedding rows but " +
                           std::to_string(fitness_.size()) + " fitness values");
    }
    if (sequences_ && sequences_->size() != n) {
      throw DimensionError("dataset: sequence count does not match embedding rows");
    }
    if (ids_ && ids_->size() != n) throw DimensionError("dataset: id count does not match embedding rows");
    for (std::size_t i = 0; i < embeddings_.values().size(); ++i) {
      if (!std::isfinite(embeddings_.values()[i])) {
        throw ValidationError("dataset: non-finite embedding value at row " +
                              std::to_string(i / std::max<std::size_t>(embeddings_.cols(), 1)));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(fitness_[i])) {
        throw ValidationError("dataset: non-finite fitness at row " + std::to_string(i));
      }
    }
  }

  std::size_t size() const noexcept { return fitness_.size(); }
  std::size_t dim() const noexcept { return embeddings_.cols(); }
  const Matrix& embeddings() const noexcept { return embeddings_; }
  const Vector& fitness() const noexcept { return fitness_; }
  const std::optional<std::vector<std::string>>& sequences() const noexcept { return sequences_; }
  const std::optional<std::vector<std::string>>& ids() const noexcept { return ids_; }

 private:
  Matrix embeddings_;
  Vector fitness_;
  std::optional<std::vector<std::string>> sequences_;
  std::optional<std::vector<std::string>> ids_;
};

/// Reads a fitness vector from `.npy`, or from a named column of a `.csv`.
inline Vector load_fitness(const std::filesystem::path& path, const std::string& column = "fitness") {
  if (path.extension() == ".csv") return read_csv_numeric_column(path, column);
  return read_npy(path).as_vector();
}

inline Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
std::vector<T> take(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

enum class SplitMode { stratified_quantile, two_stage_random };

inline std::string to_string(SplitMode mode) {
  return mode == SplitMode::stratified_quantile ? "stratified_quantile" : "two_stage_random";
}

inline SplitMode parse_split_mode(const std::string& s) {
  if (s == "stratified_quantile" || s == "stratified") return SplitMode::stratified_quantile;
  if (s == "two_stage_random" || s == "random") return SplitMode::two_stage_random;
  throw ValidationError("unknown split mode '" + s + "'");
}

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

struct SplitAssignment {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  SplitMode mode = SplitMode::stratified_quantile;
  std::uint64_t seed = 0;
};

/// Largest-remainder apportionment of `n` items over `weights` (which sum to
/// 1 within rounding). Remainder ties go to the lower category index.
inline std::vector<std::size_t> largest_remainder(std::size_t n, std::span<const double> weights) {
  std::vector<std::size_t> counts(weights.size());
  std::vector<double> remainders(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = weights[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainders[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned > n) {  // only reachable through rounding slop
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % order.size()) {
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

inline void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(v[i - 1], v[j]);
  }
}

/// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Deterministic train/validation/test split.
///
/// two_stage_random: shuffle, take ceil(test·N) for test, then
/// ceil(val/(1-test)·R) of the remaining R for validation, the rest (or
/// round(train·N) when the ratios sum below one) for training.
///
/// stratified_quantile: assign each sample to one of `n_bins` fitness-quantile
/// bins (right-closed intervals between linearly interpolated quantiles),
/// shuffle each bin, then apportion it by largest remainder.
inline SplitAssignment make_split(std::span<const double> fitness, SplitMode mode, SplitRatios ratios,
                                  std::uint64_t seed, std::size_t n_bins = 10) {
  const std::size_t n = fitness.size();
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
    throw ValidationError("split ratios must be non-negative");
  }
  const double total = ratios.train + ratios.val + ratios.test;
  if (!(total > 0.0) || total > 1.0 + 1e-9) throw ValidationError("split ratios must sum to (0, 1]");
  if (n == 0) throw ValidationError("cannot split an empty dataset");

  SplitAssignment out;
  out.mode = mode;
  out.seed = seed;
  Rng rng(seed, "split");

  if (mode == SplitMode::two_stage_random) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle_indices(perm, rng);
    const double nd = static_cast<double>(n);
    const auto n_test = std::min(n, static_cast<std::size_t>(std::ceil(ratios.test * nd - 1e-9)));
    const std::size_t rest = n - n_test;
    std::size_t n_val = 0;
    if (ratios.test < 1.0) {
      n_val = std::min(rest, static_cast<std::size_t>(std::ceil(
                                 ratios.val / (1.0 - ratios.test) * static_cast<double>(rest) - 1e-9)));
    }
    std::size_t n_train = rest - n_val;
    if (total < 1.0 - 1e-9) {
      n_train = std::min(n_train, static_cast<std::size_t>(std::llround(ratios.train * nd)));
    }
    out.test.assign(perm.begin(), perm.begin() + n_test);
    out.val.assign(perm.begin() + n_test, perm.begin() + n_test + n_val);
    out.train.assign(perm.begin() + n_test + n_val, perm.begin() + n_test + n_val + n_train);
  } else {
    if (n_bins < 1) throw ValidationError("n_bins must be at least 1");
    if (n < n_bins) {
      throw ValidationError("stratified split needs at least n_bins samples (" + std::to_string(n) +
                            " < " + std::to_string(n_bins) + ")");
    }
    Vector sorted(fitness.begin(), fitness.end());
    std::sort(sorted.begin(), sorted.end());
    Vector edges;
    for (std::size_t b = 1; b < n_bins; ++b) {
      edges.push_back(quantile_sorted(sorted, static_cast<double>(b) / static_cast<double>(n_bins)));
    }
    std::vector<std::vector<std::size_t>> bins(n_bins);
    for (std::size_t i = 0; i < n; ++i) {
      const auto b = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), fitness[i]) -
                                              edges.begin());
      bins[b].push_back(i);
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
      if (bins[b].empty()) {
        throw DegenerateStratificationError(
            "fitness quantile bin " + std::to_string(b) + " of " + std::to_string(n_bins) +
            " is empty (many tied fitness values); use fewer bins");
      }
    }
    const double weights[4] = {ratios.train, ratios.val, ratios.test, std::max(0.0, 1.0 - total)};
    for (auto& bin : bins) {
      shuffle_indices(bin, rng);
      const auto counts = largest_remainder(bin.size(), weights);
      auto it = bin.begin();
      out.train.insert(out.train.end(), it, it + counts[0]);
      it += counts[0];
      out.val.insert(out.val.end(), it, it + counts[1]);
      it += counts[1];
      out.test.insert(out.test.end(), it, it + counts[2]);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline void to_json(nlohmann::json& j, const SplitAssignment& s) {
  j = nlohmann::json{{"mode", to_string(s.mode)},
                     {"seed", s.seed},
                     {"train", s.train},
                     {"val", s.val},
                     {"test", s.test}};
}

inline void from_json(const nlohmann::json& j, SplitAssignment& s) {
  s.mode = parse_split_mode(j.at("mode").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.val = j.value("val", std::vector<std::size_t>{});
  s.test = j.value("test", std::vector<std::size_t>{});
}

}  // namespace latqubo
