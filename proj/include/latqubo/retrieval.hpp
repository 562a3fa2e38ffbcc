#pragma once

// Decoding optimized codes by Hamming nearest-neighbour retrieval over the
// training set, plus the per-run and aggregate benchmark metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "latqubo/codes.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/optimizers.hpp"
#include "latqubo/qubo.hpp"

namespace latqubo {

/// Immutable training index: packed codes, fitness, optional sequences.
class RetrievalIndex {
 public:
  RetrievalIndex(const BinaryCodeSet& codes, Vector fitness,
                 std::optional<std::vector<std::string>> sequences = std::nullopt)
      : m_(codes.dim()), words_(words_for(codes.dim())), fitness_(std::move(fitness)),
        sequences_(std::move(sequences)), codes_(codes) {
    if (fitness_.size() != codes.size()) {
      throw LengthMismatchError("retrieval index: " + std::to_string(codes.size()) + " codes but " +
                                std::to_string(fitness_.size()) + " fitness values");
    }
    if (sequences_ && sequences_->size() != codes.size()) {
      throw LengthMismatchError("retrieval index: sequence count does not match code count");
    }
    packed_.reserve(codes.size() * words_);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const auto w = pack_code(codes.row(i));
      packed_.insert(packed_.end(), w.begin(), w.end());
    }
  }

  std::size_t size() const noexcept { return fitness_.size(); }
  std::size_t dim() const noexcept { return m_; }
  const Vector& fitness() const noexcept { return fitness_; }
  const BinaryCodeSet& codes() const noexcept { return codes_; }
  const std::optional<std::vector<std::string>>& sequences() const noexcept { return sequences_; }

  std::span<const std::uint64_t> packed(std::size_t i) const { return {packed_.data() + i * words_, words_}; }

 private:
  std::size_t m_;
  std::size_t words_;
  Vector fitness_;
  std::optional<std::vector<std::string>> sequences_;
  BinaryCodeSet codes_;
  std::vector<std::uint64_t> packed_;
};

struct Neighbor {
  std::size_t index = 0;
  std::size_t distance = 0;
  double fitness = 0.0;
};

/// Linear popcount scan; ties go to the lowest training index.
inline Neighbor nearest_neighbor(const RetrievalIndex& index, std::span<const std::uint8_t> query) {
  if (index.size() == 0) throw ValidationError("nearest_neighbor: empty index");
  if (query.size() != index.dim()) {
    throw DimensionError("nearest_neighbor: query has " + std::to_string(query.size()) + " bits, index has " +
                         std::to_string(index.dim()));
  }
  const auto q = pack_code(query);
  Neighbor best{0, std::numeric_limits<std::size_t>::max(), 0.0};
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::size_t d = hamming_packed(q, index.packed(i));
    if (d < best.distance) {
      best.index = i;
      best.distance = d;
      if (d == 0) break;
    }
  }
  best.fitness = index.fitness()[best.index];
  return best;
}

/// 100 · (#below + ½ #equal) / N.
inline double fitness_percentile(std::span<const double> training, double value) {
  if (training.empty()) throw ValidationError("percentile of an empty reference set");
  double below = 0.0;
  double equal = 0.0;
  for (double t : training) {
    if (t < value) below += 1.0;
    else if (t == value) equal += 1.0;
  }
  return 100.0 * (below + 0.5 * equal) / static_cast<double>(training.size());
}

/// One returned code after decoding. `nn_index` identifies the decoded
/// design when no sequence is known.
struct DecodedCandidate {
  Code code;
  double surrogate_value = 0.0;
  std::size_t nn_index = 0;
  std::size_t nn_distance = 0;
  double nn_fitness = 0.0;
  std::optional<std::string> sequence;
  std::optional<double> oracle_score;
};

inline DecodedCandidate decode_candidate(const RetrievalIndex& index, const QuboModel& model, const Code& code) {
  if (code.size() != index.dim()) throw DimensionError("decode: code length mismatch");
  DecodedCandidate c;
  c.code = code;
  c.surrogate_value = predict(model, code);
  const auto nn = nearest_neighbor(index, code);
  c.nn_index = nn.index;
  c.nn_distance = nn.distance;
  c.nn_fitness = nn.fitness;
  if (index.sequences()) c.sequence = (*index.sequences())[nn.index];
  return c;
}

struct RunRecord {
  std::string optimizer;
  std::uint64_t seed = 0;
  Code best_code;
  double surrogate_value = 0.0;
  std::size_t nn_index = 0;
  std::size_t nn_distance = 0;
  double nn_fitness = 0.0;
  double improvement = 0.0;  // f̂(best_code) − max over training codes of f̂
  double percentile = 0.0;
  std::optional<std::string> sequence;
  std::optional<double> oracle_score;
  std::vector<DecodedCandidate> candidates;  // the run's returned codes, best first
};

/// Highest surrogate value over the training codes.
inline double best_training_surrogate(const RetrievalIndex& index, const QuboModel& model) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < index.size(); ++i) best = std::max(best, predict(model, index.codes().row(i)));
  return best;
}

inline RunRecord retrieval_metrics(const RetrievalIndex& index, const QuboModel& model,
                                   const OptimizationResult& result,
                                   std::optional<double> training_best = std::nullopt) {
  if (model.dim() != index.dim()) {
    throw DimensionError("retrieval_metrics: model m=" + std::to_string(model.dim()) + " but index m=" +
                         std::to_string(index.dim()));
  }
  if (result.best_code.size() != index.dim()) throw DimensionError("retrieval_metrics: code length mismatch");
  RunRecord r;
  r.optimizer = to_string(result.optimizer);
  r.seed = result.seed;
  r.best_code = result.best_code;
  r.surrogate_value = predict(model, result.best_code);
  const auto nn = nearest_neighbor(index, result.best_code);
  r.nn_index = nn.index;
  r.nn_distance = nn.distance;
  r.nn_fitness = nn.fitness;
  const double base = training_best ? *training_best : best_training_surrogate(index, model);
  r.improvement = r.surrogate_value - base;
  r.percentile = fitness_percentile(index.fitness(), nn.fitness);
  if (index.sequences()) r.sequence = (*index.sequences())[nn.index];
  if (result.candidates.empty()) {
    r.candidates.push_back(decode_candidate(index, model, result.best_code));
  } else {
    for (const auto& c : result.candidates) r.candidates.push_back(decode_candidate(index, model, c.code));
  }
  return r;
}

inline constexpr std::size_t kDefaultTopK = 10;

struct DesignAggregate {
  double best_score = 0.0;
  double top_k_mean = 0.0;
  std::size_t k = kDefaultTopK;
  std::size_t unique_candidates = 0;
};

/// Collapses candidates that decode to the same design (same sequence, or
/// same training row when no sequence is known), then takes the max and the
/// mean of the K highest oracle scores. Every candidate must be scored.
inline DesignAggregate aggregate_design(std::span<const DecodedCandidate> candidates, std::size_t k = kDefaultTopK) {
  if (candidates.empty()) throw ValidationError("aggregate_design: no candidates");
  if (k == 0) throw ValidationError("aggregate_design: K must be positive");
  std::map<std::string, double> unique;
  for (const auto& c : candidates) {
    if (!c.oracle_score) throw ValidationError("aggregate_design: candidate without an oracle score");
    const std::string key = c.sequence ? "s:" + *c.sequence : "r:" + std::to_string(c.nn_index);
    unique.emplace(key, *c.oracle_score);
  }
  std::vector<double> scores;
  scores.reserve(unique.size());
  for (const auto& [key, s] : unique) scores.push_back(s);
  std::sort(scores.begin(), scores.end(), std::greater<>());
  DesignAggregate out;
  out.k = k;
  out.unique_candidates = scores.size();
  out.best_score = scores.front();
  const std::size_t take = std::min(k, scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += scores[i];
  out.top_k_mean = sum / static_cast<double>(take);
  return out;
}

/// Pools the candidates of every record; a record without a candidate list
/// contributes its own decoded best.
inline DesignAggregate aggregate_design(std::span<const RunRecord> records, std::size_t k = kDefaultTopK) {
  std::vector<DecodedCandidate> pooled;
  for (const auto& r : records) {
    if (!r.candidates.empty()) {
      pooled.insert(pooled.end(), r.candidates.begin(), r.candidates.end());
    } else {
      pooled.push_back({r.best_code, r.surrogate_value, r.nn_index, r.nn_distance, r.nn_fitness, r.sequence,
                        r.oracle_score});
    }
  }
  return aggregate_design(std::span<const DecodedCandidate>(pooled), k);
}

/// Sample mean and standard deviation (n − 1; 0 for a single value).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

inline nlohmann::json optional_json(const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline void to_json(nlohmann::json& j, const DecodedCandidate& c) {
  j = nlohmann::json{{"code", code_to_string(c.code)},
                     {"surrogate_value", c.surrogate_value},
                     {"nn_index", c.nn_index},
                     {"nn_distance", c.nn_distance},
                     {"nn_fitness", c.nn_fitness},
                     {"sequence", optional_json(c.sequence)},
                     {"oracle_score", optional_json(c.oracle_score)}};
}

inline void from_json(const nlohmann::json& j, DecodedCandidate& c) {
  c.code = code_from_string(j.at("code").get<std::string>());
  c.surrogate_value = j.at("surrogate_value").get<double>();
  c.nn_index = j.at("nn_index").get<std::size_t>();
  c.nn_distance = j.at("nn_distance").get<std::size_t>();
  c.nn_fitness = j.at("nn_fitness").get<double>();
  c.sequence.reset();
  c.oracle_score.reset();
  if (j.contains("sequence") && !j["sequence"].is_null()) c.sequence = j["sequence"].get<std::string>();
  if (j.contains("oracle_score") && !j["oracle_score"].is_null()) c.oracle_score = j["oracle_score"].get<double>();
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"optimizer", r.optimizer},
                     {"seed", r.seed},
                     {"best_code", code_to_string(r.best_code)},
                     {"surrogate_value", r.surrogate_value},
                     {"nn_index", r.nn_index},
                     {"nn_distance", r.nn_distance},
                     {"nn_fitness", r.nn_fitness},
                     {"improvement", r.improvement},
                     {"percentile", r.percentile}};
  j["sequence"] = r.sequence ? nlohmann::json(*r.sequence) : nlohmann::json();
  j["oracle_score"] = r.oracle_score ? nlohmann::json(*r.oracle_score) : nlohmann::json();
  j["candidates"] = r.candidates;
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  r.optimizer = j.at("optimizer").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.best_code = code_from_string(j.at("best_code").get<std::string>());
  r.surrogate_value = j.at("surrogate_value").get<double>();
  r.nn_index = j.at("nn_index").get<std::size_t>();
  r.nn_distance = j.at("nn_distance").get<std::size_t>();
  r.nn_fitness = j.at("nn_fitness").get<double>();
  r.improvement = j.at("improvement").get<double>();
  r.percentile = j.at("percentile").get<double>();
  r.sequence.reset();
  r.oracle_score.reset();
  if (j.contains("sequence") && !j["sequence"].is_null()) r.sequence = j["sequence"].get<std::string>();
  if (j.contains("oracle_score") && !j["oracle_score"].is_null()) r.oracle_score = j["oracle_score"].get<double>();
  r.candidates = j.value("candidates", std::vector<DecodedCandidate>{});
}

inline void to_json(nlohmann::json& j, const DesignAggregate& a) {
  j = nlohmann::json{{"best_score", a.best_score},
                     {"top_k_mean", a.top_k_mean},
                     {"k", a.k},
                     {"unique_candidates", a.unique_candidates}};
}

inline void to_json(nlohmann::json& j, const MeanStd& s) { j = nlohmann::json{{"mean", s.mean}, {"std", s.std}}; }

}  // namespace latqubo
