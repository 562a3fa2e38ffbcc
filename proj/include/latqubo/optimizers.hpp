#pragma once

// Maximizers of a QuboModel over {0,1}^m. Every method runs on SearchState,
// which maintains the local fields g_k(x) = h_k + Σ_{l≠k} J_kl x_l so a
// single-bit flip gain costs O(1) and a flip O(m).
//
// Internally all methods compare values with the intercept removed, so a
// constant shift of the model never changes which code is returned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"
#include "latqubo/codes.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/qubo.hpp"
#include "latqubo/rng.hpp"

namespace latqubo {

class SearchState {
 public:
  SearchState(const QuboModel& model, Code x) : model_(&model), x_(std::move(x)) {
    const std::size_t m = model.dim();
    if (x_.size() != m) throw DimensionError("SearchState: code length does not match model");
    g_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      double g = model.effective_unary(k);
      const auto jk = model.J.row(k);
      for (std::size_t l = 0; l < m; ++l)
        if (l != k && x_[l]) g += jk[l];
      g_[k] = g;
    }
    value_ = predict_centered(model, x_);
  }

  std::size_t dim() const noexcept { return x_.size(); }
  const Code& code() const noexcept { return x_; }
  /// f(x) - intercept.
  double value() const noexcept { return value_; }
  double objective() const noexcept { return model_->intercept + value_; }
  std::span<const double> local_fields() const noexcept { return g_; }

  /// Δ_k(x) = f(x with bit k flipped) - f(x) = (1 - 2x_k) g_k(x).
  double flip_gain(std::size_t k) const {
    if (k >= x_.size()) throw DimensionError("flip_gain: bit index out of range");
    return x_[k] ? -g_[k] : g_[k];
  }

  void apply_flip(std::size_t k) {
    const double gain = flip_gain(k);
    value_ += gain;
    const bool turning_on = x_[k] == 0;
    x_[k] = turning_on ? 1 : 0;
    const auto jk = model_->J.row(k);
    const std::size_t m = x_.size();
    if (turning_on) {
      for (std::size_t l = 0; l < m; ++l)
        if (l != k) g_[l] += jk[l];
    } else {
      for (std::size_t l = 0; l < m; ++l)
        if (l != k) g_[l] -= jk[l];
    }
  }

 private:
  const QuboModel* model_;
  Code x_;
  double value_ = 0.0;
  Vector g_;
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

enum class OptimizerKind { sa, ga, rs, ghc, lbo };

inline std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sa: return "sa";
    case OptimizerKind::ga: return "ga";
    case OptimizerKind::rs: return "rs";
    case OptimizerKind::ghc: return "ghc";
    case OptimizerKind::lbo: return "lbo";
  }
  return "?";
}

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sa" || s == "simulated_annealing") return OptimizerKind::sa;
  if (s == "ga" || s == "genetic_algorithm") return OptimizerKind::ga;
  if (s == "rs" || s == "random_search") return OptimizerKind::rs;
  if (s == "ghc" || s == "greedy_hill_climb") return OptimizerKind::ghc;
  if (s == "lbo" || s == "latent_kernel_search") return OptimizerKind::lbo;
  throw ValidationError("unknown optimizer '" + s + "'");
}

struct SaParams {
  std::uint64_t steps = 20000;
  double t0 = 1.0;
  double t_min = 1e-4;
  double decay = 0.999;
};

struct GaParams {
  std::size_t pop = 64;
  std::size_t generations = 150;
  std::size_t elite = 4;
  std::size_t tournament = 3;
  double crossover_p = 0.9;
  double mutation_rate = 0.02;
};

struct RsParams {
  std::uint64_t samples = 10000;
};

struct GhcParams {
  std::size_t max_passes = 100;
};

struct LboParams {
  std::uint64_t samples = 5000;
  double length_scale = 4.0;
  double beta = 1.0;
};

struct OptimizerParams {
  SaParams sa;
  GaParams ga;
  RsParams rs;
  GhcParams ghc;
  LboParams lbo;

  /// Applies one dotted override such as "sa.steps" or "lbo.beta".
  void set(const std::string& key, double value) {
    auto count = [&](auto& field) {
      if (value < 0 || value != std::floor(value)) {
        throw ValidationError("optimizer key '" + key + "' needs a non-negative integer");
      }
      field = static_cast<std::remove_reference_t<decltype(field)>>(value);
    };
    if (key == "sa.steps") count(sa.steps);
    else if (key == "sa.t0") sa.t0 = value;
    else if (key == "sa.t_min") sa.t_min = value;
    else if (key == "sa.decay") sa.decay = value;
    else if (key == "ga.pop") count(ga.pop);
    else if (key == "ga.generations") count(ga.generations);
    else if (key == "ga.elite") count(ga.elite);
    else if (key == "ga.tournament") count(ga.tournament);
    else if (key == "ga.crossover_p") ga.crossover_p = value;
    else if (key == "ga.mutation_rate") ga.mutation_rate = value;
    else if (key == "rs.samples") count(rs.samples);
    else if (key == "ghc.max_passes") count(ghc.max_passes);
    else if (key == "lbo.samples") count(lbo.samples);
    else if (key == "lbo.length_scale") lbo.length_scale = value;
    else if (key == "lbo.beta") lbo.beta = value;
    else throw ValidationError("unknown optimizer key '" + key + "'");
  }
};

struct TrajectoryPoint {
  std::uint64_t step = 0;
  double best_so_far = 0.0;
};

inline constexpr std::size_t kDefaultCandidates = 10;

struct Candidate {
  Code code;
  double value = 0.0;  // includes the intercept
};

/// The `capacity` highest-scoring distinct codes offered so far. Equal
/// scores keep the earlier offer. Offers below a full pool's floor cost O(1).
class CandidatePool {
 public:
  explicit CandidatePool(std::size_t capacity) : capacity_(capacity) {}

  bool admits(double score) const noexcept {
    return capacity_ > 0 && (entries_.size() < capacity_ || score > floor_);
  }

  void offer(double score, std::span<const std::uint8_t> code) {
    if (!admits(score)) return;
    for (const auto& e : entries_)
      if (std::equal(e.code.begin(), e.code.end(), code.begin(), code.end())) return;
    Entry entry{score, next_++, Code(code.begin(), code.end())};
    if (entries_.size() < capacity_) {
      entries_.push_back(std::move(entry));
    } else {
      *std::min_element(entries_.begin(), entries_.end(), worse_first) = std::move(entry);
    }
    if (entries_.size() == capacity_) floor_ = std::min_element(entries_.begin(), entries_.end(), worse_first)->score;
  }

  /// Codes by descending score, earlier offers first on ties.
  std::vector<Code> codes() const {
    auto sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return worse_first(b, a); });
    std::vector<Code> out;
    for (auto& e : sorted) out.push_back(std::move(e.code));
    return out;
  }

 private:
  struct Entry {
    double score;
    std::uint64_t order;
    Code code;
  };
  // Lower score is worse; among equal scores the later offer is worse.
  static bool worse_first(const Entry& a, const Entry& b) {
    return a.score != b.score ? a.score < b.score : a.order > b.order;
  }

  std::size_t capacity_;
  std::vector<Entry> entries_;
  double floor_ = -std::numeric_limits<double>::infinity();
  std::uint64_t next_ = 0;
};

struct OptimizationResult {
  OptimizerKind optimizer = OptimizerKind::sa;
  std::uint64_t seed = 0;
  Code best_code;
  double best_value = 0.0;  // includes the intercept
  std::uint64_t evaluations = 0;
  std::vector<Candidate> candidates;  // best distinct codes evaluated, best first
  std::vector<TrajectoryPoint> trajectory;
  bool converged = true;          // ghc: ended at a certified local maximum
  bool weights_underflowed = false;  // lbo: some candidate had all kernel weights underflow
};

inline Code random_code(std::size_t m, Rng& rng) {
  Code x(m);
  std::uint64_t word = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (k % 64 == 0) word = rng.next_u64();
    x[k] = static_cast<std::uint8_t>((word >> (k % 64)) & 1U);
  }
  return x;
}

namespace optimizer_detail {

inline OptimizationResult finish(const QuboModel& model, OptimizerKind kind, std::uint64_t seed, Code best,
                                 std::uint64_t evaluations, const CandidatePool& pool) {
  OptimizationResult r;
  r.optimizer = kind;
  r.seed = seed;
  r.best_value = predict(model, best);
  r.best_code = std::move(best);
  r.evaluations = evaluations;
  for (auto& c : pool.codes()) {
    const double v = predict(model, c);
    r.candidates.push_back({std::move(c), v});
  }
  return r;
}

/// Offers x with bit k flipped, building the code only if the pool wants it.
inline void offer_flip(CandidatePool& pool, double score, const Code& x, std::size_t k) {
  if (!pool.admits(score)) return;
  Code y = x;
  y[k] ^= 1U;
  pool.offer(score, y);
}

}  // namespace optimizer_detail

// ---------------------------------------------------------------------------
// Simulated annealing
// ---------------------------------------------------------------------------

/// Single-bit-flip Metropolis annealing from a uniform random code. Each step
/// flips a uniformly chosen bit if Δ ≥ 0, else with probability exp(Δ/T);
/// then T ← max(decay·T, t_min). Returns the best code visited.
/// Every proposal (accepted or not) is offered to the candidate pool.
inline OptimizationResult simulated_annealing(const QuboModel& model, std::uint64_t seed,
                                              const SaParams& params = {},
                                              std::size_t keep = kDefaultCandidates) {
  const std::size_t m = model.dim();
  if (m < 1) throw DimensionError("simulated_annealing needs m >= 1");
  Rng rng(seed, "sa");
  SearchState state(model, random_code(m, rng));
  Code best = state.code();
  double best_value = state.value();
  std::vector<TrajectoryPoint> trajectory{{0, model.intercept + best_value}};
  CandidatePool pool(keep);
  pool.offer(best_value, best);

  double t = params.t0;
  for (std::uint64_t step = 1; step <= params.steps; ++step) {
    const auto k = static_cast<std::size_t>(rng.uniform_index(m));
    const double gain = state.flip_gain(k);
    optimizer_detail::offer_flip(pool, state.value() + gain, state.code(), k);
    if (gain >= 0.0 || rng.uniform01() < std::exp(gain / t)) {
      state.apply_flip(k);
      if (state.value() > best_value) {
        best_value = state.value();
        best = state.code();
        trajectory.push_back({step, model.intercept + best_value});
      }
    }
    t = std::max(params.decay * t, params.t_min);
  }
  auto r = optimizer_detail::finish(model, OptimizerKind::sa, seed, std::move(best), params.steps + 1, pool);
  r.trajectory = std::move(trajectory);
  return r;
}

// ---------------------------------------------------------------------------
// Genetic algorithm
// ---------------------------------------------------------------------------

/// Generational GA with elitism, tournament selection, single-point crossover
/// and per-bit mutation. Ties in fitness go to the lower population index.
/// `initial` replaces the random initial population when non-empty.
inline OptimizationResult genetic_algorithm(const QuboModel& model, std::uint64_t seed,
                                            const GaParams& params = {},
                                            std::span<const Code> initial = {},
                                            std::size_t keep = kDefaultCandidates) {
  const std::size_t m = model.dim();
  if (m < 2) throw DimensionError("genetic_algorithm needs m >= 2 for single-point crossover");
  if (params.pop < 1 || params.elite > params.pop || params.tournament < 1) {
    throw ValidationError("genetic_algorithm: need pop >= 1, elite <= pop, tournament >= 1");
  }
  Rng rng(seed, "ga");

  std::vector<Code> pop;
  if (!initial.empty()) {
    if (initial.size() != params.pop) throw ValidationError("genetic_algorithm: initial population size != pop");
    for (const auto& c : initial) {
      if (c.size() != m) throw DimensionError("genetic_algorithm: initial code length does not match model");
      pop.push_back(c);
    }
  } else {
    for (std::size_t i = 0; i < params.pop; ++i) pop.push_back(random_code(m, rng));
  }
  Vector fit(pop.size());
  CandidatePool pool(keep);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    fit[i] = predict_centered(model, pop[i]);
    pool.offer(fit[i], pop[i]);
  }
  std::uint64_t evaluations = pop.size();

  std::size_t best_i = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (fit[i] > fit[best_i]) best_i = i;
  Code best = pop[best_i];
  double best_value = fit[best_i];
  std::vector<TrajectoryPoint> trajectory{{0, model.intercept + best_value}};

  auto tournament = [&]() {
    std::size_t winner = static_cast<std::size_t>(rng.uniform_index(pop.size()));
    for (std::size_t t = 1; t < params.tournament; ++t) {
      const auto c = static_cast<std::size_t>(rng.uniform_index(pop.size()));
      if (fit[c] > fit[winner] || (fit[c] == fit[winner] && c < winner)) winner = c;
    }
    return winner;
  };

  std::vector<std::size_t> order(pop.size());
  for (std::size_t gen = 1; gen <= params.generations; ++gen) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

    std::vector<Code> next;
    Vector next_fit;
    next.reserve(pop.size());
    for (std::size_t e = 0; e < params.elite; ++e) {
      next.push_back(pop[order[e]]);
      next_fit.push_back(fit[order[e]]);
    }
    while (next.size() < pop.size()) {
      const std::size_t a = tournament();
      const std::size_t b = tournament();
      Code child = pop[a];
      if (rng.uniform01() < params.crossover_p) {
        const auto cut = 1 + static_cast<std::size_t>(rng.uniform_index(m - 1));
        std::copy(pop[b].begin() + static_cast<std::ptrdiff_t>(cut), pop[b].end(),
                  child.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (std::size_t k = 0; k < m; ++k)
        if (rng.uniform01() < params.mutation_rate) child[k] ^= 1U;
      const double v = predict_centered(model, child);
      ++evaluations;
      pool.offer(v, child);
      if (v > best_value) {
        best_value = v;
        best = child;
      }
      next.push_back(std::move(child));
      next_fit.push_back(v);
    }
    pop = std::move(next);
    fit = std::move(next_fit);
    trajectory.push_back({gen, model.intercept + best_value});
  }
  auto r = optimizer_detail::finish(model, OptimizerKind::ga, seed, std::move(best), evaluations, pool);
  r.trajectory = std::move(trajectory);
  return r;
}

// ---------------------------------------------------------------------------
// Random search
// ---------------------------------------------------------------------------

inline OptimizationResult random_search(const QuboModel& model, std::uint64_t seed,
                                        const RsParams& params = {},
                                        std::size_t keep = kDefaultCandidates) {
  const std::size_t m = model.dim();
  if (m < 1) throw DimensionError("random_search needs m >= 1");
  if (params.samples < 1) throw ValidationError("random_search needs at least one sample");
  Rng rng(seed, "rs");
  Code best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<TrajectoryPoint> trajectory;
  CandidatePool pool(keep);
  for (std::uint64_t s = 0; s < params.samples; ++s) {
    Code x = random_code(m, rng);
    const double v = predict_centered(model, x);
    pool.offer(v, x);
    if (v > best_value) {
      best_value = v;
      best = std::move(x);
      trajectory.push_back({s, model.intercept + best_value});
    }
  }
  auto r = optimizer_detail::finish(model, OptimizerKind::rs, seed, std::move(best), params.samples, pool);
  r.trajectory = std::move(trajectory);
  return r;
}

// ---------------------------------------------------------------------------
// Greedy hill climbing
// ---------------------------------------------------------------------------

/// Best-improvement local search: each pass scans all m flip gains and
/// applies the largest strictly positive one (lowest index on ties). Stops
/// when no gain is positive or after `max_passes` passes. On stopping the
/// local fields are recomputed from scratch and re-checked, so a converged
/// result satisfies x_k = 1 ⇒ g_k ≥ 0 and x_k = 0 ⇒ g_k ≤ 0 without
/// incremental round-off.
/// The start and every scanned neighbour are offered to the candidate pool.
inline OptimizationResult greedy_hill_climb(const QuboModel& model, std::optional<Code> start,
                                            std::uint64_t seed, const GhcParams& params = {},
                                            std::size_t keep = kDefaultCandidates) {
  const std::size_t m = model.dim();
  if (m < 1) throw DimensionError("greedy_hill_climb needs m >= 1");
  Rng rng(seed, "ghc");
  Code x0 = start ? std::move(*start) : random_code(m, rng);
  if (x0.size() != m) throw DimensionError("greedy_hill_climb: start code length does not match model");

  SearchState state(model, std::move(x0));
  std::vector<TrajectoryPoint> trajectory{{0, state.objective()}};
  std::uint64_t evaluations = 1;
  CandidatePool pool(keep);
  pool.offer(state.value(), state.code());
  bool converged = false;
  bool refreshed = false;
  for (std::size_t pass = 1; pass <= params.max_passes; ++pass) {
    std::size_t best_k = m;
    double best_gain = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double gain = state.flip_gain(k);
      if (!refreshed) optimizer_detail::offer_flip(pool, state.value() + gain, state.code(), k);
      if (gain > best_gain) {
        best_gain = gain;
        best_k = k;
      }
    }
    evaluations += m;
    if (best_k == m) {
      if (refreshed) {
        converged = true;
        break;
      }
      state = SearchState(model, state.code());
      refreshed = true;
      --pass;  // the verification scan is not a pass
      continue;
    }
    refreshed = false;
    state.apply_flip(best_k);
    trajectory.push_back({pass, state.objective()});
  }
  auto r = optimizer_detail::finish(model, OptimizerKind::ghc, seed, state.code(), evaluations, pool);
  r.trajectory = std::move(trajectory);
  r.converged = converged;
  return r;
}

// ---------------------------------------------------------------------------
// Kernel-UCB latent search
// ---------------------------------------------------------------------------

struct KernelAcquisition {
  double mean = 0.0;
  double uncertainty = 0.0;
  double value = 0.0;
  bool underflow = false;
};

/// Acquisition for one candidate given seed codes and their values:
///   k(x, s) = exp(-d_H(x, s)² / (2ℓ²))
///   μ(x)    = Σ k(x, s_i) v_i / Σ k(x, s_i)   (0 with underflow flag if Σ k = 0)
///   σ(x)    = 1 - max_i k(x, s_i)
///   a(x)    = μ(x) + β σ(x)
/// σ is a novelty proxy chosen by this library, not a GP posterior variance.
inline KernelAcquisition kernel_acquisition(const BinaryCodeSet& seeds, std::span<const double> values,
                                            std::span<const std::uint8_t> candidate,
                                            const LboParams& params = {}) {
  KernelAcquisition a;
  double num = 0.0, den = 0.0, kmax = 0.0;
  const double inv = 1.0 / (2.0 * params.length_scale * params.length_scale);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto d = static_cast<double>(hamming(candidate, seeds.row(i)));
    const double k = std::exp(-d * d * inv);
    num += k * values[i];
    den += k;
    kmax = std::max(kmax, k);
  }
  a.underflow = den == 0.0;
  a.mean = a.underflow ? 0.0 : num / den;
  a.uncertainty = 1.0 - kmax;
  a.value = a.mean + params.beta * a.uncertainty;
  return a;
}

/// Samples uniform candidates and returns the one maximizing the kernel
/// acquisition, with seed values taken from the surrogate itself.
/// Candidates are ranked by acquisition, not by surrogate value.
inline OptimizationResult latent_kernel_search(const QuboModel& model, const BinaryCodeSet& seed_codes,
                                               std::uint64_t seed, const LboParams& params = {},
                                               std::size_t keep = kDefaultCandidates) {
  const std::size_t m = model.dim();
  if (seed_codes.empty()) throw ValidationError("latent_kernel_search needs at least one seed code");
  if (seed_codes.dim() != m) throw DimensionError("latent_kernel_search: seed codes do not match model");
  if (params.samples < 1) throw ValidationError("latent_kernel_search needs at least one sample");

  const std::size_t n = seed_codes.size();
  const std::size_t words = words_for(m);
  std::vector<std::uint64_t> packed(n * words);
  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) {
    pack_code(seed_codes.row(i), std::span(packed).subspan(i * words, words));
    values[i] = predict_centered(model, seed_codes.row(i));
  }
  Vector kernel(m + 1);
  for (std::size_t d = 0; d <= m; ++d) {
    const double dd = static_cast<double>(d);
    kernel[d] = std::exp(-dd * dd / (2.0 * params.length_scale * params.length_scale));
  }

  Rng rng(seed, "lbo");
  std::vector<std::uint64_t> cand(words);
  Code best;
  double best_acq = -std::numeric_limits<double>::infinity();
  bool underflowed = false;
  std::vector<TrajectoryPoint> trajectory;
  CandidatePool pool(keep);
  for (std::uint64_t s = 0; s < params.samples; ++s) {
    Code x = random_code(m, rng);
    pack_code(x, cand);
    double num = 0.0, den = 0.0, kmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double k = kernel[hamming_packed(cand, std::span<const std::uint64_t>(packed).subspan(i * words, words))];
      num += k * values[i];
      den += k;
      kmax = std::max(kmax, k);
    }
    const bool underflow = den == 0.0;
    underflowed = underflowed || underflow;
    const double acq = (underflow ? 0.0 : num / den) + params.beta * (1.0 - kmax);
    pool.offer(acq, x);
    if (acq > best_acq) {
      best_acq = acq;
      best = std::move(x);
      trajectory.push_back({s, predict(model, best)});
    }
  }
  auto r = optimizer_detail::finish(model, OptimizerKind::lbo, seed, std::move(best), params.samples, pool);
  r.trajectory = std::move(trajectory);
  r.weights_underflowed = underflowed;
  return r;
}

/// Dispatches on `kind`. `seed_codes` is required for lbo only.
inline OptimizationResult run_optimizer(OptimizerKind kind, const QuboModel& model, std::uint64_t seed,
                                        const OptimizerParams& params = {},
                                        const BinaryCodeSet* seed_codes = nullptr,
                                        std::size_t keep = kDefaultCandidates) {
  switch (kind) {
    case OptimizerKind::sa: return simulated_annealing(model, seed, params.sa, keep);
    case OptimizerKind::ga: return genetic_algorithm(model, seed, params.ga, {}, keep);
    case OptimizerKind::rs: return random_search(model, seed, params.rs, keep);
    case OptimizerKind::ghc: return greedy_hill_climb(model, std::nullopt, seed, params.ghc, keep);
    case OptimizerKind::lbo:
      if (!seed_codes) throw ValidationError("lbo needs seed codes");
      return latent_kernel_search(model, *seed_codes, seed, params.lbo, keep);
  }
  throw ValidationError("unknown optimizer");
}

inline void to_json(nlohmann::json& j, const OptimizationResult& r) {
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& p : r.trajectory) traj.push_back({p.step, p.best_so_far});
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : r.candidates) cands.push_back({{"code", code_to_string(c.code)}, {"value", c.value}});
  j = nlohmann::json{{"optimizer", to_string(r.optimizer)},
                     {"seed", r.seed},
                     {"best_code", code_to_string(r.best_code)},
                     {"best_value", r.best_value},
                     {"evaluations", r.evaluations},
                     {"converged", r.converged},
                     {"weights_underflowed", r.weights_underflowed},
                     {"candidates", cands},
                     {"trajectory", traj}};
}

inline void from_json(const nlohmann::json& j, OptimizationResult& r) {
  r.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.best_code = code_from_string(j.at("best_code").get<std::string>());
  r.best_value = j.at("best_value").get<double>();
  r.evaluations = j.value("evaluations", std::uint64_t{0});
  r.converged = j.value("converged", true);
  r.weights_underflowed = j.value("weights_underflowed", false);
  r.candidates.clear();
  if (j.contains("candidates")) {
    for (const auto& c : j["candidates"])
      r.candidates.push_back({code_from_string(c.at("code").get<std::string>()), c.at("value").get<double>()});
  }
  r.trajectory.clear();
  if (j.contains("trajectory")) {
    for (const auto& p : j["trajectory"]) r.trajectory.push_back({p.at(0).get<std::uint64_t>(), p.at(1).get<double>()});
  }
}

inline void to_json(nlohmann::json& j, const OptimizerParams& p) {
  j = nlohmann::json{
      {"sa", {{"steps", p.sa.steps}, {"t0", p.sa.t0}, {"t_min", p.sa.t_min}, {"decay", p.sa.decay}}},
      {"ga",
       {{"pop", p.ga.pop},
        {"generations", p.ga.generations},
        {"elite", p.ga.elite},
        {"tournament", p.ga.tournament},
        {"crossover_p", p.ga.crossover_p},
        {"mutation_rate", p.ga.mutation_rate}}},
      {"rs", {{"samples", p.rs.samples}}},
      {"ghc", {{"max_passes", p.ghc.max_passes}}},
      {"lbo", {{"samples", p.lbo.samples}, {"length_scale", p.lbo.length_scale}, {"beta", p.lbo.beta}}}};
}

}  // namespace latqubo
