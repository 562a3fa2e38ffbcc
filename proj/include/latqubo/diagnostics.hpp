#pragma once

// Landscape diagnostics of a fitted QUBO: norms, the Hamming-Lipschitz
// constant, exact bit-flip-gain second moments, the spectrum of J, low-rank
// truncation bounds, design-matrix identifiability, and exhaustive
// verification of the corresponding inequalities on small m.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "latqubo/codes.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/linalg.hpp"
#include "latqubo/optimizers.hpp"
#include "latqubo/qubo.hpp"
#include "latqubo/rng.hpp"

namespace latqubo {

inline double h_inf_norm(const QuboModel& q) { return max_abs(q.h); }
inline double h_2_norm(const QuboModel& q) { return norm2(q.h); }

/// Max absolute row sum.
inline double J_inf_norm(const QuboModel& q) {
  double best = 0.0;
  for (std::size_t k = 0; k < q.dim(); ++k) {
    double s = 0.0;
    for (double v : q.J.row(k)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

inline double J_frobenius_norm(const QuboModel& q) { return frobenius_norm(q.J); }

/// L_H = ‖h‖_∞ + ‖J‖_∞; |f(x) - f(y)| ≤ L_H d_H(x, y).
inline double lipschitz_constant(const QuboModel& q) { return h_inf_norm(q) + J_inf_norm(q); }

/// Eigenpairs of J ordered by |λ| descending; eigenvectors are columns.
inline SymmetricEigen spectrum(const QuboModel& q) {
  return symmetric_eigen(q.J, EigenOrder::magnitude_descending);
}

/// ‖J‖₂ as the largest |eigenvalue|.
inline double J_2_norm(const QuboModel& q) {
  if (q.dim() == 0) return 0.0;
  return std::abs(spectrum(q).values.front());
}

/// √d_H(x, y) (‖h‖₂ + √m ‖J‖₂), bounding |f(x) - f(y)|.
inline double spectral_bound(const QuboModel& q, std::span<const std::uint8_t> x,
                             std::span<const std::uint8_t> y, std::optional<double> j2 = std::nullopt) {
  if (x.size() != q.dim() || y.size() != q.dim()) throw DimensionError("spectral_bound: code length mismatch");
  const double d = static_cast<double>(hamming(x, y));
  const double spectral = j2 ? *j2 : J_2_norm(q);
  return std::sqrt(d) * (h_2_norm(q) + std::sqrt(static_cast<double>(q.dim())) * spectral);
}

struct Ruggedness {
  Vector per_bit;  // E[Δ_k²] under the uniform measure on {0,1}^m
  double mean = 0.0;
};

/// E[Δ_k²] = (h_k + ½ Σ_{l≠k} J_kl)² + ¼ Σ_{l≠k} J_kl², averaged over k.
inline Ruggedness ruggedness(const QuboModel& q) {
  const std::size_t m = q.dim();
  Ruggedness r;
  r.per_bit.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double mean_field = q.effective_unary(k);
    double var = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (l == k) continue;
      mean_field += 0.5 * q.J(k, l);
      var += 0.25 * q.J(k, l) * q.J(k, l);
    }
    r.per_bit[k] = mean_field * mean_field + var;
    r.mean += r.per_bit[k];
  }
  if (m > 0) r.mean /= static_cast<double>(m);
  return r;
}

/// r_eff(J) = ‖J‖_F² / ‖J‖₂². Throws UndefinedRankError for J = 0.
inline double effective_rank(const QuboModel& q) {
  const double j2 = J_2_norm(q);
  if (j2 == 0.0) throw UndefinedRankError("effective rank is undefined for J = 0");
  const double fro = J_frobenius_norm(q);
  return (fro * fro) / (j2 * j2);
}

struct Truncation {
  QuboModel model;               // J replaced by J_r, diagonal kept
  double tail_norm = 0.0;        // ‖J - J_r‖₂ = |λ_{r+1}|
  double pointwise_bound = 0.0;  // (m/2) ‖J - J_r‖₂
  double gap_bound = 0.0;        // m ‖J - J_r‖₂
};

inline Truncation truncate(const QuboModel& q, std::size_t r, const SymmetricEigen& spec) {
  const std::size_t m = q.dim();
  if (r > m) throw DimensionError("truncate: rank " + std::to_string(r) + " exceeds m = " + std::to_string(m));
  Truncation t;
  t.model = q;
  if (r < m) {
    t.model.J = Matrix(m, m);
    for (std::size_t i = 0; i < r; ++i) {
      const double lam = spec.values[i];
      for (std::size_t a = 0; a < m; ++a) {
        const double ua = lam * spec.vectors(a, i);
        for (std::size_t b = 0; b < m; ++b) t.model.J(a, b) += ua * spec.vectors(b, i);
      }
    }
    // Exact symmetry so the truncated model is a valid QuboModel.
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        const double avg = 0.5 * (t.model.J(a, b) + t.model.J(b, a));
        t.model.J(a, b) = avg;
        t.model.J(b, a) = avg;
      }
    t.tail_norm = std::abs(spec.values[r]);
  }
  t.pointwise_bound = 0.5 * static_cast<double>(m) * t.tail_norm;
  t.gap_bound = static_cast<double>(m) * t.tail_norm;
  return t;
}

inline Truncation truncate(const QuboModel& q, std::size_t r) { return truncate(q, r, spectrum(q)); }

// ---------------------------------------------------------------------------
// Brute force
// ---------------------------------------------------------------------------

inline constexpr std::size_t kBruteForceMaxBits = 24;

struct BruteForceOptimum {
  Code code;
  double value = 0.0;
};

/// Global maximum by Gray-code enumeration of all 2^m codes with O(m) flip
/// updates. Ties go to the lexicographically smallest code (x_1 first).
inline BruteForceOptimum brute_force_optimum(const QuboModel& q) {
  const std::size_t m = q.dim();
  if (m < 1) throw DimensionError("brute_force_optimum needs m >= 1");
  if (m > kBruteForceMaxBits) {
    throw CapacityError("brute_force_optimum is capped at m <= " + std::to_string(kBruteForceMaxBits) +
                        " (got " + std::to_string(m) + ")");
  }
  SearchState state(q, Code(m, 0));
  Code best = state.code();
  double best_value = state.value();
  const std::uint64_t total = std::uint64_t{1} << m;
  for (std::uint64_t i = 1; i < total; ++i) {
    state.apply_flip(static_cast<std::size_t>(std::countr_zero(i)));
    const double v = state.value();
    if (v > best_value || (v == best_value && state.code() < best)) {
      best_value = v;
      best = state.code();
    }
  }
  return {best, predict(q, best)};
}

/// Calls fn(code) for every code of length m in Gray order.
template <typename Fn>
void for_each_code(std::size_t m, Fn&& fn) {
  Code x(m, 0);
  fn(static_cast<const Code&>(x));
  const std::uint64_t total = std::uint64_t{1} << m;
  for (std::uint64_t i = 1; i < total; ++i) {
    x[static_cast<std::size_t>(std::countr_zero(i))] ^= 1U;
    fn(static_cast<const Code&>(x));
  }
}

// ---------------------------------------------------------------------------
// Identifiability
// ---------------------------------------------------------------------------

struct IdentifiabilityReport {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t design_rank = 0;
  bool identifiable = false;
  std::optional<Vector> null_vector;  // unit u with Φu ≈ 0, when not identifiable
  double training_residual = 0.0;     // ‖Φu‖_∞ over the training codes
  double unseen_difference = 0.0;     // max |φ(x)ᵀu| over probed codes outside the training set
  std::optional<Code> witness;        // the code attaining unseen_difference
  std::size_t probed_codes = 0;
};

inline constexpr double kRankEpsilon = 1e-12;

/// Rank of the design matrix Φ from the eigenvalues of its Gram matrix
/// (ΦᵀΦ, or ΦΦᵀ when N < p; they share nonzero eigenvalues), counting
/// eigenvalues above p·ε·λ_max with ε = 1e-12. When rank < p a null vector
/// is built by projecting the standard basis vector with the largest
/// residual off an orthonormal basis of the row space (two passes of
/// modified Gram-Schmidt), then probed on codes outside the training set.
inline IdentifiabilityReport check_identifiability(const BinaryCodeSet& codes) {
  if (codes.empty()) throw ValidationError("check_identifiability needs at least one code");
  const Matrix phi = build_features(codes);
  const std::size_t n = phi.rows();
  const std::size_t p = phi.cols();

  IdentifiabilityReport rep;
  rep.p = p;
  rep.n = n;
  const Matrix g = n < p ? gram(phi.transposed()) : gram(phi);
  const auto eig = symmetric_eigen(g, EigenOrder::value_descending);
  const double lmax = eig.values.empty() ? 0.0 : eig.values.front();
  const double threshold = static_cast<double>(p) * kRankEpsilon * lmax;
  for (double v : eig.values)
    if (lmax > 0.0 && v > threshold) ++rep.design_rank;
  rep.identifiable = rep.design_rank == p;
  if (rep.identifiable) return rep;

  // Orthonormal basis of the row space.
  std::vector<Vector> basis;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(phi.row(i).begin(), phi.row(i).end());
    const double original = norm2(v);
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = dot(b, v);
        for (std::size_t j = 0; j < p; ++j) v[j] -= c * b[j];
      }
    const double nv = norm2(v);
    if (nv <= 1e-10 * original) continue;
    for (double& x : v) x /= nv;
    basis.push_back(std::move(v));
  }

  std::size_t pick = 0;
  double best = -1.0;
  for (std::size_t j = 0; j < p; ++j) {
    double covered = 0.0;
    for (const auto& b : basis) covered += b[j] * b[j];
    if (1.0 - covered > best + 1e-12) {
      best = 1.0 - covered;
      pick = j;
    }
  }
  Vector u(p, 0.0);
  u[pick] = 1.0;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) {
      const double c = dot(b, u);
      for (std::size_t j = 0; j < p; ++j) u[j] -= c * b[j];
    }
  const double nu = norm2(u);
  for (double& x : u) x /= nu;
  rep.training_residual = max_abs(matvec(phi, u));

  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) seen.insert(code_to_string(codes.row(i)));
  const FeatureMap map(codes.dim());
  Vector feat(p);
  auto probe = [&](const Code& x) {
    if (seen.count(code_to_string(x))) return;
    map.features(x, feat);
    const double d = std::abs(dot(feat, u));
    ++rep.probed_codes;
    if (d > rep.unseen_difference) {
      rep.unseen_difference = d;
      rep.witness = x;
    }
  };
  if (codes.dim() <= 16) {
    for_each_code(codes.dim(), probe);
  } else {
    Rng rng(0, "identifiability");
    for (int s = 0; s < 4096; ++s) probe(random_code(codes.dim(), rng));
  }
  rep.null_vector = std::move(u);
  return rep;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct TruncationBound {
  std::size_t rank = 0;
  double pointwise_bound = 0.0;
  double gap_bound = 0.0;
};

struct DiagnosticsReport {
  std::size_t m = 0;
  double h_inf_norm = 0.0;
  double h_2_norm = 0.0;
  double J_inf_norm = 0.0;
  double J_2_norm = 0.0;
  double J_frobenius = 0.0;
  double lipschitz_LH = 0.0;
  double ruggedness = 0.0;
  Vector per_bit_second_moments;
  double ruggedness_frobenius_approx = 0.0;  // ‖J‖_F² / (4m), comparison only
  Vector per_bit_variance_approx;            // Σ_l J_kl², comparison only
  Vector eigenvalues;                        // by |λ| descending
  std::optional<double> effective_rank;      // empty when J = 0
  std::vector<TruncationBound> truncation_bounds;
};

inline DiagnosticsReport diagnose(const QuboModel& q) {
  DiagnosticsReport rep;
  const std::size_t m = q.dim();
  rep.m = m;
  const auto spec = spectrum(q);
  rep.h_inf_norm = h_inf_norm(q);
  rep.h_2_norm = h_2_norm(q);
  rep.J_inf_norm = J_inf_norm(q);
  rep.J_2_norm = m ? std::abs(spec.values.front()) : 0.0;
  rep.J_frobenius = J_frobenius_norm(q);
  rep.lipschitz_LH = rep.h_inf_norm + rep.J_inf_norm;
  const auto rug = ruggedness(q);
  rep.ruggedness = rug.mean;
  rep.per_bit_second_moments = rug.per_bit;
  rep.ruggedness_frobenius_approx = m ? rep.J_frobenius * rep.J_frobenius / (4.0 * static_cast<double>(m)) : 0.0;
  rep.per_bit_variance_approx.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    for (std::size_t l = 0; l < m; ++l)
      if (l != k) s += q.J(k, l) * q.J(k, l);
    rep.per_bit_variance_approx[k] = s;
  }
  rep.eigenvalues = spec.values;
  if (rep.J_2_norm > 0.0) rep.effective_rank = rep.J_frobenius * rep.J_frobenius / (rep.J_2_norm * rep.J_2_norm);
  for (std::size_t r = 0; r <= m; ++r) {
    const double tail = r < m ? std::abs(spec.values[r]) : 0.0;
    rep.truncation_bounds.push_back({r, 0.5 * static_cast<double>(m) * tail, static_cast<double>(m) * tail});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive verification
// ---------------------------------------------------------------------------

struct PropositionCheck {
  std::string name;
  bool skipped = false;
  std::string note;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::uint64_t equality_cases = 0;  // bound attained within tolerance
  double max_excess = -std::numeric_limits<double>::infinity();  // max(lhs - rhs)

  bool passed() const noexcept { return !skipped && violations == 0; }
};

inline PropositionCheck named_check(std::string name) {
  PropositionCheck c;
  c.name = std::move(name);
  return c;
}

struct VerificationLimits {
  std::size_t pairwise_max_bits = 12;  // all 4^m code pairs
  std::size_t per_code_max_bits = 16;  // m·2^m work per check, per rank
  double tolerance = 1e-9;
};

namespace diagnostics_detail {

inline void record(PropositionCheck& c, double lhs, double rhs, double tol) {
  ++c.checked;
  const double excess = lhs - rhs;
  c.max_excess = std::max(c.max_excess, excess);
  const double slack = tol * std::max(1.0, std::abs(rhs));
  if (excess > slack) ++c.violations;
  if (std::abs(excess) <= slack) ++c.equality_cases;
}

inline std::vector<Code> all_codes(std::size_t m) {
  std::vector<Code> out;
  out.reserve(std::size_t{1} << m);
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << m); ++i) {
    Code x(m);
    for (std::size_t k = 0; k < m; ++k) x[k] = static_cast<std::uint8_t>((i >> (m - 1 - k)) & 1U);
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace diagnostics_detail

/// Exhaustively checks, for one model:
///   bit_flip_gain         Δ_k(x) = (1 - 2x_k) g_k(x) against f(x^(k)) - f(x)
///   hamming_lipschitz     |f(x) - f(y)| ≤ L_H d_H(x, y), all pairs
///   spectral_control      |f(x) - f(y)| ≤ √d_H (‖h‖₂ + √m ‖J‖₂), all pairs
///   gain_zero_mean        E[Δ_k] = 0 under the uniform measure
///   gain_second_moment    closed-form E[Δ_k²] against enumeration
///   truncation_pointwise  |f(x) - f_r(x)| ≤ (m/2) ‖J - J_r‖₂, all r and x
///   truncation_gap        f(x*) - f(x_r*) ≤ m ‖J - J_r‖₂, all r
/// Checks whose cost exceeds `limits` are reported as skipped.
inline std::vector<PropositionCheck> verify_propositions(const QuboModel& q, VerificationLimits limits = {}) {
  using diagnostics_detail::record;
  const std::size_t m = q.dim();
  const double tol = limits.tolerance;
  std::vector<PropositionCheck> out;
  auto skipped = [&](const std::string& name, std::size_t cap) {
    PropositionCheck c;
    c.name = name;
    c.skipped = true;
    c.note = "m = " + std::to_string(m) + " exceeds the exhaustive cap of " + std::to_string(cap);
    return c;
  };

  const bool per_code = m >= 1 && m <= limits.per_code_max_bits;
  const bool pairwise = m >= 1 && m <= limits.pairwise_max_bits;
  const auto codes = per_code ? diagnostics_detail::all_codes(m) : std::vector<Code>{};
  Vector values(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) values[i] = predict(q, codes[i]);
  const auto spec = spectrum(q);
  const double j2 = m ? std::abs(spec.values.front()) : 0.0;

  if (per_code) {
    auto gain = named_check("bit_flip_gain");
    auto mean = named_check("gain_zero_mean");
    auto second = named_check("gain_second_moment");
    const auto rug = ruggedness(q);
    Vector sum(m, 0.0), sum_sq(m, 0.0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const SearchState state(q, codes[i]);
      for (std::size_t k = 0; k < m; ++k) {
        // codes[] is in lexicographic order with bit k at weight 2^(m-1-k).
        const std::size_t j = i ^ (std::size_t{1} << (m - 1 - k));
        const double exact = values[j] - values[i];
        const double fast = state.flip_gain(k);
        record(gain, std::abs(fast - exact), 0.0, tol);
        sum[k] += exact;
        sum_sq[k] += exact * exact;
      }
    }
    const double count = static_cast<double>(codes.size());
    for (std::size_t k = 0; k < m; ++k) {
      record(mean, std::abs(sum[k] / count), 0.0, tol);
      record(second, std::abs(sum_sq[k] / count - rug.per_bit[k]), 0.0, tol * std::max(1.0, rug.per_bit[k]));
    }
    out.push_back(gain);
    out.push_back(mean);
    out.push_back(second);
  } else {
    out.push_back(skipped("bit_flip_gain", limits.per_code_max_bits));
    out.push_back(skipped("gain_zero_mean", limits.per_code_max_bits));
    out.push_back(skipped("gain_second_moment", limits.per_code_max_bits));
  }

  if (pairwise) {
    auto lip = named_check("hamming_lipschitz");
    auto spc = named_check("spectral_control");
    const double lh = lipschitz_constant(q);
    const double h2 = h_2_norm(q);
    const double root_m = std::sqrt(static_cast<double>(m));
    for (std::size_t a = 0; a < codes.size(); ++a)
      for (std::size_t b = 0; b < codes.size(); ++b) {
        const auto d = static_cast<double>(std::popcount(a ^ b));
        const double diff = std::abs(values[a] - values[b]);
        record(lip, diff, lh * d, tol);
        record(spc, diff, std::sqrt(d) * (h2 + root_m * j2), tol);
      }
    out.push_back(lip);
    out.push_back(spc);
  } else {
    out.push_back(skipped("hamming_lipschitz", limits.pairwise_max_bits));
    out.push_back(skipped("spectral_control", limits.pairwise_max_bits));
  }

  if (per_code) {
    auto point = named_check("truncation_pointwise");
    auto gap = named_check("truncation_gap");
    const auto full = brute_force_optimum(q);
    for (std::size_t r = 0; r <= m; ++r) {
      const auto t = truncate(q, r, spec);
      for (std::size_t i = 0; i < codes.size(); ++i) {
        record(point, std::abs(values[i] - predict(t.model, codes[i])), t.pointwise_bound, tol);
      }
      const auto trunc_opt = brute_force_optimum(t.model);
      record(gap, full.value - predict(q, trunc_opt.code), t.gap_bound, tol);
    }
    out.push_back(point);
    out.push_back(gap);
  } else {
    out.push_back(skipped("truncation_pointwise", limits.per_code_max_bits));
    out.push_back(skipped("truncation_gap", limits.per_code_max_bits));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const DiagnosticsReport& r) {
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : r.truncation_bounds)
    bounds.push_back({{"rank", b.rank}, {"pointwise_bound", b.pointwise_bound}, {"gap_bound", b.gap_bound}});
  j = nlohmann::json{{"m", r.m},
                     {"h_inf_norm", r.h_inf_norm},
                     {"h_2_norm", r.h_2_norm},
                     {"J_inf_norm", r.J_inf_norm},
                     {"J_2_norm", r.J_2_norm},
                     {"J_frobenius", r.J_frobenius},
                     {"lipschitz_LH", r.lipschitz_LH},
                     {"ruggedness", r.ruggedness},
                     {"per_bit_second_moments", r.per_bit_second_moments},
                     {"ruggedness_frobenius_approx", r.ruggedness_frobenius_approx},
                     {"per_bit_variance_approx", r.per_bit_variance_approx},
                     {"eigenvalues", r.eigenvalues},
                     {"truncation_bounds", bounds}};
  j["effective_rank"] = r.effective_rank ? nlohmann::json(*r.effective_rank) : nlohmann::json();
}

inline void to_json(nlohmann::json& j, const PropositionCheck& c) {
  j = nlohmann::json{{"name", c.name},
                     {"passed", c.passed()},
                     {"skipped", c.skipped},
                     {"checked", c.checked},
                     {"violations", c.violations},
                     {"equality_cases", c.equality_cases}};
  j["max_excess"] = c.checked ? nlohmann::json(c.max_excess) : nlohmann::json();
  if (!c.note.empty()) j["note"] = c.note;
}

inline void to_json(nlohmann::json& j, const IdentifiabilityReport& r) {
  j = nlohmann::json{{"p", r.p},
                     {"N", r.n},
                     {"design_rank", r.design_rank},
                     {"identifiable", r.identifiable},
                     {"training_residual", r.training_residual},
                     {"unseen_difference", r.unseen_difference},
                     {"probed_codes", r.probed_codes}};
  j["null_vector"] = r.null_vector ? nlohmann::json(*r.null_vector) : nlohmann::json();
  j["witness"] = r.witness ? nlohmann::json(code_to_string(*r.witness)) : nlohmann::json();
}

}  // namespace latqubo
