#pragma once

// Synthetic embedding datasets with a planted linear fitness, used for
// end-to-end checks and demos.

#include <cmath>
#include <cstdint>
#include <filesystem>

#include "latqubo/dataset.hpp"
#include "latqubo/linalg.hpp"
#include "latqubo/npy.hpp"
#include "latqubo/rng.hpp"

namespace latqubo {

struct SyntheticSpec {
  std::size_t n = 2000;
  std::size_t d = 128;
  std::size_t components = 4;     // mixture components
  std::size_t factors = 8;        // shared low-rank covariance directions
  double center_scale = 2.0;      // std of component means
  double isotropic_noise = 0.5;   // std of per-coordinate noise
  double noise_fraction = 0.1;    // label noise std as a fraction of the signal std
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset dataset;
  Vector planted_weights;  // fitness ≈ planted_weights · e
  Vector signal;           // noiseless fitness
};

/// e = μ_c + A s + σ ε with c uniform over components, s ~ N(0, I),
/// ε ~ N(0, I); fitness = w·e + noise with std noise_fraction · std(w·e).
inline SyntheticData make_synthetic(const SyntheticSpec& spec) {
  Rng rng(spec.seed, "synthetic");
  const std::size_t d = spec.d;
  Matrix centers(spec.components, d);
  for (double& v : centers.values()) v = spec.center_scale * rng.normal();
  Matrix loadings(d, spec.factors);
  for (double& v : loadings.values()) v = rng.normal();
  Vector w(d);
  for (double& v : w) v = rng.normal() / std::sqrt(static_cast<double>(d));

  Matrix x(spec.n, d);
  Vector s(spec.factors);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t c = rng.uniform_index(spec.components);
    for (double& v : s) v = rng.normal();
    for (std::size_t j = 0; j < d; ++j) {
      double e = centers(c, j) + spec.isotropic_noise * rng.normal();
      for (std::size_t f = 0; f < spec.factors; ++f) e += loadings(j, f) * s[f];
      x(i, j) = e;
    }
  }
  Vector signal(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) signal[i] = dot(x.row(i), w);
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(spec.n);
  double var = 0.0;
  for (double v : signal) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(spec.n));
  Vector y(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) y[i] = signal[i] + spec.noise_fraction * sd * rng.normal();
  return {Dataset(std::move(x), std::move(y)), std::move(w), std::move(signal)};
}

/// Writes `embeddings.npy` and `fitness.npy` (both float64) into `dir`.
inline void save_synthetic(const std::filesystem::path& dir, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  write_npy(dir / "embeddings.npy", data.dataset.embeddings());
  write_npy(dir / "fitness.npy", data.dataset.fitness());
}

}  // namespace latqubo
