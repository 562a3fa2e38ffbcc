#include <gtest/gtest.h>

#include "latqubo/projection.hpp"
#include "test_oracles.hpp"

using namespace latqubo;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng, double anisotropy = 1.0) {
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal() * std::pow(anisotropy, static_cast<double>(j)) + 3.0;
  return x;
}

/// Leading eigenvector of the unbiased covariance by power iteration.
Vector power_top_component(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Vector mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / n;
  Matrix c(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) c(a, b) += (x(i, a) - mean[a]) * (x(i, b) - mean[b]) / (n - 1);
  Vector v(d, 1.0);
  for (int it = 0; it < 2000; ++it) {
    Vector w(d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) w[a] += c(a, b) * v[b];
    double nrm = 0;
    for (double t : w) nrm += t * t;
    nrm = std::sqrt(nrm);
    for (std::size_t a = 0; a < d; ++a) v[a] = w[a] / nrm;
  }
  return v;
}

}  // namespace

TEST(Pca, MatchesPowerIterationAndIsOrthonormal) {
  Rng rng(1);
  const Matrix x = random_matrix(200, 6, rng, 0.6);
  const auto model = fit_pca(x, 4);
  const Vector ref = power_top_component(x);
  double d = 0;
  for (std::size_t j = 0; j < 6; ++j) d += model.weights(0, j) * ref[j];
  EXPECT_NEAR(std::abs(d), 1.0, 1e-9);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      double g = 0;
      for (std::size_t j = 0; j < 6; ++j) g += model.weights(a, j) * model.weights(b, j);
      EXPECT_NEAR(g, a == b ? 1.0 : 0.0, 1e-10);
    }
  const auto& ev = *model.explained_variance;
  for (std::size_t k = 1; k < ev.size(); ++k) EXPECT_GE(ev[k - 1], ev[k]);
}

TEST(Pca, ProjectedVarianceEqualsEigenvalue) {
  Rng rng(2);
  const Matrix x = random_matrix(300, 5, rng, 0.7);
  const auto model = fit_pca(x, 3);
  const Matrix z = project(model, x);
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0, ss = 0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
      s += z(i, k);
      ss += z(i, k) * z(i, k);
    }
    EXPECT_NEAR(s / z.rows(), 0.0, 1e-10);
    EXPECT_NEAR(ss / (z.rows() - 1), (*model.explained_variance)[k], 1e-9);
  }
}

TEST(Pca, FullRankReconstructionIsExact) {
  Rng rng(3);
  const Matrix x = random_matrix(20, 4, rng);
  EXPECT_NEAR(reconstruction_mse(fit_pca(x, 4), x), 0.0, 1e-20);
  EXPECT_GT(reconstruction_mse(fit_pca(x, 1), x), 0.1);
}

TEST(Pca, RejectsBadDimensions) {
  Rng rng(4);
  const Matrix x = random_matrix(5, 8, rng);
  EXPECT_THROW(fit_pca(x, 0), DimensionError);
  EXPECT_THROW(fit_pca(x, 5), DimensionError);
  EXPECT_NO_THROW(fit_pca(x, 4));
}

TEST(RandomProjection, DeterministicWithUnitScaledEntries) {
  const auto a = fit_random_projection(200, 50, 9);
  const auto b = fit_random_projection(200, 50, 9);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_NE(a.weights, fit_random_projection(200, 50, 10).weights);
  double ss = 0;
  for (double v : a.weights.values()) ss += v * v;
  EXPECT_NEAR(ss / a.weights.values().size(), 1.0 / 200, 0.05 / 200);
}

TEST(Median, EvenAndOdd) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(median({7}), 7.0);
}

TEST(Binarize, StrictThreshold) {
  const Matrix z(3, 1, {1.0, 2.0, 3.0});
  const auto codes = binarize_projected(z, Vector{2.0});
  EXPECT_EQ(codes(0, 0), 0);
  EXPECT_EQ(codes(1, 0), 0);
  EXPECT_EQ(codes(2, 0), 1);
}

TEST(Binarize, MedianBalanceOnDistinctColumns) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 * (1 + rng.uniform_index(40));
    Matrix z(n, 4);
    for (double& v : z.values()) v = rng.normal();
    const auto codes = binarize_projected(z, column_medians(z));
    for (std::size_t k = 0; k < 4; ++k) {
      std::size_t ones = 0;
      for (std::size_t i = 0; i < n; ++i) ones += codes(i, k);
      EXPECT_EQ(ones, n / 2);
    }
  }
}

TEST(Binarize, RequiresFittedThresholds) {
  Rng rng(6);
  const Matrix x = random_matrix(10, 3, rng);
  const auto model = fit_pca(x, 2);
  EXPECT_THROW(binarize(model, x), ValidationError);
  EXPECT_EQ(binarize(fit_thresholds(model, x), x).size(), 10u);
  EXPECT_THROW(project(model, Matrix(2, 4)), DimensionError);
}

TEST(Entropy, CollapsedAndBalanced) {
  const BinaryCodeSet constant(10, 3, std::vector<std::uint8_t>(30, 1));
  const auto d0 = latent_diagnostics(constant);
  EXPECT_EQ(d0.mean_entropy, 0.0);
  EXPECT_EQ(d0.active_dims, 0u);
  BinaryCodeSet balanced(4, 2);
  balanced.set(0, 0, true);
  balanced.set(1, 0, true);
  balanced.set(2, 1, true);
  balanced.set(3, 1, true);
  const auto d1 = latent_diagnostics(balanced);
  EXPECT_NEAR(d1.mean_entropy, 1.0, 1e-12);
  EXPECT_EQ(d1.active_dims, 2u);
  EXPECT_NEAR(binary_entropy(0.25), 0.8112781244591328, 1e-15);
}

TEST(Projection, JsonRoundTrip) {
  Rng rng(7);
  const Matrix x = random_matrix(30, 5, rng);
  const auto model = fit_thresholds(fit_pca(x, 3), x);
  const nlohmann::json j = model;
  const auto back = nlohmann::json::parse(j.dump()).get<ProjectionModel>();
  EXPECT_EQ(back.weights, model.weights);
  EXPECT_EQ(back.thresholds, model.thresholds);
  EXPECT_EQ(back.mean, model.mean);
  EXPECT_EQ(binarize(back, x), binarize(model, x));
}
