#include <gtest/gtest.h>

#include "latqubo/qubo.hpp"
#include "test_oracles.hpp"

using namespace latqubo;

namespace {

QuboModel two_bit() {
  QuboModel q = QuboModel::zeros(2);
  q.h = {1, 1};
  q.J(0, 1) = q.J(1, 0) = -3;
  return q;
}

BinaryCodeSet random_codes(std::size_t n, std::size_t m, Rng& rng) {
  BinaryCodeSet c(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) c.set(i, k, rng.bernoulli(0.5));
  return c;
}

BinaryCodeSet hypercube(std::size_t m) {
  std::vector<Code> all;
  for (std::uint64_t v = 0; v < (1ull << m); ++v) all.push_back(oracle::code_of(v, m));
  return BinaryCodeSet::from_codes(all);
}

}  // namespace

TEST(Features, CountsAndOrder) {
  EXPECT_EQ(FeatureMap::feature_count(16), 136u);
  EXPECT_EQ(FeatureMap::feature_count(64), 2080u);
  EXPECT_EQ(FeatureMap(64).size(), 2080u);
  EXPECT_EQ(FeatureMap(3).features(Code{1, 0, 1}), (Vector{1, 0, 1, 0, 1, 0}));
  const FeatureMap map(5);
  std::size_t i = 0;
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t l = k + 1; l < 5; ++l, ++i) EXPECT_EQ(map.pairs()[i], std::make_pair(k, l));
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Code x = oracle::random_bits(7, rng);
    EXPECT_EQ(FeatureMap(7).features(x), oracle::naive_features(x));
  }
}

TEST(Predict, HandValues) {
  const auto q = two_bit();
  EXPECT_EQ(predict(q, Code{0, 0}), 0.0);
  EXPECT_EQ(predict(q, Code{1, 0}), 1.0);
  EXPECT_EQ(predict(q, Code{1, 1}), -1.0);
  QuboModel c = QuboModel::zeros(3);
  c.intercept = 2.5;
  EXPECT_EQ(predict(c, Code{1, 0, 1}), 2.5);
  EXPECT_THROW(predict(q, Code{1}), DimensionError);
}

TEST(Predict, MatchesFeatureDotAndNaive) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 1 + rng.uniform_index(12);
    auto q = oracle::random_qubo(m, rng);
    q.intercept = rng.normal();
    const auto w = pack_weights(q);
    for (int s = 0; s < 20; ++s) {
      const Code x = oracle::random_bits(m, rng);
      const double via_features = dot(FeatureMap(m).features(x), w) + q.intercept;
      EXPECT_NEAR(predict(q, x), via_features, 1e-9);
      EXPECT_NEAR(predict(q, x), oracle::naive_value(q, x), 1e-9);
    }
    Code ones(m, 1);
    double expect = q.intercept;
    for (double v : q.h) expect += v;
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t l = k + 1; l < m; ++l) expect += q.J(k, l);
    EXPECT_NEAR(predict(q, ones), expect, 1e-9);
  }
}

TEST(FitRidge, SingleFeatureClosedForm) {
  const auto sol = ridge_solve(Matrix(2, 1, {0, 1}), Vector{0, 1}, 1e-3, false);
  EXPECT_NEAR(sol.weights[0], 1.0 / (1.0 + 1e-3), 1e-15);
  EXPECT_EQ(sol.intercept, 0.0);
}

TEST(FitRidge, ZeroTargets) {
  Rng rng(3);
  const auto codes = random_codes(40, 5, rng);
  const auto q = fit_ridge(codes, Vector(40, 0.0), 0.1);
  EXPECT_EQ(max_abs(q.h), 0.0);
  EXPECT_EQ(frobenius_norm(q.J), 0.0);
  EXPECT_EQ(q.intercept, 0.0);
  EXPECT_TRUE(q.has_zero_diagonal());
  q.validate();
}

TEST(FitRidge, PlantedHypercubeRecovery) {
  Rng rng(4);
  auto planted = oracle::random_qubo(8, rng);
  planted.intercept = 0.7;
  const auto codes = hypercube(8);
  Vector y(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) y[i] = oracle::naive_value(planted, codes.code(i));
  const auto q = fit_ridge(codes, y, 1e-8);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(q.h[k], planted.h[k], 1e-4);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 8; ++l) EXPECT_NEAR(q.J(k, l), planted.J(k, l), 1e-4);
  EXPECT_NEAR(q.intercept, 0.7, 1e-4);
}

TEST(FitRidge, MatchesNormalEquationsOracle) {
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    const auto codes = random_codes(120, 6, rng);
    Vector y(120);
    for (double& v : y) v = rng.normal();
    const auto q = fit_ridge(codes, y, 1e-2);
    const auto ref = oracle::ridge_normal_equations(build_features(codes), y, 1e-2);
    const auto w = pack_weights(q);
    for (std::size_t j = 0; j < w.size(); ++j) EXPECT_NEAR(w[j], ref.weights[j], 1e-6 * (1 + std::abs(ref.weights[j])));
    EXPECT_NEAR(q.intercept, ref.intercept, 1e-6 * (1 + std::abs(ref.intercept)));
  }
}

TEST(FitRidge, StationarityOnCenteredSystem) {
  Rng rng(6);
  const auto codes = random_codes(80, 5, rng);
  Vector y(80);
  for (double& v : y) v = rng.normal() + 3.0;
  const double lambda = 0.05;
  const auto w = pack_weights(fit_ridge(codes, y, lambda));
  Matrix phi = build_features(codes);
  Vector mean(phi.cols(), 0.0);
  double ym = 0;
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    ym += y[i] / 80;
    for (std::size_t j = 0; j < phi.cols(); ++j) mean[j] += phi(i, j) / 80;
  }
  for (std::size_t j = 0; j < phi.cols(); ++j) {
    double grad = 0;
    for (std::size_t i = 0; i < phi.rows(); ++i) {
      double r = y[i] - ym;
      for (std::size_t k = 0; k < phi.cols(); ++k) r -= (phi(i, k) - mean[k]) * w[k];
      grad += (phi(i, j) - mean[j]) * r;
    }
    EXPECT_NEAR(grad, lambda * w[j], 1e-6 * (1 + std::abs(lambda * w[j])));
  }
}

TEST(FitRidge, ShrinksMonotonicallyWithLambda) {
  Rng rng(7);
  const auto codes = random_codes(60, 6, rng);
  Vector y(60);
  for (double& v : y) v = rng.normal();
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda = 1e-3; lambda <= 1e3 * 1.0001; lambda *= 10) {
    const auto q = fit_ridge(codes, y, lambda);
    const double size = norm2(q.h) + frobenius_norm(q.J);
    EXPECT_LT(size, prev);
    prev = size;
  }
}

TEST(FitRidge, CollapsedBitsStillSolve) {
  BinaryCodeSet codes(10, 4);  // all-zero codes: Φ = 0
  Vector y{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto q = fit_ridge(codes, y, 1e-3);
  EXPECT_NEAR(q.intercept, 5.5, 1e-12);
  EXPECT_THROW(fit_ridge(codes, y, 0.0), ValidationError);
  EXPECT_THROW(fit_ridge(codes, Vector{1, 2}, 1e-3), DimensionError);
}

TEST(Metrics, Examples) {
  const auto a = regression_metrics(Vector{1, 2, 3}, Vector{10, 20, 30});
  EXPECT_NEAR(a.spearman, 1.0, 1e-15);
  EXPECT_NEAR(a.pearson, 1.0, 1e-15);
  const auto b = regression_metrics(Vector{1, 1, 2}, Vector{1, 2, 3});
  EXPECT_NEAR(b.spearman, 1.5 / std::sqrt(3.0), 1e-12);
  const auto c = regression_metrics(Vector{4, 5, 6}, Vector{4, 5, 6});
  EXPECT_EQ(c.rmse, 0.0);
  EXPECT_EQ(c.mae, 0.0);
  EXPECT_EQ(c.r2, 1.0);
  const auto d = regression_metrics(Vector{1, 1, 1}, Vector{1, 2, 3});
  EXPECT_EQ(d.spearman, 0.0);
  EXPECT_TRUE(d.degenerate);
  EXPECT_THROW(regression_metrics(Vector{}, Vector{}), ValidationError);
  EXPECT_THROW(regression_metrics(Vector{1}, Vector{1, 2}), DimensionError);
}

TEST(Metrics, SpearmanInvariantUnderMonotoneTransforms) {
  Rng rng(8);
  Vector p(100), t(100);
  for (std::size_t i = 0; i < 100; ++i) {
    p[i] = rng.normal();
    t[i] = p[i] + rng.normal();
  }
  const double base = regression_metrics(p, t).spearman;
  Vector e = p, c = p;
  for (double& v : e) v = std::exp(v);
  for (double& v : c) v = v * v * v;
  EXPECT_NEAR(regression_metrics(e, t).spearman, base, 1e-12);
  EXPECT_NEAR(regression_metrics(c, t).spearman, base, 1e-12);
  const auto m = regression_metrics(p, t);
  double mean_err = 0;
  for (std::size_t i = 0; i < 100; ++i) mean_err += (p[i] - t[i]) / 100;
  EXPECT_GE(m.rmse, std::abs(mean_err));
  EXPECT_LE(std::abs(m.pearson), 1.0);
}

TEST(Serialization, JsonRoundTripAndExport) {
  Rng rng(9);
  auto q = oracle::random_qubo(5, rng);
  q.intercept = 1.25;
  q.lambda = 1e-3;
  const nlohmann::json j = q;
  EXPECT_EQ(j["J_upper"].size(), 10u);
  const auto back = nlohmann::json::parse(j.dump()).get<QuboModel>();
  EXPECT_EQ(back.h, q.h);
  EXPECT_EQ(back.J, q.J);
  EXPECT_EQ(back.intercept, q.intercept);

  const auto text = export_qubo_text(two_bit());
  EXPECT_EQ(text, "0 0 -1\n1 1 -1\n0 1 3\n");
}
