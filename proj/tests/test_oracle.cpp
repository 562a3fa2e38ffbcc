#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "latqubo/oracle.hpp"
#include "test_oracles.hpp"

using namespace latqubo;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng) {
  Matrix x(n, d);
  for (double& v : x.values()) v = rng.normal();
  return x;
}

GpGrid tiny_noise_grid() {
  GpGrid g;
  g.noise_variance = {1e-6};
  return g;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("latqubo_oracle_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(RidgeOracle, ExactLinearTarget) {
  Rng rng(21);
  const Matrix x = random_matrix(40, 4, rng);
  const auto s = Standardizer::fit(x);
  const Matrix z = s.apply(x);
  Vector y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = 2.0 * z(i, 0);
  const auto o = fit_ridge_oracle(x, y, 1e-12);
  EXPECT_NEAR(o.weights[0], 2.0, 1e-6);
  for (std::size_t j = 1; j < 4; ++j) EXPECT_NEAR(o.weights[j], 0.0, 1e-6);
}

TEST(RidgeOracle, ConstantTargetAndHugeAlpha) {
  Rng rng(22);
  const Matrix x = random_matrix(30, 3, rng);
  const auto c = fit_ridge_oracle(x, Vector(30, 4.5));
  for (double w : c.weights) EXPECT_NEAR(w, 0.0, 1e-12);
  EXPECT_NEAR(c.intercept, 4.5, 1e-12);

  Vector y(30);
  for (double& v : y) v = rng.normal();
  double mean = 0;
  for (double v : y) mean += v / 30;
  const auto big = fit_ridge_oracle(x, y, 1e12);
  for (double p : predict_oracle(big, x)) EXPECT_NEAR(p, mean, 1e-9);
}

TEST(RidgeOracle, ZeroWeightPredictsIntercept) {
  RidgeOracle o;
  o.weights = {0, 0};
  o.feature_means = {1, 2};
  o.feature_stds = {1, 1};
  o.intercept = -0.75;
  Rng rng(23);
  for (double p : predict_oracle(o, random_matrix(5, 2, rng))) EXPECT_EQ(p, -0.75);
  EXPECT_THROW(predict_oracle(o, Matrix(1, 3)), DimensionError);
}

TEST(RidgeOracle, MatchesLeastSquaresAsAlphaVanishes) {
  Rng rng(24);
  for (int t = 0; t < 5; ++t) {
    const Matrix x = random_matrix(60, 6, rng);
    Vector y(60);
    for (double& v : y) v = rng.normal();
    const auto o = fit_ridge_oracle(x, y, 1e-10);
    const Matrix z = Standardizer::fit(x).apply(x);
    const auto ls = oracle::ridge_normal_equations(z, y, 0.0);
    for (std::size_t j = 0; j < 6; ++j)
      EXPECT_NEAR(o.weights[j], ls.weights[j], 1e-6 * std::max(1.0, std::abs(ls.weights[j])));
    EXPECT_NEAR(o.intercept, ls.intercept, 1e-6 * std::max(1.0, std::abs(ls.intercept)));
  }
}

TEST(RidgeOracle, StationarityOnStandardizedDesign) {
  Rng rng(25);
  const Matrix x = random_matrix(50, 5, rng);
  Vector y(50);
  for (double& v : y) v = rng.normal();
  const auto o = fit_ridge_oracle(x, y, 1.0);
  const Matrix z = Standardizer::fit(x).apply(x);
  // Zᵀ(y − Zw − b) = αw and Σ(y − Zw − b) = 0.
  Vector resid(50);
  for (std::size_t i = 0; i < 50; ++i) resid[i] = y[i] - dot(z.row(i), o.weights) - o.intercept;
  double sum = 0;
  for (double r : resid) sum += r;
  EXPECT_NEAR(sum, 0.0, 1e-9);
  for (std::size_t j = 0; j < 5; ++j) {
    double g = 0;
    for (std::size_t i = 0; i < 50; ++i) g += z(i, j) * resid[i];
    EXPECT_NEAR(g, o.weights[j], 1e-6 * std::max(1.0, std::abs(o.weights[j])));
  }
}

TEST(RidgeOracle, ZeroVarianceColumnIsExcludedWithWarning) {
  Rng rng(26);
  Matrix x = random_matrix(20, 3, rng);
  for (std::size_t i = 0; i < 20; ++i) x(i, 1) = 7.0;
  Vector y(20);
  for (std::size_t i = 0; i < 20; ++i) y[i] = x(i, 0) - x(i, 2);
  std::ostringstream warn;
  const auto o = fit_ridge_oracle(x, y, 1.0, &warn);
  EXPECT_EQ(o.weights[1], 0.0);
  EXPECT_EQ(o.feature_stds[1], 1.0);
  EXPECT_FALSE(warn.str().empty());
  for (double s : o.feature_stds) EXPECT_GT(s, 0.0);
}

TEST(RidgeOracle, Errors) {
  EXPECT_THROW(fit_ridge_oracle(Matrix(1, 2), Vector{1.0}), ValidationError);
  EXPECT_THROW(fit_ridge_oracle(Matrix(3, 2), Vector{1.0, 2.0}), LengthMismatchError);
}

TEST(GpOracle, DuplicatedInputAveragesTargets) {
  Matrix x(2, 3);
  for (double& v : x.values()) v = 0.3;
  const auto g = fit_gp_oracle(x, Vector{0.0, 1.0});
  EXPECT_NEAR(predict_oracle(g, x)[0], 0.5, 1e-9);
}

TEST(GpOracle, NearInterpolationAtMinimumNoise) {
  Rng rng(27);
  const Matrix x = random_matrix(50, 3, rng);
  Vector y(50);
  for (std::size_t i = 0; i < 50; ++i) y[i] = std::sin(x(i, 0)) + x(i, 1) * x(i, 2);
  const auto g = fit_gp_oracle(x, y, tiny_noise_grid());
  EXPECT_EQ(g.params.noise_variance, 1e-6);
  EXPECT_LE(max_abs_diff(predict_oracle(g, x), y), 1e-3);
  EXPECT_TRUE(std::isfinite(g.log_marginal_likelihood));
}

TEST(GpOracle, FarPointRevertsToTargetMean) {
  Rng rng(28);
  const Matrix x = random_matrix(20, 2, rng);
  Vector y(20);
  double mean = 0;
  for (double& v : y) mean += (v = rng.normal()) / 20;
  GpGrid grid;
  grid.length_scale = {0.5};
  const auto g = fit_gp_oracle(x, y, grid);
  Matrix far(1, 2);
  far(0, 0) = far(0, 1) = 1e4;
  EXPECT_NEAR(predict_oracle(g, far)[0], mean, 1e-9);
}

TEST(GpOracle, SingletonGridIsSelected) {
  Rng rng(29);
  const Matrix x = random_matrix(10, 2, rng);
  Vector y(10);
  for (double& v : y) v = rng.normal();
  GpGrid grid;
  grid.signal_variance = {2.0};
  grid.length_scale = {0.7};
  grid.noise_variance = {0.05};
  const auto g = fit_gp_oracle(x, y, grid);
  EXPECT_EQ(g.params.signal_variance, 2.0);
  EXPECT_EQ(g.params.length_scale, 0.7);
  EXPECT_EQ(g.params.noise_variance, 0.05);
}

TEST(GpOracle, SelectedPointAttainsGridMaximum) {
  Rng rng(30);
  const Matrix x = random_matrix(15, 2, rng);
  Vector y(15);
  for (std::size_t i = 0; i < 15; ++i) y[i] = x(i, 0) + 0.1 * rng.normal();
  const GpGrid grid;
  const auto g = fit_gp_oracle(x, y, grid);
  Vector yn(15);
  for (std::size_t i = 0; i < 15; ++i) yn[i] = (y[i] - g.target_mean) / g.target_std;
  const Matrix sq = gp_detail::squared_distances(g.inputs, g.inputs);
  for (double c : grid.signal_variance)
    for (double l : grid.length_scale)
      for (double n : grid.noise_variance)
        if (const auto cand = gp_detail::evaluate(sq, yn, {c, l, n})) {
          EXPECT_TRUE(std::isfinite(cand->lml));
          EXPECT_LE(cand->lml, g.log_marginal_likelihood);
        }
}

TEST(GpOracle, TargetShiftInvariance) {
  Rng rng(31);
  const Matrix x = random_matrix(25, 3, rng);
  Vector y(25);
  for (double& v : y) v = rng.normal();
  Vector shifted = y;
  for (double& v : shifted) v += 1000.0;
  const Matrix q = random_matrix(10, 3, rng);
  const auto a = predict_oracle(fit_gp_oracle(x, y), q);
  auto b = predict_oracle(fit_gp_oracle(x, shifted), q);
  for (double& v : b) v -= 1000.0;
  EXPECT_LE(max_abs_diff(a, b), 1e-9);
}

TEST(GpOracle, CapacityAndBounds) {
  Rng rng(32);
  const Matrix x = random_matrix(12, 2, rng);
  const Vector y(12, 1.0);
  EXPECT_THROW(fit_gp_oracle(x, y, {}, 10), CapacityError);
  GpGrid bad;
  bad.length_scale = {1e4};
  EXPECT_THROW(fit_gp_oracle(x, y, bad), ValidationError);
  EXPECT_THROW(predict_oracle(fit_gp_oracle(x, y), Matrix(1, 3)), DimensionError);
}

TEST(OracleIo, RidgeAndGpRoundTrip) {
  const auto dir = scratch_dir("io");
  Rng rng(33);
  const Matrix x = random_matrix(20, 3, rng);
  Vector y(20);
  for (double& v : y) v = rng.normal();
  const Matrix q = random_matrix(6, 3, rng);

  const Oracle ridge = fit_ridge_oracle(x, y);
  save_oracle(dir / "ridge.json", ridge);
  const auto r2 = load_oracle(dir / "ridge.json");
  EXPECT_EQ(kind_of(r2), OracleKind::ridge);
  EXPECT_EQ(predict_oracle(r2, q), predict_oracle(ridge, q));

  OracleSettings gs;
  gs.kind = OracleKind::gp;
  const Oracle gp = fit_oracle(x, y, gs);
  save_oracle(dir / "gp.json", gp);
  EXPECT_TRUE(std::filesystem::exists(dir / "gp.factor.npy"));
  const auto g2 = load_oracle(dir / "gp.json");
  EXPECT_EQ(kind_of(g2), OracleKind::gp);
  EXPECT_EQ(predict_oracle(g2, q), predict_oracle(gp, q));
  std::filesystem::remove_all(dir);
}

TEST(OracleKindTest, Parse) {
  EXPECT_EQ(parse_oracle_kind("gp"), OracleKind::gp);
  EXPECT_EQ(to_string(OracleKind::ridge), "ridge");
  EXPECT_THROW(parse_oracle_kind("xgboost"), ValidationError);
}

TEST(OracleMetrics, SpearmanOneOnMonotoneTarget) {
  Rng rng(34);
  const Matrix x = random_matrix(30, 2, rng);
  Vector y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = 3.0 * x(i, 0) + 1.0;
  const auto o = fit_ridge_oracle(x, y, 1e-10);
  const auto m = regression_metrics(predict_oracle(o, x), y);
  EXPECT_EQ(m.spearman, 1.0);
  EXPECT_GT(m.r2, 1.0 - 1e-9);
}
