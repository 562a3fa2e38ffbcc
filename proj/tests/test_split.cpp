#include <gtest/gtest.h>

#include <set>

#include "latqubo/dataset.hpp"

using namespace latqubo;

namespace {

Vector random_fitness(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vector y(n);
  for (double& v : y) v = rng.normal();
  return y;
}

void expect_disjoint(const SplitAssignment& s, std::size_t n) {
  std::set<std::size_t> all;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (auto i : *part) {
      EXPECT_LT(i, n);
      EXPECT_TRUE(all.insert(i).second) << "index " << i << " appears twice";
    }
}

}  // namespace

TEST(Split, TwoStageSizesForTen) {
  const auto s = make_split(random_fitness(10, 1), SplitMode::two_stage_random, {0.7, 0.1, 0.2}, 42);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.test.size(), 2u);
  expect_disjoint(s, 10);
}

TEST(Split, StratifiedRatioOneKeepsEverything) {
  const Vector y{1, 2, 3, 4};
  const auto s = make_split(y, SplitMode::stratified_quantile, {1.0, 0.0, 0.0}, 0, 4);
  EXPECT_EQ(s.train, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_TRUE(s.val.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(Split, DeterministicUnderSeed) {
  const auto y = random_fitness(200, 3);
  for (auto mode : {SplitMode::two_stage_random, SplitMode::stratified_quantile}) {
    const auto a = make_split(y, mode, {0.7, 0.1, 0.2}, 7);
    const auto b = make_split(y, mode, {0.7, 0.1, 0.2}, 7);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.val, b.val);
    EXPECT_EQ(a.test, b.test);
    const auto c = make_split(y, mode, {0.7, 0.1, 0.2}, 8);
    EXPECT_NE(a.train, c.train);
  }
}

TEST(Split, PartitionPropertiesOverRandomInstances) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed, "split-test");
    const std::size_t n = 20 + rng.uniform_index(300);
    const std::size_t bins = 1 + rng.uniform_index(10);
    const auto y = random_fitness(n, seed);
    for (auto mode : {SplitMode::two_stage_random, SplitMode::stratified_quantile}) {
      const auto s = make_split(y, mode, {0.7, 0.1, 0.2}, seed, bins);
      expect_disjoint(s, n);
      EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), n);
      if (mode == SplitMode::stratified_quantile) {
        // Each bin contributes within ±1 of its quota, so totals are within ±bins.
        EXPECT_LE(std::abs(static_cast<double>(s.train.size()) - 0.7 * n), static_cast<double>(bins));
        EXPECT_LE(std::abs(static_cast<double>(s.test.size()) - 0.2 * n), static_cast<double>(bins));
      }
    }
  }
}

TEST(Split, StratifiedPerBinTrainFraction) {
  const auto y = random_fitness(500, 9);
  const std::size_t bins = 10;
  const auto s = make_split(y, SplitMode::stratified_quantile, {0.7, 0.1, 0.2}, 1, bins);
  Vector sorted = y;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (std::size_t b = 1; b < bins; ++b) edges.push_back(quantile_sorted(sorted, double(b) / bins));
  std::vector<int> total(bins), train(bins);
  auto bin_of = [&](double v) { return std::lower_bound(edges.begin(), edges.end(), v) - edges.begin(); };
  for (std::size_t i = 0; i < y.size(); ++i) ++total[bin_of(y[i])];
  for (auto i : s.train) ++train[bin_of(y[i])];
  for (std::size_t b = 0; b < bins; ++b) {
    ASSERT_GT(total[b], 0);
    EXPECT_LE(std::abs(double(train[b]) / total[b] - 0.7), 1.0 / total[b] + 1e-12);
  }
}

TEST(Split, UnassignedRemainderWhenRatiosBelowOne) {
  const auto y = random_fitness(100, 4);
  for (auto mode : {SplitMode::two_stage_random, SplitMode::stratified_quantile}) {
    const auto s = make_split(y, mode, {0.5, 0.1, 0.2}, 2);
    expect_disjoint(s, 100);
    EXPECT_LT(s.train.size() + s.val.size() + s.test.size(), 100u);
    EXPECT_NEAR(double(s.train.size()), 50.0, 10.0);
  }
}

TEST(Split, DegenerateBinsAreReported) {
  const Vector y(50, 1.0);
  EXPECT_THROW(make_split(y, SplitMode::stratified_quantile, {0.7, 0.1, 0.2}, 0, 5), DegenerateStratificationError);
  EXPECT_NO_THROW(make_split(y, SplitMode::stratified_quantile, {0.7, 0.1, 0.2}, 0, 1));
}

TEST(Split, RejectsBadRatios) {
  const auto y = random_fitness(20, 1);
  EXPECT_THROW(make_split(y, SplitMode::two_stage_random, {0.8, 0.2, 0.2}, 0), ValidationError);
  EXPECT_THROW(make_split(y, SplitMode::two_stage_random, {-0.1, 0.5, 0.2}, 0), ValidationError);
  EXPECT_THROW(make_split(y, SplitMode::stratified_quantile, {0.7, 0.1, 0.2}, 0, 30), ValidationError);
}

TEST(Split, LargestRemainderSumsExactly) {
  const double w[3] = {0.7, 0.1, 0.2};
  for (std::size_t n = 0; n < 50; ++n) {
    const auto c = largest_remainder(n, w);
    EXPECT_EQ(c[0] + c[1] + c[2], n);
  }
  const double tie[2] = {0.5, 0.5};
  EXPECT_EQ(largest_remainder(3, tie), (std::vector<std::size_t>{2, 1}));
}

TEST(Split, JsonRoundTrip) {
  const auto s = make_split(random_fitness(30, 5), SplitMode::two_stage_random, {0.7, 0.1, 0.2}, 5);
  const nlohmann::json j = s;
  const auto back = j.get<SplitAssignment>();
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.test, s.test);
  EXPECT_EQ(back.mode, s.mode);
}
