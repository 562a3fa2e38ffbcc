#include <gtest/gtest.h>

#include <set>

#include "latqubo/optimizers.hpp"
#include "test_oracles.hpp"

using namespace latqubo;

namespace {

QuboModel two_bit() {
  QuboModel q = QuboModel::zeros(2);
  q.h = {1, 1};
  q.J(0, 1) = q.J(1, 0) = -3;
  return q;
}

OptimizationResult run(OptimizerKind kind, const QuboModel& q, std::uint64_t seed, const BinaryCodeSet* seeds) {
  OptimizerParams p;
  p.sa.steps = 3000;
  p.ga.generations = 40;
  p.rs.samples = 2000;
  p.lbo.samples = 500;
  return run_optimizer(kind, q, seed, p, seeds);
}

const OptimizerKind kAll[] = {OptimizerKind::sa, OptimizerKind::ga, OptimizerKind::rs, OptimizerKind::ghc,
                              OptimizerKind::lbo};

}  // namespace

TEST(SearchState, FlipGainExamples) {
  const auto q = two_bit();
  SearchState s(q, Code{0, 0});
  EXPECT_EQ(s.flip_gain(0), 1.0);
  SearchState t(q, Code{1, 0});
  EXPECT_EQ(t.flip_gain(1), -2.0);
  EXPECT_THROW(t.flip_gain(2), DimensionError);
  QuboModel z = QuboModel::zeros(3);
  z.h = {0, 0, 0};
  SearchState u(z, Code{1, 0, 1});
  EXPECT_EQ(u.flip_gain(0), 0.0);
  EXPECT_EQ(u.flip_gain(1), 0.0);
}

TEST(SearchState, IncrementalMatchesFromScratch) {
  Rng rng(1);
  for (std::size_t m : {4u, 8u, 12u}) {
    for (int t = 0; t < 300; ++t) {
      const auto q = oracle::random_qubo(m, rng);
      const Code x = oracle::random_bits(m, rng);
      const auto k = static_cast<std::size_t>(rng.uniform_index(m));
      const SearchState s(q, x);
      EXPECT_NEAR(s.flip_gain(k), oracle::naive_value(q, oracle::flipped(x, k)) - oracle::naive_value(q, x), 1e-9);
    }
  }
}

TEST(SearchState, LongFlipSequencesStayExact) {
  Rng rng(2);
  auto q = oracle::random_qubo(12, rng);
  q.intercept = 4.0;
  Code x = oracle::random_bits(12, rng);
  SearchState s(q, x);
  for (int i = 0; i < 1000; ++i) {
    const auto k = static_cast<std::size_t>(rng.uniform_index(12));
    s.apply_flip(k);
    x[k] ^= 1U;
  }
  EXPECT_EQ(s.code(), x);
  EXPECT_NEAR(s.value(), oracle::naive_value(q, x) - q.intercept, 1e-9);
  const SearchState fresh(q, x);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(s.local_fields()[k], fresh.local_fields()[k], 1e-9);
}

TEST(SearchState, FlipIsAnInvolution) {
  Rng rng(3);
  const auto q = oracle::random_qubo(6, rng);
  SearchState s(q, oracle::random_bits(6, rng));
  const auto before = s;
  s.apply_flip(2);
  s.apply_flip(2);
  EXPECT_EQ(s.code(), before.code());
  EXPECT_NEAR(s.value(), before.value(), 1e-12);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(s.local_fields()[k], before.local_fields()[k], 1e-12);
}

TEST(SearchState, ZeroCouplingLeavesFieldsAlone) {
  QuboModel q = QuboModel::zeros(3);
  q.h = {1, -2, 3};
  SearchState s(q, Code{0, 0, 0});
  const Vector g(s.local_fields().begin(), s.local_fields().end());
  s.apply_flip(1);
  EXPECT_EQ(Vector(s.local_fields().begin(), s.local_fields().end()), g);
  EXPECT_EQ(s.value(), -2.0);
}

TEST(SimulatedAnnealing, TwoBitOptimum) {
  EXPECT_EQ(simulated_annealing(two_bit(), 0).best_value, 1.0);
  QuboModel z = QuboModel::zeros(4);
  z.intercept = 2.0;
  EXPECT_EQ(simulated_annealing(z, 3).best_value, 2.0);
}

TEST(GeneticAlgorithm, ElitismKeepsPlantedOptimum) {
  Rng rng(4);
  const auto q = oracle::random_qubo(10, rng);
  const auto opt = oracle::naive_argmax(q);
  std::vector<Code> init;
  for (int i = 0; i < 64; ++i) init.push_back(oracle::random_bits(10, rng));
  init[17] = opt.code;
  const auto r = genetic_algorithm(q, 1, {}, init);
  EXPECT_NEAR(r.best_value, opt.value, 1e-9);
}

TEST(GeneticAlgorithm, NoVariationIsAFixedPoint) {
  Rng rng(5);
  const auto q = oracle::random_qubo(8, rng);
  const Code c = oracle::random_bits(8, rng);
  std::vector<Code> init(64, c);
  GaParams p;
  p.crossover_p = 0.0;
  p.mutation_rate = 0.0;
  p.generations = 20;
  const auto r = genetic_algorithm(q, 2, p, init);
  EXPECT_EQ(r.best_code, c);
  EXPECT_THROW(genetic_algorithm(oracle::random_qubo(1, rng), 0), DimensionError);
}

TEST(RandomSearch, ExhaustsThreeBits) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const auto q = oracle::random_qubo(3, rng);
    const auto r = random_search(q, t);
    EXPECT_EQ(r.best_code, oracle::naive_argmax(q).code);
  }
}

TEST(GreedyHillClimb, HandTrace) {
  const auto r = greedy_hill_climb(two_bit(), Code{0, 0}, 0);
  EXPECT_EQ(r.best_code, (Code{1, 0}));
  EXPECT_TRUE(r.converged);
  const SearchState s(two_bit(), r.best_code);
  EXPECT_EQ(s.local_fields()[0], 1.0);
  EXPECT_EQ(s.local_fields()[1], -2.0);
}

TEST(GreedyHillClimb, LocalMaxStartIsUnchanged) {
  const auto r = greedy_hill_climb(two_bit(), Code{0, 1}, 0);
  EXPECT_EQ(r.best_code, (Code{0, 1}));
  EXPECT_EQ(r.trajectory.size(), 1u);
}

TEST(GreedyHillClimb, OutputIsLocallyOptimal) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto q = oracle::random_qubo(10, rng);
    const auto r = greedy_hill_climb(q, std::nullopt, t);
    ASSERT_TRUE(r.converged);
    for (std::size_t k = 0; k < 10; ++k) {
      EXPECT_LE(oracle::naive_value(q, oracle::flipped(r.best_code, k)) - oracle::naive_value(q, r.best_code), 1e-12);
    }
  }
}

TEST(KernelAcquisition, Examples) {
  const BinaryCodeSet seeds = BinaryCodeSet::from_codes({Code{0, 0}});
  const auto a = kernel_acquisition(seeds, Vector{0.0}, Code{1, 1});
  EXPECT_NEAR(a.mean, 0.0, 1e-15);
  EXPECT_NEAR(a.uncertainty, 1.0 - std::exp(-4.0 / 32.0), 1e-15);
  EXPECT_NEAR(a.value, 0.1175030974154046, 1e-12);
  const auto b = kernel_acquisition(seeds, Vector{2.5}, Code{0, 0});
  EXPECT_EQ(b.uncertainty, 0.0);
  EXPECT_EQ(b.value, 2.5);
  const BinaryCodeSet many = BinaryCodeSet::from_codes({Code{0, 0, 1}, Code{1, 1, 0}, Code{1, 0, 1}});
  EXPECT_NEAR(kernel_acquisition(many, Vector{3, 3, 3}, Code{0, 1, 1}).mean, 3.0, 1e-15);
}

TEST(KernelSearch, UnderflowIsFlagged) {
  QuboModel q = QuboModel::zeros(64);
  BinaryCodeSet seeds = BinaryCodeSet::from_codes({Code(64, 0)});
  LboParams p;
  p.length_scale = 0.05;
  p.samples = 50;
  const auto r = latent_kernel_search(q, seeds, 1, p);
  EXPECT_TRUE(r.weights_underflowed);
  EXPECT_THROW(latent_kernel_search(q, BinaryCodeSet(0, 64), 1, p), ValidationError);
}

TEST(Optimizers, NeverExceedBruteForce) {
  Rng rng(8);
  for (std::size_t m : {3u, 6u, 11u, 14u}) {
    const auto q = oracle::random_qubo(m, rng);
    const double best = oracle::naive_argmax(q).value;
    std::vector<Code> seed_list;
    for (int i = 0; i < 20; ++i) seed_list.push_back(oracle::random_bits(m, rng));
    const auto seeds = BinaryCodeSet::from_codes(seed_list);
    for (auto kind : kAll) {
      const auto r = run(kind, q, 5, &seeds);
      EXPECT_LE(r.best_value, best + 1e-9) << to_string(kind);
      EXPECT_NEAR(r.best_value, oracle::naive_value(q, r.best_code), 1e-9);
    }
  }
}

TEST(Optimizers, DeterministicAndShiftInvariant) {
  Rng rng(9);
  auto q = oracle::random_qubo(12, rng);
  std::vector<Code> seed_list;
  for (int i = 0; i < 30; ++i) seed_list.push_back(oracle::random_bits(12, rng));
  const auto seeds = BinaryCodeSet::from_codes(seed_list);
  auto shifted = q;
  shifted.intercept += 123.5;
  for (auto kind : kAll) {
    const auto a = run(kind, q, 11, &seeds);
    const auto b = run(kind, q, 11, &seeds);
    EXPECT_EQ(a.best_code, b.best_code);
    EXPECT_EQ(a.best_value, b.best_value);
    EXPECT_EQ(a.evaluations, b.evaluations);
    const auto c = run(kind, shifted, 11, &seeds);
    EXPECT_EQ(c.best_code, a.best_code) << to_string(kind);
    EXPECT_NEAR(c.best_value - a.best_value, 123.5, 1e-12);
  }
}

TEST(Optimizers, ParamsAndJson) {
  OptimizerParams p;
  p.set("sa.steps", 10);
  p.set("lbo.beta", 0.5);
  EXPECT_EQ(p.sa.steps, 10u);
  EXPECT_EQ(p.lbo.beta, 0.5);
  EXPECT_THROW(p.set("sa.steps", 1.5), ValidationError);
  EXPECT_THROW(p.set("nope", 1), ValidationError);
  EXPECT_EQ(parse_optimizer("ghc"), OptimizerKind::ghc);
  EXPECT_THROW(parse_optimizer("xx"), ValidationError);

  const auto r = run(OptimizerKind::ga, two_bit(), 1, nullptr);
  const nlohmann::json j = r;
  const auto back = nlohmann::json::parse(j.dump()).get<OptimizationResult>();
  EXPECT_EQ(back.best_code, r.best_code);
  EXPECT_EQ(back.best_value, r.best_value);
  EXPECT_EQ(back.trajectory.size(), r.trajectory.size());
}

TEST(CandidatePool, KeepsBestDistinct) {
  CandidatePool pool(3);
  pool.offer(1.0, Code{0, 0});
  pool.offer(5.0, Code{0, 1});
  pool.offer(5.0, Code{0, 1});  // duplicate
  pool.offer(3.0, Code{1, 0});
  EXPECT_FALSE(pool.admits(1.0));
  pool.offer(4.0, Code{1, 1});  // evicts the 1.0 entry
  pool.offer(3.0, Code{0, 0});  // equal to the floor: rejected
  const auto codes = pool.codes();
  ASSERT_EQ(codes.size(), 3u);
  EXPECT_EQ(codes[0], (Code{0, 1}));
  EXPECT_EQ(codes[1], (Code{1, 1}));
  EXPECT_EQ(codes[2], (Code{1, 0}));
  CandidatePool none(0);
  none.offer(1.0, Code{1});
  EXPECT_TRUE(none.codes().empty());
}

TEST(CandidatePool, TiesKeepFirstOffer) {
  CandidatePool pool(2);
  pool.offer(2.0, Code{1, 1});
  pool.offer(2.0, Code{0, 0});
  pool.offer(2.0, Code{0, 1});
  const auto codes = pool.codes();
  EXPECT_EQ(codes, (std::vector<Code>{{1, 1}, {0, 0}}));
}

TEST(Optimizers, CandidateLists) {
  Rng rng(12);
  const auto q = oracle::random_qubo(10, rng);
  std::vector<Code> seed_list;
  for (int i = 0; i < 20; ++i) seed_list.push_back(oracle::random_bits(10, rng));
  const auto seeds = BinaryCodeSet::from_codes(seed_list);
  for (auto kind : kAll) {
    const auto r = run(kind, q, 3, &seeds);
    ASSERT_EQ(r.candidates.size(), kDefaultCandidates) << to_string(kind);
    std::set<Code> distinct;
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      const auto& c = r.candidates[i];
      distinct.insert(c.code);
      EXPECT_NEAR(c.value, oracle::naive_value(q, c.code), 1e-9);
      // lbo ranks by acquisition, so its values need not be sorted.
      if (kind != OptimizerKind::lbo && i > 0) EXPECT_LE(c.value, r.candidates[i - 1].value) << to_string(kind);
    }
    EXPECT_EQ(distinct.size(), r.candidates.size());
    // The pool holds the run's best code first (lbo: the acquisition argmax).
    EXPECT_EQ(r.candidates.front().code, r.best_code) << to_string(kind);
  }
  // Three bits and 2000 samples: random search sees all 8 codes.
  const auto small = oracle::random_qubo(3, rng);
  const auto all = run(OptimizerKind::rs, small, 0, nullptr);
  EXPECT_EQ(all.candidates.size(), 8u);
  EXPECT_EQ(run_optimizer(OptimizerKind::rs, small, 0, {}, nullptr, 2).candidates.size(), 2u);
}
