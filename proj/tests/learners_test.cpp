#include "smdim/bounds.hpp"
#include "smdim/instances.hpp"
#include "smdim/learners.hpp"
#include "smdim/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace smdim;

namespace {

std::shared_ptr<MrsoaPolicy> policy_for(const Setting& s, const Rational& gamma) {
  return std::make_shared<MrsoaPolicy>(std::make_shared<SmdimEngine>(s, GammaValue::of(gamma)));
}

}  // namespace

TEST(Mrsoa, EqualizesOnBinaryConstants) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  auto policy = policy_for(s, make_rational(1, 4));
  EXPECT_EQ(policy->mixture(s.full_space(), 0), Mixture::uniform(2));
  EXPECT_EQ(policy->mixture(VersionSpace::of(2, {0}), 0), Mixture::dirac(2, 0));
}

TEST(Mrsoa, UpdateRestrictsTheVersionSpace) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  auto policy = policy_for(s, make_rational(1, 4));
  auto state = mrsoa_initial_state(policy->engine());
  state = mrsoa_update(s, state, 0, 0, Rational(0));
  EXPECT_EQ(state.version_space, VersionSpace::of(2, {0}));
  try {
    mrsoa_update(s, state, 0, 1, Rational(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stream not ε_t-realizable"), std::string::npos);
  }
  const auto lenient = mrsoa_update(s, state, 0, 1, Rational(0), RealizabilityMode::kLenient);
  EXPECT_TRUE(lenient.version_space.empty());
}

TEST(Mrsoa, RequiresPositiveGamma) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  EXPECT_THROW(policy_for(s, Rational(0)), Error);
}

// Every candidate the mixture fails to beat by γ leads to a version space of
// strictly smaller dimension.
TEST(Mrsoa, MistakesStrictlyDecreaseTheDimension) {
  std::mt19937_64 rng(12);
  const auto gamma = make_rational(1, 4);
  for (int i = 0; i < 80; ++i) {
    const auto spec = i % 2 ? random_multiclass(rng) : random_grid_regression(rng);
    const auto s = spec.setting();
    auto policy = policy_for(s, gamma);
    auto& engine = policy->engine();
    for (int trial = 0; trial < 4; ++trial) {
      VersionSpace v(s.num_hypotheses());
      for (std::size_t h = 0; h < s.num_hypotheses(); ++h) {
        if (rng() % 2) v.insert(h);
      }
      if (v.empty()) continue;
      const int dim = engine.dimension(v);
      for (std::size_t x = 0; x < s.num_instances(); ++x) {
        const auto& mu = policy->mixture(v, x);
        for (const auto& c : engine.enumerate_candidates(v, x)) {
          if (expected_loss(s, mu, c.candidate.label) >= c.candidate.threshold + gamma) {
            EXPECT_LT(engine.dimension(c.child), dim);
          }
        }
      }
    }
  }
}

TEST(Mrsoa, CumulativeLossOnRealizableStream) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  const auto gamma = make_rational(1, 4);
  MrsoaLearner learner(policy_for(s, gamma));
  Rational total = 0;
  for (int t = 0; t < 5; ++t) {
    total += expected_loss(s, learner.predict(0), 1);
    learner.update(0, 1, Rational(0));
  }
  EXPECT_LE(total, bounds::mrsoa_cumulative(0, gamma, 5, s.bound_c(), 1));
}

TEST(ExpertPool, SizeMatchesFormula) {
  for (std::size_t t = 1; t <= 6; ++t) {
    for (int d = 0; d <= 2; ++d) {
      for (const auto& alpha : {make_rational(1, 2), make_rational(1, 3), Rational(1)}) {
        const auto pool = build_expert_pool(t, d, alpha, 1);
        EXPECT_EQ(BigInt(pool.size()), expert_pool_size(t, d, alpha, 1));
        std::set<std::pair<std::vector<std::size_t>, std::vector<std::string>>> ids;
        for (const auto& e : pool) {
          EXPECT_LE(e.timepoints.size(), static_cast<std::size_t>(d));
          EXPECT_TRUE(std::is_sorted(e.timepoints.begin(), e.timepoints.end()));
          std::vector<std::string> th;
          for (const auto& v : e.thresholds) th.push_back(to_string(v));
          ids.insert({e.timepoints, th});
        }
        EXPECT_EQ(ids.size(), pool.size());
      }
    }
  }
}

TEST(ExpertPool, GridAndBudget) {
  EXPECT_EQ(loss_grid(make_rational(1, 3), 1).size(), 4u);
  EXPECT_EQ(loss_grid(make_rational(2, 5), 1).back(), make_rational(6, 5));
  EXPECT_THROW(build_expert_pool(100, 3, make_rational(1, 100), 1, 1000), Error);
  EXPECT_THROW(loss_grid(0, 1), Error);
}

TEST(MultiplicativeWeights, UniformWeightsAverage) {
  const std::vector<Mixture> experts{Mixture::dirac(2, 0), Mixture::dirac(2, 1)};
  EXPECT_EQ(mw_aggregate(mw_initial_state(2, 4), experts), Mixture::uniform(2));
}

// Against fixed experts MW's regret to the best expert stays within c·sqrt(2T ln N).
TEST(MultiplicativeWeights, RegretAgainstBestExpert) {
  const auto s = make_builtin("multiclass:labels=3").setting();
  std::mt19937_64 rng(4);
  for (int run = 0; run < 50; ++run) {
    const std::size_t n = 2 + rng() % 4, rounds = 1 + rng() % 30;
    std::vector<Mixture> experts;
    for (std::size_t i = 0; i < n; ++i) experts.push_back(Mixture::dirac(3, rng() % 3));
    auto state = mw_initial_state(n, rounds);
    double learner = 0;
    std::vector<double> expert_loss(n, 0);
    for (std::size_t t = 0; t < rounds; ++t) {
      const std::size_t y = rng() % 3;
      auto [played, next] = mw_step(state, s, experts, y);
      learner += to_double(expected_loss(s, played, y));
      for (std::size_t i = 0; i < n; ++i) expert_loss[i] += to_double(expected_loss(s, experts[i], y));
      state = std::move(next);
    }
    const double best = *std::min_element(expert_loss.begin(), expert_loss.end());
    EXPECT_LE(learner - best, bounds::mw_regret(1, rounds, n) + 1e-9);
  }
}

TEST(Agnostic, PoolAndHorizon) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  AgnosticLearner learner(policy_for(s, make_rational(1, 4)), 3);
  // α = 1/3, c = 1: grid of 4 points, d = 1, so 1 + 4·3 experts.
  EXPECT_EQ(learner.pool_size(), 13u);
  for (int t = 0; t < 3; ++t) {
    learner.predict(0);
    learner.update(0, t % 2, std::nullopt);
  }
  EXPECT_THROW(learner.predict(0), Error);
}

TEST(Ftl, PlaysTheLeaderWithLowestIndexTies) {
  const auto s = make_builtin("hilbert").setting();
  EXPECT_EQ(ftl_step(s, Stream{{0, 0, {}}, {0, 0, {}}, {0, 0, {}}}, 0), Mixture::dirac(3, 0));
  EXPECT_EQ(ftl_step(s, Stream{{0, 0, {}}, {0, 1, {}}}, 0), Mixture::dirac(3, 0));
  FtlLearner learner(s);
  learner.update(0, 1, std::nullopt);
  EXPECT_EQ(learner.predict(0), Mixture::dirac(3, 1));
  const auto nonconstant = make_builtin("multiclass:instances=2,hyp=all").setting();
  EXPECT_THROW(FtlLearner{nonconstant}, Error);
}

TEST(RandomMixture, ReproducibleFromSeed) {
  RandomMixtureLearner a(3, 99), b(3, 99);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(a.predict(0), b.predict(0));
}
