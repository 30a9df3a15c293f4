#include "smdim/dimensions.hpp"
#include "smdim/instances.hpp"
#include "smdim/verify.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace smdim;

namespace {

int smdim_of(const Setting& s, const Rational& g) {
  SmdimEngine engine(s, GammaValue::of(g));
  return engine.dimension(s.full_space());
}

/// Tiny instance with arbitrary rational losses in {0, 1/2, 1, 3/2, 2}.
InstanceSpec random_general(std::mt19937_64& rng) {
  InstanceSpec spec;
  auto& p = spec.problem;
  const std::size_t nx = 1 + rng() % 2, ny = 2 + rng() % 2, nz = 2 + rng() % 2, nh = 1 + rng() % 4;
  for (std::size_t i = 0; i < nx; ++i) p.instances.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < ny; ++i) p.labels.push_back("y" + std::to_string(i));
  for (std::size_t i = 0; i < nz; ++i) p.predictions.push_back("z" + std::to_string(i));
  for (std::size_t y = 0; y < ny; ++y) {
    std::vector<Rational> row;
    for (std::size_t z = 0; z < nz; ++z) row.push_back(make_rational(static_cast<long>(rng() % 5), 2));
    p.loss.push_back(row);
  }
  p.bound_c = 2;
  std::set<std::vector<std::size_t>> seen;
  for (std::size_t h = 0; h < nh; ++h) {
    std::vector<std::size_t> row;
    for (std::size_t x = 0; x < nx; ++x) row.push_back(rng() % nz);
    if (seen.insert(row).second) spec.hypotheses.table.push_back(row);
  }
  return spec;
}

}  // namespace

TEST(Smdim, BinaryConstantsHaveDimensionOne) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  EXPECT_EQ(smdim_of(s, make_rational(1, 4)), 1);
  EXPECT_EQ(smdim_of(s, Rational(0)), 1);
  EXPECT_EQ(smdim_of(s, make_rational(1, 2)), 1);
  // The symmetric game has value 1/2, so no scale above it shatters.
  EXPECT_EQ(smdim_of(s, make_rational(3, 4)), 0);
}

TEST(Smdim, HilbertConstantsShatterAtOneHalf) {
  const auto s = make_builtin("hilbert").setting();
  EXPECT_GE(smdim_of(s, make_rational(1, 2)), 1);
}

TEST(Smdim, AgreesWithTreeDefinitionOracle) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 150; ++i) {
    const auto spec = random_general(rng);
    const auto s = spec.setting();
    for (const auto& g : {Rational(0), make_rational(1, 4), make_rational(1, 2), Rational(1)}) {
      EXPECT_EQ(smdim_of(s, g), oracle::smdim(s, g)) << "case " << i << " gamma " << to_string(g);
    }
  }
}

TEST(Smdim, MonotoneInGamma) {
  std::mt19937_64 rng(8);
  const std::vector<Rational> grid{0, make_rational(1, 8), make_rational(1, 4), make_rational(1, 2), 1,
                                   make_rational(3, 2)};
  for (int i = 0; i < 100; ++i) {
    const auto s = random_general(rng).setting();
    int previous = smdim_of(s, grid[0]);
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const int d = smdim_of(s, grid[j]);
      EXPECT_LE(d, previous);
      previous = d;
    }
  }
}

TEST(Smdim, MonotoneInTheVersionSpace) {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_multiclass(rng).setting();
    SmdimEngine engine(s, GammaValue::of(make_rational(1, 4)));
    const std::size_t n = s.num_hypotheses();
    VersionSpace v(n);
    for (std::size_t h = 0; h < n; ++h) {
      if (rng() % 2) v.insert(h);
    }
    if (v.empty()) continue;
    EXPECT_LE(engine.dimension(v), engine.dimension(s.full_space()));
    EXPECT_LE(engine.dimension(v), static_cast<int>(v.count()) - 1);
  }
}

TEST(Smdim, CertificateReplays) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 60; ++i) {
    const auto spec = random_general(rng);
    const auto s = spec.setting();
    const auto gamma = GammaValue::of(make_rational(1, 4));
    SmdimEngine engine(s, gamma);
    const auto cert = engine.certificate(s.full_space());
    EXPECT_EQ(cert.dimension, engine.dimension(s.full_space()));
    cert.for_each_node([&](const ShatteringNode& node) {
      // Re-solve the node's game from scratch and check every edge.
      const auto rows = node.rows(s);
      EXPECT_EQ(solve_min_max(rows).value, node.value);
      EXPECT_TRUE(gamma.certifies(node.value));
      for (const auto& e : node.candidates) {
        EXPECT_EQ(e.child, restrict(s, node.space, node.instance, e.candidate));
        EXPECT_GE(e.child_dimension, node.depth - 1);
        if (node.depth > 1 && e.child != node.space) {
          EXPECT_TRUE(cert.has_node(e.child, node.depth - 1));
        }
      }
    });
  }
}

TEST(Smdim, CertificateJsonShape) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  SmdimEngine engine(s, GammaValue::of(make_rational(1, 4)));
  const auto doc = engine.certificate(s.full_space()).to_json();
  EXPECT_EQ(doc["dimension"], 1);
  EXPECT_EQ(doc["gamma"], "1/4");
  ASSERT_EQ(doc["nodes"].size(), 1u);
  EXPECT_EQ(doc["nodes"][0]["value"], "1/2");
}

TEST(Smdim, MemoCapIsEnforced) {
  const auto s = make_builtin("multiclass:instances=2,hyp=all").setting();
  SmdimEngine engine(s, GammaValue::of(make_rational(1, 4)), 2);
  EXPECT_THROW(engine.dimension(s.full_space()), Error);
}

TEST(Smdim, EmptySpace) {
  const auto s = make_builtin("multiclass:binary-constants").setting();
  SmdimEngine engine(s, GammaValue::of(make_rational(1, 4)));
  EXPECT_EQ(engine.dimension(VersionSpace(2)), -1);
  EXPECT_THROW(smdim::smdim(s, VersionSpace(2), GammaValue::of(Rational(0))), Error);
  EXPECT_THROW(GammaValue::of(Rational(-1)), Error);
}

TEST(Ldim, KnownValues) {
  const auto p1 = make_builtin("multiclass:binary-constants").setting();
  EXPECT_EQ(ldim_k(p1, p1.full_space(), 1), 1);
  const auto p3 = make_builtin("list").setting();
  EXPECT_EQ(ldim_k(p3, p3.full_space(), 2), 1);
  const auto all = make_builtin("multiclass:instances=2,hyp=all").setting();
  EXPECT_EQ(ldim_k(all, all.full_space(), 1), 2);
}

TEST(Ldim, AgreesWithMistakeTreeOracle) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_multiclass(rng).setting();
    EXPECT_EQ(ldim_k(s, s.full_space(), 1), oracle::ldim(s, 1));
  }
  for (int i = 0; i < 100; ++i) {
    const int k = 1 + i % 2;
    const auto s = random_list(rng, k).setting();
    EXPECT_EQ(ldim_k(s, s.full_space(), k), oracle::ldim(s, k));
  }
}

TEST(Ldim, RejectsPredictionsCoveringTooManyLabels) {
  const auto p3 = make_builtin("list").setting();
  EXPECT_THROW(ldim_k(p3, p3.full_space(), 1), Error);
  const auto reg = make_builtin("regression").setting();
  EXPECT_THROW(ldim_k(reg, reg.full_space(), 1), Error);
}

TEST(SmdimEqualsLdim, MulticlassAtEveryScaleUpToOneHalf) {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_multiclass(rng).setting();
    const int l = ldim_k(s, s.full_space(), 1);
    for (const auto& g : {Rational(0), make_rational(1, 8), make_rational(1, 4), make_rational(1, 2)}) {
      EXPECT_EQ(smdim_of(s, g), l);
    }
  }
}

TEST(SmdimEqualsLdim, ListClassesBelowOneOverKPlusOne) {
  std::mt19937_64 rng(62);
  for (int i = 0; i < 60; ++i) {
    const int k = 1 + i % 2;
    const auto s = random_list(rng, k).setting();
    const int l = ldim_k(s, s.full_space(), k);
    for (long m = 1; m <= 3; ++m) EXPECT_EQ(smdim_of(s, make_rational(1, m * (k + 1))), l);
  }
}

TEST(Seqfat, KnownValues) {
  const auto p4 = make_builtin("regression").setting();
  EXPECT_EQ(seqfat(p4, p4.full_space(), Rational(1)), 1);
  EXPECT_EQ(seqfat(p4, p4.full_space(), make_rational(1, 2)), 1);
  EXPECT_EQ(seqfat(p4, p4.full_space(), Rational(2)), 0);
  EXPECT_THROW(seqfat(p4, p4.full_space(), Rational(0)), Error);
  const auto p1 = make_builtin("multiclass:binary-constants").setting();
  EXPECT_NO_THROW(seqfat(p1, p1.full_space(), Rational(1)));  // labels "0", "1" parse as numbers
  const auto p6 = make_builtin("hilbert").setting();
  EXPECT_THROW(seqfat(p6, p6.full_space(), Rational(1)), Error);
}

TEST(Seqfat, NeverExceedsSmdimOnGrids) {
  std::mt19937_64 rng(63);
  for (int i = 0; i < 60; ++i) {
    const auto s = random_grid_regression(rng).setting();
    for (const auto& g : {make_rational(1, 4), make_rational(1, 2), Rational(1)}) {
      EXPECT_LE(seqfat(s, s.full_space(), g), smdim_of(s, g));
    }
  }
}

TEST(Msdim, SingletonFeedbackMatchesBinaryConstants) {
  SetValuedProblem p{{"x0"}, {"a", "b"}, {{0}, {1}}};
  const HypothesisClass h{{{0}, {1}}};
  EXPECT_EQ(msdim(p, h, VersionSpace::full(2), GammaValue::of(make_rational(1, 4))), 1);
  EXPECT_EQ(msdim_by_definition(p, h, make_rational(1, 4)), 1);
}

TEST(Msdim, DelegationMatchesDefinition) {
  std::mt19937_64 rng(64);
  for (int i = 0; i < 100; ++i) {
    const auto [p, h] = random_setvalued(rng);
    for (const auto& g : {make_rational(1, 4), make_rational(1, 2), Rational(1)}) {
      EXPECT_EQ(msdim(p, h, VersionSpace::full(h.size()), GammaValue::of(g)), msdim_by_definition(p, h, g));
    }
  }
}
