#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "posetmc/enumeration.hpp"
#include "posetmc/moves.hpp"
#include "posetmc/observables.hpp"
#include "test_support.hpp"

using namespace posetmc;
using posetmc::fixtures::poset_of;
using posetmc::fixtures::random_poset;
using posetmc::fixtures::relations_of;

using Rels = std::vector<std::pair<int, int>>;

TEST(RelationMove, Examples) {
  Poset p = construct_standard(StartKind::antichain, 2);
  EXPECT_EQ(relation_move(p, 0, 1).action, MoveAction::added);
  EXPECT_EQ(p, construct_standard(StartKind::chain, 2));
  EXPECT_EQ(relation_move(p, 0, 1).action, MoveAction::removed);
  EXPECT_EQ(p, construct_standard(StartKind::antichain, 2));

  Poset c = construct_standard(StartKind::chain, 3);
  const auto o = relation_move(c, 0, 2);
  EXPECT_EQ(o, (MoveOutcome{MoveKind::relation, 0, 2, MoveAction::noop}));
  EXPECT_EQ(c, construct_standard(StartKind::chain, 3));
}

TEST(LinkMove, Examples) {
  Poset c = construct_standard(StartKind::chain, 3);
  EXPECT_EQ(link_move(c, 0, 1).action, MoveAction::removed);
  EXPECT_EQ(relations_of(c), (Rels{{1, 2}}));

  Poset a = construct_standard(StartKind::antichain, 3);
  EXPECT_EQ(link_move(a, 0, 2).action, MoveAction::added);
  EXPECT_EQ(relations_of(a), (Rels{{0, 2}}));

  Poset v = poset_of(3, {{0, 2}, {1, 2}});
  EXPECT_EQ(link_move(v, 0, 1).action, MoveAction::noop);
  EXPECT_EQ(relations_of(v), (Rels{{0, 2}, {1, 2}}));
}

TEST(LinkMove, AddRelatesWholeCones) {
  // incpast(1) = {0, 1}, incfut(2) = {2, 3}
  Poset p = poset_of(4, {{0, 1}, {2, 3}});
  EXPECT_EQ(link_move(p, 1, 2).action, MoveAction::added);
  EXPECT_EQ(p, construct_standard(StartKind::chain, 4));
}

TEST(Moves, RejectBadPairs) {
  Poset p(3);
  EXPECT_THROW(relation_move(p, 1, 0), std::invalid_argument);
  EXPECT_THROW(link_move(p, 0, 3), std::invalid_argument);
  EXPECT_THROW(link_move(p, 2, 2), std::invalid_argument);
  EXPECT_THROW(link_move_stepwise(p, -1, 2), std::invalid_argument);
}

TEST(LinkMove, MatchesStepwiseDefinition) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Poset base = random_poset(2 + int(seed % 40), seed);
    const int n = base.size();
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) {
        Poset fast = base, slow = base;
        const auto a = link_move(fast, x, y);
        const auto b = link_move_stepwise(slow, x, y);
        ASSERT_EQ(a, b) << "seed " << seed << " pair " << x << "," << y;
        ASSERT_EQ(fast, slow) << "seed " << seed << " pair " << x << "," << y;
        ASSERT_EQ(fast.link_matrix(), transitive_reduction(fast));
      }
  }
}

// Each move is its own inverse: an accepted move applied again restores the
// poset, and a no-op leaves it unchanged.
TEST(Moves, Reversible) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Poset base = random_poset(2 + int(seed % 25), seed);
    const int n = base.size();
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y)
        for (auto move : {relation_move, link_move}) {
          Poset p = base;
          const auto o = move(p, x, y);
          ASSERT_TRUE(validate(p.relation()).empty());
          if (!o.changed()) {
            ASSERT_EQ(p, base);
            continue;
          }
          ASSERT_NE(p, base);
          const auto back = move(p, x, y);
          ASSERT_TRUE(back.changed());
          ASSERT_NE(back.action, o.action);
          ASSERT_EQ(p, base) << "seed " << seed << " pair " << x << "," << y;
        }
  }
}

TEST(Moves, RelationMoveTogglesExactlyOneRelation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Poset base = random_poset(3 + int(seed % 15), seed);
    for (int x = 0; x < base.size(); ++x)
      for (int y = x + 1; y < base.size(); ++y) {
        Poset p = base;
        const auto o = relation_move(p, x, y);
        const int delta = p.relation_count() - base.relation_count();
        if (!o.changed()) continue;
        EXPECT_EQ(delta, o.action == MoveAction::added ? 1 : -1);
        EXPECT_NE(p.precedes(x, y), base.precedes(x, y));
      }
  }
}

TEST(McmcStep, TwoElementsAlwaysToggle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rng(seed);
    Poset p(2);
    for (int i = 0; i < 50; ++i) {
      const bool was = p.precedes(0, 1);
      const auto o = mcmc_step(p, rng);
      EXPECT_EQ(o.x, 0);
      EXPECT_EQ(o.y, 1);
      EXPECT_TRUE(o.changed());
      EXPECT_NE(p.precedes(0, 1), was);
    }
  }
}

TEST(McmcStep, Deterministic) {
  RandomStream a(77), b(77);
  Poset p = random_poset(20, 3), q = p;
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(mcmc_step(p, a), mcmc_step(q, b));
  EXPECT_EQ(p, q);
}

TEST(McmcStep, FairCoinAndUniformPairs) {
  RandomStream rng(5);
  const int n = 6, steps = 100000;
  Poset p(n);
  long relation = 0;
  std::vector<long> pairs(pair_count(n), 0);
  for (int i = 0; i < steps; ++i) {
    const auto o = mcmc_step(p, rng);
    relation += o.kind == MoveKind::relation;
    ++pairs[encode_pair(o.x, o.y)];
  }
  EXPECT_NEAR(double(relation) / steps, 0.5, 3 * std::sqrt(0.25 / steps));
  const double q = 1.0 / pairs.size();
  for (long c : pairs) EXPECT_LT(std::fabs(c - steps * q), 5 * std::sqrt(steps * q * (1 - q)));
}

TEST(McmcStep, RejectsTinyPosets) {
  RandomStream rng(1);
  Poset p(1);
  EXPECT_THROW(mcmc_step(p, rng), std::invalid_argument);
}

TEST(PairIndex, RoundTrip) {
  std::uint64_t k = 0;
  for (int y = 1; y < 90; ++y)
    for (int x = 0; x < y; ++x, ++k) {
      EXPECT_EQ(encode_pair(x, y), k);
      EXPECT_EQ(decode_pair(k), std::make_pair(x, y));
    }
  EXPECT_EQ(pair_count(85), 3570u);
}

TEST(Sweep, Counts) {
  RandomStream rng(1);
  Poset p(2);
  const auto s = sweep(p, rng, 4);
  EXPECT_EQ(s.attempted, 4u);
  EXPECT_EQ(s.accepted, 4u);
  EXPECT_EQ(s.relation_attempted + s.link_attempted, 4u);
  EXPECT_EQ(default_moves_per_sweep(47), 207646u);
  EXPECT_THROW(sweep(p, rng, 0), std::invalid_argument);
}

TEST(Sweep, MatchesStepLoop) {
  RandomStream a(9), b(9);
  Poset p = random_poset(17, 1), q = p;
  const auto s = sweep(p, a, 5000);
  SweepStats t;
  for (int i = 0; i < 5000; ++i) t.record(mcmc_step(q, b));
  EXPECT_EQ(s, t);
  EXPECT_EQ(p, q);
  EXPECT_EQ(a, b);

  RandomStream c(9);
  Poset r = random_poset(17, 1);
  const StepFunction step = [](Poset& x, RandomStream& g) { return mcmc_step(x, g); };
  EXPECT_EQ(sweep(r, c, 5000, step), s);
  EXPECT_EQ(r, p);
}

TEST(SweepStats, Accumulate) {
  SweepStats s;
  s.record({MoveKind::link, 0, 1, MoveAction::added});
  s.record({MoveKind::relation, 0, 1, MoveAction::noop});
  EXPECT_EQ(s.attempted, 2u);
  EXPECT_EQ(s.link_accepted, 1u);
  EXPECT_EQ(s.relation_accepted, 0u);
  EXPECT_DOUBLE_EQ(s.acceptance(), 0.5);
  SweepStats t = s;
  t += s;
  EXPECT_EQ(t.attempted, 4u);
  EXPECT_EQ(SweepStats{}.acceptance(), 0.0);
}

// Both move kinds toggle the only pair, so the two-element chain alternates.
TEST(ExactKernel, TwoElementsIsASwap) {
  const auto k = exact_kernel(2);
  ASSERT_EQ(k.size(), 2u);
  EXPECT_EQ(k.matrix[0][0], 0.0);
  EXPECT_EQ(k.matrix[0][1], 1.0);
  EXPECT_EQ(k.matrix[1][0], 1.0);
  EXPECT_EQ(k.matrix[1][1], 0.0);
  EXPECT_FALSE(k.has_self_loop());
}

TEST(ExactKernel, SymmetricStochasticConnected) {
  for (int n = 3; n <= 5; ++n) {
    const auto k = exact_kernel(n);
    EXPECT_EQ(k.size(), enumerate(n, [](const Poset&) {}));
    EXPECT_LT(k.max_asymmetry(), 1e-12);
    EXPECT_TRUE(k.strongly_connected());
    EXPECT_TRUE(k.has_self_loop());
    for (std::size_t a = 0; a < k.size(); ++a) {
      double row = 0, col = 0;
      for (std::size_t b = 0; b < k.size(); ++b) {
        row += k.matrix[a][b];
        col += k.matrix[b][a];
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
      EXPECT_NEAR(col, 1.0, 1e-12);  // uniform vector is stationary
    }
    for (std::size_t a = 0; a < k.size(); ++a) EXPECT_EQ(k.index_of(k.states[a]), a);
  }
  EXPECT_THROW(exact_kernel(6, 100), std::invalid_argument);
}

// Accepted moves come in inverse pairs (link removal / critical addition for
// the relation move, link removal / suitable addition for the link move), so
// at equilibrium each kind is accepted with probability 2<L>/C(n,2).
namespace {

double exact_acceptance(int n) {
  double links = 0;
  const auto total = enumerate(n, [&](const Poset& p) { links += p.link_count(); });
  return 2.0 * links / double(total) / double(pair_count(n));
}

}  // namespace

TEST(Acceptance, KernelAgreesWithLinkIdentity) {
  for (int n = 2; n <= 5; ++n) {
    const auto k = exact_kernel(n);
    double acc = 0;
    for (std::size_t a = 0; a < k.size(); ++a) acc += 1.0 - k.matrix[a][a];
    EXPECT_NEAR(acc / k.size(), exact_acceptance(n), 1e-12) << "n=" << n;
  }
}

TEST(Acceptance, ChainMatchesExactValue) {
  for (int n : {6, 7, 8}) {
    const double exact = exact_acceptance(n);
    RandomStream rng(100 + n);
    Poset p = construct_standard(StartKind::random_kr, n, &rng);
    sweep(p, rng, 100 * default_moves_per_sweep(n));
    SweepStats s;
    // Batch means over 50 blocks for the error bar.
    std::vector<double> blocks;
    for (int b = 0; b < 50; ++b) {
      const auto t = sweep(p, rng, 200 * default_moves_per_sweep(n));
      blocks.push_back(t.acceptance());
      s += t;
    }
    const double mean = std::accumulate(blocks.begin(), blocks.end(), 0.0) / blocks.size();
    double var = 0;
    for (double v : blocks) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (blocks.size() - 1) / blocks.size());
    EXPECT_NEAR(s.acceptance(), exact, 4 * se) << "n=" << n;
    const double rel = double(s.relation_accepted) / s.relation_attempted;
    const double lnk = double(s.link_accepted) / s.link_attempted;
    EXPECT_NEAR(rel, exact, 6 * se) << "n=" << n;
    EXPECT_NEAR(lnk, exact, 6 * se) << "n=" << n;
  }
}

TEST(Names, MoveEnums) {
  EXPECT_EQ(to_string(MoveKind::relation), "relation");
  EXPECT_EQ(to_string(MoveKind::link), "link");
  EXPECT_EQ(to_string(MoveAction::noop), "noop");
}
