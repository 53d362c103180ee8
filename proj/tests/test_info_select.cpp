#include <gtest/gtest.h>

#include <cmath>

#include "aperc/info_select.hpp"
#include "aperc/random_instances.hpp"
#include "oracles.hpp"

using namespace aperc;

namespace {

InfoSource revealing(std::size_t n, double cost) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) l[s * n + s] = 1.0;
  return InfoSource::action_independent(n, 1, n, l, cost);
}

InfoSource flat(std::size_t n, std::size_t m, double cost) {
  std::vector<double> l(n * m, 1.0 / static_cast<double>(m));
  return InfoSource::action_independent(n, 1, m, l, cost);
}

SelectionProblem make_problem(Belief b, std::vector<InfoSource> sources, double budget) {
  return SelectionProblem{std::move(b), 0, std::move(sources), budget, 1.0, kDefaultJointCap};
}

std::vector<std::size_t> as_vector(const PerceptionAction& sel) { return {sel.begin(), sel.end()}; }

}  // namespace

TEST(Entropy, PointMassAndUniform) {
  EXPECT_EQ(entropy(Belief::point_mass(3, 1)), 0.0);
  EXPECT_NEAR(entropy(Belief::uniform(4)), std::log(4.0), 1e-15);
}

TEST(Entropy, MatchesDirectSum) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Belief b(rng.dirichlet_flat(2 + rng.index(6)));
    EXPECT_NEAR(entropy(b), oracle::entropy({b.probs().begin(), b.probs().end()}), 1e-14);
  }
}

TEST(ConditionalEntropy, EmptyAndUninformative) {
  const Belief b({0.1, 0.2, 0.7});
  const auto p = make_problem(b, {flat(3, 4, 1.0)}, 1.0);
  EXPECT_EQ(conditional_entropy(p, PerceptionAction{}), entropy(b));
  EXPECT_NEAR(conditional_entropy(p, PerceptionAction({0})), entropy(b), 1e-14);
}

TEST(ConditionalEntropy, TwoRandomSourcesMatchOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(5);
    std::vector<InfoSource> src;
    src.push_back(random_source(rng, n, 2, 2 + rng.index(3), 1.0));
    src.push_back(random_source(rng, n, 2, 2 + rng.index(3), 1.0));
    SelectionProblem p{Belief(rng.dirichlet_flat(n)), rng.index(2), src, 2.0, 1.0, kDefaultJointCap};
    EXPECT_NEAR(conditional_entropy(p, PerceptionAction({0, 1})),
                oracle::conditional_entropy(p.belief, p.action, src, {0, 1}), 1e-12);
  }
}

TEST(ConditionalEntropy, JointAlphabetCap) {
  std::vector<InfoSource> src(3, flat(2, 10, 1.0));
  auto p = make_problem(Belief::uniform(2), src, 3.0);
  p.joint_cap = 100;
  EXPECT_NO_THROW(conditional_entropy(p, PerceptionAction({0, 1})));
  EXPECT_THROW(conditional_entropy(p, PerceptionAction({0, 1, 2})), JointAlphabetTooLarge);
  EXPECT_THROW(mutual_information(p, PerceptionAction({0, 1, 2})), JointAlphabetTooLarge);
}

TEST(MutualInformation, EmptySetIsExactlyZero) {
  const auto p = random_selection_problem(3);
  EXPECT_EQ(mutual_information(p, PerceptionAction{}), 0.0);
}

TEST(MutualInformation, RevealingSourceGivesFullEntropy) {
  const Belief b({0.1, 0.2, 0.3, 0.4});
  const auto p = make_problem(b, {revealing(4, 1.0)}, 1.0);
  EXPECT_NEAR(mutual_information(p, PerceptionAction({0})), entropy(b), 1e-14);
}

TEST(MutualInformation, MatchesKlFormAndIsNonnegative) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = random_selection_problem(seed, {5, 4, 3, 2});
    Rng rng(seed, 9);
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < p.sources.size(); ++i)
      if (rng.uniform() < 0.5) sel.push_back(i);
    const double f = mutual_information(p, PerceptionAction(sel));
    EXPECT_GE(f, -1e-12);
    EXPECT_NEAR(f, oracle::mutual_information_kl(p.belief, p.action, p.sources, sel), 1e-10);
  }
}

TEST(MutualInformation, SingleSourceSymmetry) {
  // I(s; w) = H(w) - H(w | s) on a two-variable toy case.
  const Belief b({0.3, 0.7});
  const std::vector<double> l = {0.9, 0.1, 0.2, 0.8};
  const auto p = make_problem(b, {InfoSource::action_independent(2, 1, 2, l, 1.0)}, 1.0);
  const double pw0 = 0.3 * 0.9 + 0.7 * 0.2;
  const double hw = -pw0 * std::log(pw0) - (1 - pw0) * std::log(1 - pw0);
  const double hws = 0.3 * oracle::entropy({0.9, 0.1}) + 0.7 * oracle::entropy({0.2, 0.8});
  EXPECT_NEAR(mutual_information(p, PerceptionAction({0})), hw - hws, 1e-10);
}

TEST(MarginalGain, UninformativeAndEmptyBase) {
  const Belief b({0.25, 0.25, 0.5});
  std::vector<double> l = {0.7, 0.3, 0.4, 0.6, 0.1, 0.9};
  const auto p = make_problem(b, {flat(3, 2, 1.0), InfoSource::action_independent(3, 1, 2, l, 1.0)}, 2.0);
  EXPECT_NEAR(marginal_gain(p, PerceptionAction({1}), 0), 0.0, 1e-14);
  EXPECT_NEAR(marginal_gain(p, PerceptionAction{}, 1), mutual_information(p, PerceptionAction({1})), 1e-15);
}

TEST(MarginalGain, RejectsIndexAlreadySelected) {
  const auto p = make_problem(Belief::uniform(2), {flat(2, 2, 1.0)}, 1.0);
  EXPECT_THROW(marginal_gain(p, PerceptionAction({0}), 0), InvalidArgument);
}

TEST(MarginalGain, AgreesWithClosedForm) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto p = random_selection_problem(seed, {6, 5, 3, 2});
    Rng rng(seed, 10);
    const std::size_t j = rng.index(p.sources.size());
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < p.sources.size(); ++i)
      if (i != j && rng.uniform() < 0.5) sel.push_back(i);
    EXPECT_NEAR(marginal_gain(p, PerceptionAction(sel), j),
                oracle::marginal_gain_closed_form(p.belief, p.action, p.sources, sel, j), 1e-10);
  }
}

TEST(SetFunction, MonotoneAndSubmodular) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto p = random_selection_problem(seed, {6, 6, 3, 2});
    const std::size_t n = p.sources.size();
    if (n < 2) continue;
    Rng rng(seed, 11);
    const std::size_t j = rng.index(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const double u = rng.uniform();
      if (u < 0.3) small.push_back(i);
      if (u < 0.7) large.push_back(i);
    }
    const PerceptionAction s1(small), s2(large);
    EXPECT_GE(mutual_information(p, s2), mutual_information(p, s1) - 1e-10);
    EXPECT_GE(marginal_gain(p, s1, j), marginal_gain(p, s2, j) - 1e-10);
  }
}

TEST(Greedy, NothingAffordable) {
  const auto p = make_problem(Belief::uniform(3), {revealing(3, 2.0), revealing(3, 3.0)}, 1.0);
  const auto out = generalized_greedy(p);
  EXPECT_TRUE(out.selected.empty());
  EXPECT_EQ(out.utility, 0.0);
  EXPECT_EQ(out.total_cost, 0.0);
}

TEST(Greedy, IdenticalSourcesTieToLowestIndex) {
  const Belief b({0.3, 0.7});
  const std::vector<double> l = {0.8, 0.2, 0.3, 0.7};
  const auto src = InfoSource::action_independent(2, 1, 2, l, 1.0);
  const auto p = make_problem(b, {src, src}, 1.5);
  const auto out = generalized_greedy(p);
  EXPECT_EQ(as_vector(out.selected), std::vector<std::size_t>{0});
  EXPECT_DOUBLE_EQ(out.utility, mutual_information(p, PerceptionAction({0})));
}

TEST(Greedy, SingletonFallbackBeatsCheapRatio) {
  // A cheap weak source has the better ratio but blocks the expensive revealing one.
  const Belief b = Belief::uniform(4);
  std::vector<double> weak(4 * 2);
  for (std::size_t s = 0; s < 4; ++s) {
    weak[2 * s] = s < 2 ? 0.55 : 0.45;
    weak[2 * s + 1] = 1.0 - weak[2 * s];
  }
  const auto p = make_problem(b, {InfoSource::action_independent(4, 1, 2, weak, 0.01), revealing(4, 1.0)}, 1.0);
  const auto out = generalized_greedy(p);
  EXPECT_EQ(as_vector(out.selected), std::vector<std::size_t>{1});
  EXPECT_NEAR(out.utility, std::log(4.0), 1e-12);
}

TEST(Greedy, FeasibleAndWithinRatioOfOptimum) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = random_selection_problem(seed);
    const auto g = generalized_greedy(p);
    const auto opt = brute_force_optimal(p);
    EXPECT_LE(g.total_cost, p.budget);
    EXPECT_NEAR(g.total_cost, total_cost(p, g.selected), 1e-12);
    EXPECT_GE(g.utility, 0.0);
    EXPECT_GE(opt.utility, g.utility - 1e-12);
    EXPECT_GE(g.utility, kGreedyRatio * opt.utility - 1e-9) << "seed " << seed;
  }
}

TEST(Greedy, RatioConstant) { EXPECT_NEAR(kGreedyRatio, 0.393469, 1e-6); }

TEST(BruteForce, SingleAffordableSource) {
  const auto p = make_problem(Belief::uniform(2), {revealing(2, 1.0)}, 1.0);
  EXPECT_EQ(as_vector(brute_force_optimal(p).selected), std::vector<std::size_t>{0});
}

TEST(BruteForce, UninformativeSourcesGiveEmptySet) {
  const auto p = make_problem(Belief({0.4, 0.6}), {flat(2, 2, 0.5), flat(2, 3, 0.5)}, 1.0);
  const auto out = brute_force_optimal(p);
  EXPECT_TRUE(out.selected.empty());
  EXPECT_EQ(out.utility, 0.0);
}

TEST(BruteForce, TooManySources) {
  const auto p = make_problem(Belief::uniform(2), std::vector<InfoSource>(5, flat(2, 2, 1.0)), 1.0);
  EXPECT_THROW(brute_force_optimal(p, 4), TooManySources);
}

TEST(BruteForce, RevealingPairPreferredOverSingle) {
  // Two half-revealing sources combined identify the state; one revealing source costs too much.
  const Belief b = Belief::uniform(4);
  const std::vector<double> hi = {1, 0, 1, 0, 0, 1, 0, 1};
  const std::vector<double> lo = {1, 0, 0, 1, 1, 0, 0, 1};
  const auto p = make_problem(
      b, {InfoSource::action_independent(4, 1, 2, hi, 0.5), InfoSource::action_independent(4, 1, 2, lo, 0.5),
          revealing(4, 1.5)},
      1.0);
  const auto out = brute_force_optimal(p);
  EXPECT_EQ(as_vector(out.selected), (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(out.utility, std::log(4.0), 1e-12);
}

TEST(DistanceBound, IdenticalSelectionsGiveZeroLhs) {
  const auto p = random_selection_problem(5);
  const auto sel = generalized_greedy(p).selected;
  const auto r = distance_bound(p, p.belief, sel, sel);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(DistanceBound, UninformativeSourcesBothSidesZero) {
  const auto p = make_problem(Belief({0.2, 0.8}), {flat(2, 2, 0.5), flat(2, 3, 0.5)}, 0.5);
  const auto r = distance_bound(p, p.belief, PerceptionAction({0}), PerceptionAction({1}));
  EXPECT_NEAR(r.lhs, 0.0, 1e-15);
  EXPECT_NEAR(r.rhs, 0.0, 1e-7);
  EXPECT_TRUE(r.pass);
}

TEST(DistanceBound, DisjointRevealingSelections) {
  // Revealing optimum versus empty greedy: lhs = E||b - e_s||_1 = 2(1 - sum b_s^2), rhs from KL = H(b).
  const Belief b({0.3, 0.7});
  const auto p = make_problem(b, {revealing(2, 1.0)}, 1.0);
  const auto r = distance_bound(p, b, PerceptionAction{}, PerceptionAction({0}));
  EXPECT_NEAR(r.lhs, 2.0 * (1.0 - 0.09 - 0.49), 1e-12);
  EXPECT_NEAR(r.rhs, std::sqrt(2.0 / std::sqrt(std::exp(1.0)) * entropy(b)), 1e-12);
}

TEST(DistanceBound, SidesMatchJointTableOracle) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = random_selection_problem(seed, {5, 6, 3, 2});
    const auto g = generalized_greedy(p).selected;
    const auto o = brute_force_optimal(p).selected;
    const auto r = distance_bound(p, p.belief, g, o);
    const auto d = oracle::distance_sides(p.belief, p.action, p.sources, as_vector(g), as_vector(o));
    EXPECT_NEAR(r.lhs, d.lhs, 1e-10);
    EXPECT_NEAR(r.rhs, std::sqrt(2.0 / std::sqrt(std::exp(1.0)) * std::max(d.kl, 0.0)), 1e-7);
  }
}

TEST(DistanceBound, HoldsWhenGreedyIsInsideOptimum) {
  // With greedy a subset of the optimum the KL chain rule is exact, so the bound holds.
  int nested = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto p = random_selection_problem(seed, {5, 6, 3, 2});
    const auto r = check_distance_bound(p, p.belief);
    bool inside = true;
    for (auto i : r.greedy) inside = inside && r.optimal.contains(i);
    if (!inside) continue;
    ++nested;
    EXPECT_TRUE(r.pass) << "seed " << seed << " lhs " << r.lhs << " rhs " << r.rhs;
  }
  EXPECT_GT(nested, 400);
}

TEST(DistanceBound, CanFailWhenSelectionsAreNotNested) {
  // Known counterexample: greedy and optimum pick overlapping but non-nested sets.
  const auto p = random_selection_problem(145, {5, 6, 3, 2});
  const auto r = check_distance_bound(p, p.belief);
  bool inside = true;
  for (auto i : r.greedy) inside = inside && r.optimal.contains(i);
  EXPECT_FALSE(inside);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.lhs, r.rhs);
}

TEST(ValueBound, IdenticalSelectionsGiveZeroLhs) {
  Rng rng(6);
  const auto p = random_selection_problem(6);
  const auto m = random_pomdp(rng, p.belief.size(), 2, 2, 0.9);
  const auto g = backup(m, initialize_value(m), sample_beliefs_uniform(p.belief.size(), 20, 1));
  const auto sel = generalized_greedy(p).selected;
  const auto r = value_bound(m, g, p, p.belief, sel, sel);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(ValueBound, ZeroDiscountOneBackup) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = random_selection_problem(seed, {4, 6, 3, 2});
    Rng rng(seed, 12);
    const auto m = random_pomdp(rng, p.belief.size(), 2, 2, 0.0);
    const auto g = backup(m, initialize_value(m), sample_beliefs_uniform(p.belief.size(), 30, seed));
    const auto r = check_value_bound(m, g, p, p.belief);
    const auto d = check_distance_bound(p, p.belief);
    EXPECT_NEAR(r.rhs, d.rhs * std::max(std::abs(m.reward_max()), std::abs(m.reward_min())), 1e-12);
    EXPECT_TRUE(r.pass) << "seed " << seed;
  }
}

TEST(ValueBound, RejectsDimensionMismatch) {
  Rng rng(7);
  const auto p = make_problem(Belief::uniform(2), {revealing(2, 1.0)}, 1.0);
  const auto m = random_pomdp(rng, 3, 1, 2, 0.5);
  EXPECT_THROW(check_value_bound(m, initialize_value(m), p, p.belief), InvalidArgument);
}
