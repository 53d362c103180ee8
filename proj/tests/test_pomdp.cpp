#include <gtest/gtest.h>

#include "aperc/pomdp.hpp"
#include "aperc/random.hpp"
#include "aperc/random_instances.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace aperc;

namespace {

void expect_belief_near(const Belief& b, const std::vector<double>& expected, double tol) {
  ASSERT_EQ(b.size(), expected.size());
  for (std::size_t s = 0; s < b.size(); ++s) EXPECT_NEAR(b[s], expected[s], tol) << "state " << s;
}

void expect_valid_belief(const Belief& b) {
  double sum = 0.0;
  for (double p : b.probs()) {
    EXPECT_GE(p, 0.0);
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

}  // namespace

TEST(PomdpModel, RejectsBadTransitionRows) {
  std::vector<double> t = {0.5, 0.4, 0.0, 1.0};
  std::vector<double> o = {1.0, 0.0, 0.0, 1.0};
  std::vector<double> r = {0.0, 0.0};
  EXPECT_THROW(Pomdp(2, 1, 2, t, o, r, 0.9), InvalidArgument);
}

TEST(PomdpModel, RejectsNegativeProbabilityEvenIfRowSumsToOne) {
  std::vector<double> t = {1.5, -0.5, 0.0, 1.0};
  std::vector<double> o = {1.0, 0.0, 0.0, 1.0};
  EXPECT_THROW(Pomdp(2, 1, 2, t, o, {0.0, 0.0}, 0.9), InvalidArgument);
}

TEST(PomdpModel, RejectsDiscountOfOne) {
  std::vector<double> t = {1.0, 0.0, 0.0, 1.0};
  EXPECT_THROW(Pomdp(2, 1, 2, t, t, {0.0, 0.0}, 1.0), InvalidArgument);
}

TEST(PomdpModel, RejectsBadObservationRows) {
  std::vector<double> t = {1.0, 0.0, 0.0, 1.0};
  std::vector<double> o = {0.6, 0.6, 0.0, 1.0};
  EXPECT_THROW(Pomdp(2, 1, 2, t, o, {0.0, 0.0}, 0.5), InvalidArgument);
}

TEST(BeliefType, RejectsUnnormalized) {
  EXPECT_THROW(Belief({0.5, 0.6}), InvalidArgument);
  EXPECT_THROW(Belief({1.1, -0.1}), InvalidArgument);
  EXPECT_NO_THROW(Belief({0.25, 0.75}));
}

TEST(InfoSourceType, RequiresPositiveCost) {
  std::vector<double> l = {1.0, 0.0, 0.0, 1.0};
  EXPECT_THROW(InfoSource(2, 1, 2, l, 0.0), InvalidArgument);
  EXPECT_THROW(InfoSource(2, 1, 2, l, -1.0), InvalidArgument);
  EXPECT_NO_THROW(InfoSource(2, 1, 2, l, 0.5));
}

TEST(PerceptionActionType, RejectsDuplicatesAndOutOfRange) {
  EXPECT_THROW(PerceptionAction({1, 1}), InvalidArgument);
  PerceptionAction sel({3, 0});
  EXPECT_EQ(sel.indices()[0], 0u);
  EXPECT_THROW(sel.check(3), InvalidArgument);
  EXPECT_NO_THROW(sel.check(4));
}

TEST(IntrinsicUpdate, DeterministicObservationCollapsesBelief) {
  const auto m = fixtures::revealing_two_state();
  const auto b = belief_update_intrinsic(m, Belief({0.5, 0.5}), 0, 0);
  expect_belief_near(b, {1.0, 0.0}, 0.0);
}

TEST(IntrinsicUpdate, UninformativeObservationIsPredictionOnly) {
  const auto m = fixtures::uninformative(3);
  const Belief b({0.3, 0.7});
  for (std::size_t a = 0; a < 2; ++a) {
    const auto pred = predict(m, b, a);
    for (std::size_t o = 0; o < 3; ++o) expect_belief_near(belief_update_intrinsic(m, b, a, o), pred, 1e-15);
  }
}

TEST(IntrinsicUpdate, ImpossibleObservationRaises) {
  const auto m = fixtures::revealing_two_state();
  EXPECT_THROW(belief_update_intrinsic(m, Belief::point_mass(2, 0), 0, 1), ZeroLikelihoodObservation);
}

TEST(IntrinsicUpdate, MatchesJointEnumerationOnRandomModels) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_pomdp(rng, 4, 3, 3, 0.9);
    const Belief b(rng.dirichlet_flat(4));
    const std::size_t a = rng.index(3), o = rng.index(3);
    const auto got = belief_update_intrinsic(m, b, a, o);
    expect_valid_belief(got);
    expect_belief_near(got, oracle::bayes_intrinsic(m, b, a, o), 1e-12);
  }
}

TEST(AuxiliaryUpdate, EmptySelectionLeavesBeliefUnchanged) {
  const Belief b({0.2, 0.3, 0.5});
  const std::vector<InfoSource> none;
  EXPECT_EQ(belief_update_auxiliary(b, 0, PerceptionAction{}, none, {}), b);
}

TEST(AuxiliaryUpdate, RevealingSourceGivesPointMass) {
  // Three states, the source reports the state exactly.
  std::vector<double> l = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const std::vector<InfoSource> src = {InfoSource::action_independent(3, 1, 3, l, 1.0)};
  const std::vector<std::size_t> obs = {2};
  const auto b = belief_update_auxiliary(Belief({0.2, 0.3, 0.5}), 0, PerceptionAction({0}), src, obs);
  expect_belief_near(b, {0.0, 0.0, 1.0}, 0.0);
}

TEST(AuxiliaryUpdate, ImpossibleReportRaises) {
  std::vector<double> l = {1, 0, 0, 1};
  const std::vector<InfoSource> src = {InfoSource::action_independent(2, 1, 2, l, 1.0)};
  const std::vector<std::size_t> obs = {1};
  EXPECT_THROW(belief_update_auxiliary(Belief::point_mass(2, 0), 0, PerceptionAction({0}), src, obs),
               ZeroLikelihoodObservation);
}

TEST(AuxiliaryUpdate, TwoSourcesMatchJointAlphabetOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(4);
    std::vector<InfoSource> src;
    src.push_back(random_source(rng, n, 2, 2 + rng.index(3), 1.0));
    src.push_back(random_source(rng, n, 2, 2 + rng.index(3), 1.0));
    const Belief b(rng.dirichlet_flat(n));
    const std::size_t a = rng.index(2);
    const std::vector<std::size_t> obs = {rng.index(src[0].alphabet_size()), rng.index(src[1].alphabet_size())};
    const auto got = belief_update_auxiliary(b, a, PerceptionAction({0, 1}), src, obs);
    expect_valid_belief(got);
    expect_belief_near(got, oracle::bayes_auxiliary(b, a, src, {0, 1}, obs), 1e-12);
  }
}

TEST(AuxiliaryUpdate, SequentialSingleUpdatesCommute) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(5);
    std::vector<InfoSource> src;
    for (int i = 0; i < 3; ++i) src.push_back(random_source(rng, n, 1, 2 + rng.index(2), 1.0));
    const Belief b(rng.dirichlet_flat(n));
    const std::size_t oi = rng.index(src[0].alphabet_size()), oj = rng.index(src[2].alphabet_size());
    const std::vector<std::size_t> first = {oi}, second = {oj}, both = {oi, oj};
    const auto step = belief_update_auxiliary(b, 0, PerceptionAction({0}), src, first);
    const auto chained = belief_update_auxiliary(step, 0, PerceptionAction({2}), src, second);
    const auto joint = belief_update_auxiliary(b, 0, PerceptionAction({0, 2}), src, both);
    expect_belief_near(chained, std::vector<double>(joint.probs().begin(), joint.probs().end()), 1e-12);
  }
}

TEST(ObservationProbability, UniformObservationModel) {
  const auto m = fixtures::uninformative(4);
  for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(observation_probability(m, Belief({0.1, 0.9}), 1, o), 0.25, 1e-15);
}

TEST(ObservationProbability, DeterministicModelFromPointMass) {
  const auto m = fixtures::revealing_two_state();
  const auto b = Belief::point_mass(2, 1);
  EXPECT_EQ(observation_probability(m, b, 0, 1), 1.0);
  EXPECT_EQ(observation_probability(m, b, 0, 0), 0.0);
}

TEST(ObservationProbability, MatchesEnumerationAndSumsToOne) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_pomdp(rng, 4, 2, 5, 0.5);
    const Belief b(rng.dirichlet_flat(4));
    const std::size_t a = rng.index(2);
    double total = 0.0;
    for (std::size_t o = 0; o < 5; ++o) {
      const double p = observation_probability(m, b, a, o);
      EXPECT_NEAR(p, oracle::observation_probability(m, b, a, o), 1e-14);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(ExpectedReward, PointMassAndUniform) {
  const std::vector<double> t = {1, 0, 0, 1};
  const Pomdp m(2, 1, 2, t, t, {10.0, -5.0}, 0.9);
  EXPECT_EQ(expected_immediate_reward(m, Belief::point_mass(2, 1), 0), -5.0);
  EXPECT_DOUBLE_EQ(expected_immediate_reward(m, Belief::uniform(2), 0), 2.5);
}

TEST(ExpectedReward, MatchesDirectSum) {
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_pomdp(rng, 5, 3, 2, 0.5);
    const Belief b(rng.dirichlet_flat(5));
    const std::size_t a = rng.index(3);
    double expected = 0.0;
    for (std::size_t s = 0; s < 5; ++s) expected += b[s] * m.reward(s, a);
    EXPECT_NEAR(expected_immediate_reward(m, b, a), expected, 1e-13);
  }
}
