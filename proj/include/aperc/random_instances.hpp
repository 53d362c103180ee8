#pragma once

// Seeded generators for small random models and selection problems, used by
// the guarantee benchmark and the test suites.

#include <cstdint>
#include <vector>

#include "aperc/info_select.hpp"
#include "aperc/pomdp.hpp"
#include "aperc/random.hpp"

namespace aperc {

inline Pomdp random_pomdp(Rng& rng, std::size_t num_states, std::size_t num_actions,
                          std::size_t num_observations, double discount, double reward_lo = -5.0,
                          double reward_hi = 10.0) {
  std::vector<double> t, o, r;
  t.reserve(num_states * num_actions * num_states);
  o.reserve(num_states * num_actions * num_observations);
  for (std::size_t s = 0; s < num_states * num_actions; ++s) {
    auto row = rng.dirichlet_flat(num_states);
    t.insert(t.end(), row.begin(), row.end());
  }
  for (std::size_t s = 0; s < num_states * num_actions; ++s) {
    auto row = rng.dirichlet_flat(num_observations);
    o.insert(o.end(), row.begin(), row.end());
  }
  for (std::size_t i = 0; i < num_states * num_actions; ++i) r.push_back(rng.uniform(reward_lo, reward_hi));
  return Pomdp(num_states, num_actions, num_observations, std::move(t), std::move(o), std::move(r),
               discount);
}

inline InfoSource random_source(Rng& rng, std::size_t num_states, std::size_t num_actions,
                                std::size_t alphabet_size, double cost) {
  std::vector<double> l;
  l.reserve(num_states * num_actions * alphabet_size);
  for (std::size_t i = 0; i < num_states * num_actions; ++i) {
    auto row = rng.dirichlet_flat(alphabet_size);
    l.insert(l.end(), row.begin(), row.end());
  }
  return InfoSource(num_states, num_actions, alphabet_size, std::move(l), cost);
}

struct InstanceLimits {
  std::size_t max_states = 6;
  std::size_t max_sources = 10;
  std::size_t max_alphabet = 3;
  std::size_t num_actions = 2;
};

/// Random selection problem: 2..max_states states, 1..max_sources sources with
/// alphabets of 2..max_alphabet symbols, costs in [0.2, 1] and a budget drawn
/// between 0.2 and 40% of the total cost plus 0.2.
inline SelectionProblem random_selection_problem(std::uint64_t seed, const InstanceLimits& lim = {}) {
  if (lim.max_states < 2 || lim.max_alphabet < 2 || lim.max_sources < 1 || lim.num_actions < 1) {
    throw InvalidArgument("instance limits: need >= 2 states, >= 2 symbols, >= 1 source and action");
  }
  Rng rng(seed, 0x5e1ec7);
  const std::size_t num_states = 2 + rng.index(lim.max_states - 1);
  const std::size_t num_sources = 1 + rng.index(lim.max_sources);
  const std::size_t action = rng.index(lim.num_actions);
  std::vector<InfoSource> sources;
  double total = 0.0;
  for (std::size_t i = 0; i < num_sources; ++i) {
    const std::size_t m = 2 + rng.index(lim.max_alphabet - 1);
    const double cost = rng.uniform(0.2, 1.0);
    total += cost;
    sources.push_back(random_source(rng, num_states, lim.num_actions, m, cost));
  }
  const double budget = rng.uniform(0.2, 0.2 + 0.4 * total);
  return SelectionProblem{Belief(rng.dirichlet_flat(num_states)), action, std::move(sources), budget,
                          1.0, kDefaultJointCap};
}

}  // namespace aperc
