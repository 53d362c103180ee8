#pragma once

#include <vector>

#include "aperc/pomdp.hpp"

namespace fixtures {

/// Two states, identity transitions for every action, and observations that
/// reveal the next state exactly.
inline aperc::Pomdp revealing_two_state(std::size_t num_actions = 2, double discount = 0.9) {
  std::vector<double> t, o, r;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t a = 0; a < num_actions; ++a) {
      t.push_back(s == 0 ? 1.0 : 0.0);
      t.push_back(s == 1 ? 1.0 : 0.0);
      o.push_back(s == 0 ? 1.0 : 0.0);
      o.push_back(s == 1 ? 1.0 : 0.0);
      r.push_back(0.0);
    }
  return aperc::Pomdp(2, num_actions, 2, t, o, r, discount);
}

/// Two-state MDP in POMDP form (identity observation). Action 0 stays, action
/// 1 swaps with probability 0.8. State 1 pays 1 under stay, state 0 pays 0;
/// swapping costs 0.1.
inline aperc::Pomdp fully_observable_two_state(double discount = 0.9) {
  const std::vector<double> t = {
      1.0, 0.0,  // s=0, stay
      0.2, 0.8,  // s=0, swap
      0.0, 1.0,  // s=1, stay
      0.8, 0.2,  // s=1, swap
  };
  const std::vector<double> o = {1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0};
  const std::vector<double> r = {0.0, -0.1, 1.0, 0.9};
  return aperc::Pomdp(2, 2, 2, t, o, r, discount);
}

/// Same dynamics, observations uniform over `m` symbols.
inline aperc::Pomdp uninformative(std::size_t m) {
  const std::vector<double> t = {1.0, 0.0, 0.2, 0.8, 0.0, 1.0, 0.8, 0.2};
  std::vector<double> o(2 * 2 * m, 1.0 / static_cast<double>(m));
  const std::vector<double> r = {0.0, -0.1, 1.0, 0.9};
  return aperc::Pomdp(2, 2, m, t, o, r, 0.9);
}

}  // namespace fixtures
