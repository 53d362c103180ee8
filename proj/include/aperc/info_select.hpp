#pragma once

// Budget-constrained selection of auxiliary information sources.
//
// The utility of a selection is the mutual information between the state and
// the selected sources' observations, f(sel) = H(s) - H(s | obs(sel)), in nats.
// Sources are conditionally independent given the state, which makes f
// monotone and submodular; the generalized greedy scheme below then achieves
// at least (1 - 1/sqrt(e)) of the best budget-feasible utility for beta = 1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "aperc/errors.hpp"
#include "aperc/pbvi.hpp"
#include "aperc/pomdp.hpp"

namespace aperc {

/// Approximation constant of the generalized greedy scheme, 1 - 1/sqrt(e).
inline const double kGreedyRatio = 1.0 - 1.0 / std::sqrt(std::exp(1.0));

inline constexpr std::uint64_t kDefaultJointCap = 10'000'000;
inline constexpr std::size_t kMaxBruteForceSources = 20;

struct SelectionProblem {
  Belief belief;  ///< belief after the intrinsic update
  std::size_t action = 0;
  std::vector<InfoSource> sources;
  double budget = 1.0;
  double beta = 1.0;
  /// Largest joint observation alphabet that may be enumerated.
  std::uint64_t joint_cap = kDefaultJointCap;

  void validate() const {
    if (!(budget > 0.0)) throw InvalidArgument("selection problem: budget must be positive");
    if (!(beta > 0.0)) throw InvalidArgument("selection problem: beta must be positive");
    for (const auto& src : sources) {
      if (src.num_states() != belief.size()) {
        throw InvalidArgument("selection problem: source state count differs from belief");
      }
      if (action >= src.num_actions()) {
        throw InvalidArgument("selection problem: action out of range for source");
      }
    }
  }
};

struct SelectionOutcome {
  PerceptionAction selected;
  double utility = 0.0;  ///< mutual information, nats
  double total_cost = 0.0;
};

/// Shannon entropy in nats with 0 log 0 = 0.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

inline double entropy(const Belief& b) { return entropy(b.probs()); }

namespace detail {

inline std::uint64_t joint_alphabet_size(const SelectionProblem& p, const PerceptionAction& sel) {
  std::uint64_t terms = 1;
  for (std::size_t i : sel) {
    const std::uint64_t m = p.sources[i].alphabet_size();
    if (terms > p.joint_cap / m) {
      throw JointAlphabetTooLarge("joint alphabet of the selection exceeds " +
                                  std::to_string(p.joint_cap) + " terms");
    }
    terms *= m;
  }
  if (terms > p.joint_cap) {
    throw JointAlphabetTooLarge("joint alphabet of the selection exceeds " +
                                std::to_string(p.joint_cap) + " terms");
  }
  return terms;
}

/// Calls `leaf(weights, outcome)` for every joint outcome of the selected
/// sources, where weights(s) = prior(s) * prod_i O_i(s, a, outcome_i) is the
/// unnormalized joint p(s, outcome).
template <typename Leaf>
void for_each_outcome(const SelectionProblem& p, std::span<const double> prior,
                      const PerceptionAction& sel, Leaf&& leaf) {
  joint_alphabet_size(p, sel);
  const auto idx = sel.indices();
  const std::size_t depth = idx.size();
  const std::size_t n = prior.size();
  std::vector<std::vector<double>> partial(depth + 1, std::vector<double>(n));
  partial[0].assign(prior.begin(), prior.end());
  std::vector<std::size_t> outcome(depth, 0);

  // Iterative depth-first walk; level k multiplies in source idx[k].
  std::size_t level = 0;
  std::vector<std::size_t> next(depth + 1, 0);
  while (true) {
    if (level == depth) {
      leaf(std::span<const double>(partial[depth]), std::span<const std::size_t>(outcome));
      if (depth == 0) return;
      --level;
      continue;
    }
    const InfoSource& src = p.sources[idx[level]];
    if (next[level] == src.alphabet_size()) {
      next[level] = 0;
      if (level == 0) return;
      --level;
      continue;
    }
    const std::size_t o = next[level]++;
    outcome[level] = o;
    auto& dst = partial[level + 1];
    const auto& src_w = partial[level];
    for (std::size_t s = 0; s < n; ++s) dst[s] = src_w[s] * src.likelihood(s, p.action, o);
    ++level;
  }
}

inline std::vector<double> normalize(std::span<const double> w, double z) {
  std::vector<double> out(w.begin(), w.end());
  for (double& x : out) x /= z;
  return out;
}

}  // namespace detail

/// H(s | obs(sel)) = -sum_outcomes sum_s p(s, o) log p(s | o).
inline double conditional_entropy(const SelectionProblem& p, const PerceptionAction& sel) {
  sel.check(p.sources.size());
  if (sel.empty()) return entropy(p.belief);
  double h = 0.0;
  detail::for_each_outcome(p, p.belief.probs(), sel,
                           [&](std::span<const double> w, std::span<const std::size_t>) {
                             double z = 0.0;
                             for (double x : w) z += x;
                             if (!(z > 0.0)) return;
                             for (double x : w) {
                               if (x > 0.0) h -= x * std::log(x / z);
                             }
                           });
  return h;
}

/// f(sel) = H(s) - H(s | obs(sel)); magnitudes below 1e-12 snap to 0.
inline double mutual_information(const SelectionProblem& p, const PerceptionAction& sel) {
  if (sel.empty()) {
    sel.check(p.sources.size());
    return 0.0;
  }
  const double f = entropy(p.belief) - conditional_entropy(p, sel);
  return std::abs(f) < 1e-12 ? 0.0 : f;
}

/// f(sel + j) - f(sel).
inline double marginal_gain(const SelectionProblem& p, const PerceptionAction& sel, std::size_t j) {
  if (j >= p.sources.size()) throw InvalidArgument("marginal gain: source index out of range");
  if (sel.contains(j)) throw InvalidArgument("marginal gain: source already selected");
  return mutual_information(p, sel.with(j)) - mutual_information(p, sel);
}

inline double total_cost(const SelectionProblem& p, const PerceptionAction& sel) {
  double c = 0.0;
  for (std::size_t i : sel) c += p.sources[i].cost();
  return c;
}

/// Generalized greedy selection.
///
/// Repeatedly takes the remaining candidate with the largest entropy
/// reduction per cost^beta, adds it when the budget still allows, and drops it
/// from the pool either way. The result is the better of the constructed set
/// and the best affordable singleton. Ties go to the lowest source index.
inline SelectionOutcome generalized_greedy(const SelectionProblem& p) {
  p.validate();
  const std::size_t n = p.sources.size();
  std::vector<bool> pool(n, true);
  std::size_t remaining = n;
  PerceptionAction chosen;
  double spent = 0.0;
  double base = entropy(p.belief);

  // Ratios only change when `chosen` grows.
  std::vector<double> ratio(n, 0.0);
  bool stale = true;
  while (remaining > 0) {
    if (stale) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!pool[j]) continue;
        const double gain = base - conditional_entropy(p, chosen.with(j));
        ratio[j] = gain / std::pow(p.sources[j].cost(), p.beta);
      }
      stale = false;
    }
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (pool[j] && (best == n || ratio[j] > ratio[best])) best = j;
    }
    if (spent + p.sources[best].cost() <= p.budget) {
      chosen = chosen.with(best);
      spent += p.sources[best].cost();
      base = conditional_entropy(p, chosen);
      stale = true;
    }
    pool[best] = false;
    --remaining;
  }

  std::size_t best_single = n;
  double best_single_h = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (p.sources[j].cost() > p.budget) continue;
    const double h = conditional_entropy(p, PerceptionAction({j}));
    if (h < best_single_h) {
      best_single_h = h;
      best_single = j;
    }
  }
  if (best_single == n) return SelectionOutcome{};

  if (best_single_h < base) {
    chosen = PerceptionAction({best_single});
  }
  return SelectionOutcome{chosen, mutual_information(p, chosen), total_cost(p, chosen)};
}

/// Exhaustive search over all budget-feasible subsets. Ties go to the
/// lexicographically smallest index set.
inline SelectionOutcome brute_force_optimal(const SelectionProblem& p,
                                            std::size_t max_sources = kMaxBruteForceSources) {
  p.validate();
  const std::size_t n = p.sources.size();
  if (n > max_sources || n >= 63) {
    throw TooManySources("brute force: " + std::to_string(n) + " sources exceeds the cap of " +
                         std::to_string(max_sources));
  }
  SelectionOutcome best{};
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::size_t> idx;
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        idx.push_back(i);
        cost += p.sources[i].cost();
      }
    }
    if (cost > p.budget) continue;
    PerceptionAction sel(std::move(idx));
    const double f = mutual_information(p, sel);
    if (f > best.utility || (f == best.utility && sel < best.selected)) {
      best = SelectionOutcome{std::move(sel), f, cost};
    }
  }
  return best;
}

/// Both sides of an empirical bound check.
struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  PerceptionAction greedy;
  PerceptionAction optimal;
};

inline constexpr double kBoundSlack = 1e-9;

namespace detail {

inline std::vector<double> posterior_given(const SelectionProblem& p, std::span<const double> prior,
                                           const PerceptionAction& sel,
                                           const PerceptionAction& observed_sources,
                                           std::span<const std::size_t> outcome) {
  std::vector<double> w(prior.begin(), prior.end());
  std::size_t k = 0;
  for (std::size_t i : observed_sources) {
    const std::size_t o = outcome[k++];
    if (!sel.contains(i)) continue;
    for (std::size_t s = 0; s < w.size(); ++s) w[s] *= p.sources[i].likelihood(s, p.action, o);
  }
  double z = 0.0;
  for (double x : w) z += x;
  return normalize(w, z);
}

inline PerceptionAction set_union(const PerceptionAction& x, const PerceptionAction& y) {
  std::vector<std::size_t> u(x.begin(), x.end());
  for (std::size_t i : y) {
    if (!x.contains(i)) u.push_back(i);
  }
  return PerceptionAction(std::move(u));
}

/// E_{obs(sel)} [ KL(posterior || prior) ].
inline double expected_kl_from_prior(const SelectionProblem& p, std::span<const double> prior,
                                     const PerceptionAction& sel) {
  double acc = 0.0;
  for_each_outcome(p, prior, sel, [&](std::span<const double> w, std::span<const std::size_t>) {
    double z = 0.0;
    for (double x : w) z += x;
    if (!(z > 0.0)) return;
    for (std::size_t s = 0; s < w.size(); ++s) {
      if (w[s] > 0.0) acc += w[s] * std::log((w[s] / z) / prior[s]);
    }
  });
  return acc;
}

/// Calls `leaf(weight, greedy_posterior, optimal_posterior)` for every joint
/// outcome with positive probability. Sources outside both selections leave
/// both posteriors unchanged, so they are marginalized out exactly.
template <typename Leaf>
void for_each_posterior_pair(const SelectionProblem& p, std::span<const double> prior,
                             const PerceptionAction& greedy, const PerceptionAction& optimal,
                             Leaf&& leaf) {
  const auto joint = set_union(greedy, optimal);
  for_each_outcome(p, prior, joint, [&](std::span<const double> w, std::span<const std::size_t> o) {
    double z = 0.0;
    for (double x : w) z += x;
    if (!(z > 0.0)) return;
    leaf(z, posterior_given(p, prior, greedy, joint, o), posterior_given(p, prior, optimal, joint, o));
  });
}

}  // namespace detail

/// Distance bound between the greedy and optimal posteriors:
///   E || b^g - b^* ||_1  <=  sqrt( (2 / sqrt(e)) E_{obs(opt)} KL(p^* || p^0) ),
/// with p^0 = `prior` and the expectation over the joint outcomes drawn from
/// `prior`. Uses the supplied greedy and optimal selections.
inline BoundReport distance_bound(const SelectionProblem& p, const Belief& prior,
                                  const PerceptionAction& greedy, const PerceptionAction& optimal) {
  if (prior.size() != p.belief.size()) throw InvalidArgument("distance bound: prior dimension mismatch");
  BoundReport r;
  r.greedy = greedy;
  r.optimal = optimal;
  detail::for_each_posterior_pair(
      p, prior.probs(), greedy, optimal,
      [&](double z, const std::vector<double>& bg, const std::vector<double>& bo) {
        double l1 = 0.0;
        for (std::size_t s = 0; s < bg.size(); ++s) l1 += std::abs(bg[s] - bo[s]);
        r.lhs += z * l1;
      });
  const double kl = detail::expected_kl_from_prior(p, prior.probs(), optimal);
  r.rhs = std::sqrt(2.0 / std::sqrt(std::exp(1.0)) * std::max(kl, 0.0));
  r.pass = r.lhs <= r.rhs + kBoundSlack;
  return r;
}

inline BoundReport check_distance_bound(const SelectionProblem& p, const Belief& prior) {
  return distance_bound(p, prior, generalized_greedy(p).selected, brute_force_optimal(p).selected);
}

/// Value-loss bound: E[V(b^g) - V(b^*)] <= delta * max{|R_max|, |R_min|} / (1 - gamma)
/// where delta is the right-hand side of the distance bound.
inline BoundReport value_bound(const Pomdp& pomdp, const ValueFunction& gamma,
                               const SelectionProblem& p, const Belief& prior,
                               const PerceptionAction& greedy, const PerceptionAction& optimal) {
  if (gamma.num_states() != p.belief.size()) throw InvalidArgument("value bound: dimension mismatch");
  const BoundReport dist = distance_bound(p, prior, greedy, optimal);
  BoundReport r;
  r.greedy = greedy;
  r.optimal = optimal;
  detail::for_each_posterior_pair(
      p, prior.probs(), greedy, optimal,
      [&](double z, std::vector<double> bg, std::vector<double> bo) {
        r.lhs += z * (value(gamma, Belief(std::move(bg))) - value(gamma, Belief(std::move(bo))));
      });
  r.rhs = dist.rhs * pomdp.value_bound();
  r.pass = r.lhs <= r.rhs + kBoundSlack;
  return r;
}

inline BoundReport check_value_bound(const Pomdp& pomdp, const ValueFunction& gamma,
                                     const SelectionProblem& p, const Belief& prior) {
  return value_bound(pomdp, gamma, p, prior, generalized_greedy(p).selected,
                     brute_force_optimal(p).selected);
}

}  // namespace aperc
