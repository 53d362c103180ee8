#pragma once

// Finite POMDP model, beliefs, auxiliary information sources and exact
// Bayesian belief updates.
//
// Tensors are dense and row-major. This is fine for grid-scale models
// (tens of states, a handful of actions) but memory grows as |S|^2 |A|.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aperc/errors.hpp"

namespace aperc {

/// Tolerance for probability row sums when validating models and beliefs.
inline constexpr double kProbabilityTolerance = 1e-9;

namespace detail {

inline void check_distribution(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0 + kProbabilityTolerance)) {
      throw InvalidArgument(what + ": probability entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw InvalidArgument(what + ": probabilities sum to " + std::to_string(sum));
  }
}

}  // namespace detail

/// Probability vector over states.
class Belief {
 public:
  explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidArgument("belief: empty");
    detail::check_distribution(probs_, "belief");
  }

  static Belief uniform(std::size_t num_states) {
    return Belief(std::vector<double>(num_states, 1.0 / static_cast<double>(num_states)));
  }

  static Belief point_mass(std::size_t num_states, std::size_t state) {
    if (state >= num_states) throw InvalidArgument("belief: state index out of range");
    std::vector<double> p(num_states, 0.0);
    p[state] = 1.0;
    return Belief(std::move(p));
  }

  /// Normalizes nonnegative weights into a belief. Throws
  /// ZeroLikelihoodObservation when the weights sum to zero.
  static Belief normalized(std::vector<double> weights) {
    double z = 0.0;
    for (double w : weights) z += w;
    if (!(z > 0.0)) {
      throw ZeroLikelihoodObservation("belief update: observation has zero likelihood");
    }
    for (double& w : weights) w /= z;
    return Belief(std::move(weights));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t s) const { return probs_[s]; }
  std::span<const double> probs() const { return probs_; }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  std::vector<double> probs_;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

/// Finite POMDP (S, A, T, Omega, O, R, gamma).
///
/// transition(s, a, s') = Pr(s' | s, a), observation(s', a, o) = Pr(o | s', a),
/// reward(s, a). Validated on construction.
class Pomdp {
 public:
  Pomdp(std::size_t num_states, std::size_t num_actions, std::size_t num_observations,
        std::vector<double> transition, std::vector<double> observation,
        std::vector<double> reward, double discount)
      : num_states_(num_states),
        num_actions_(num_actions),
        num_observations_(num_observations),
        transition_(std::move(transition)),
        observation_(std::move(observation)),
        reward_(std::move(reward)),
        discount_(discount) {
    validate();
  }

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_observations() const { return num_observations_; }
  double discount() const { return discount_; }

  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_[(s * num_actions_ + a) * num_states_ + next];
  }
  double observation(std::size_t next, std::size_t a, std::size_t o) const {
    return observation_[(next * num_actions_ + a) * num_observations_ + o];
  }
  double reward(std::size_t s, std::size_t a) const { return reward_[s * num_actions_ + a]; }

  std::span<const double> transition_row(std::size_t s, std::size_t a) const {
    return std::span<const double>(transition_).subspan((s * num_actions_ + a) * num_states_,
                                                        num_states_);
  }
  std::span<const double> observation_row(std::size_t next, std::size_t a) const {
    return std::span<const double>(observation_)
        .subspan((next * num_actions_ + a) * num_observations_, num_observations_);
  }

  std::span<const double> transition_tensor() const { return transition_; }
  std::span<const double> observation_tensor() const { return observation_; }
  std::span<const double> reward_tensor() const { return reward_; }

  double reward_min() const { return *std::min_element(reward_.begin(), reward_.end()); }
  double reward_max() const { return *std::max_element(reward_.begin(), reward_.end()); }

  /// max{|R_max|, |R_min|} / (1 - gamma): bound on any value or alpha entry.
  double value_bound() const {
    return std::max(std::abs(reward_max()), std::abs(reward_min())) / (1.0 - discount_);
  }

  void check_action(std::size_t a) const {
    if (a >= num_actions_) throw InvalidArgument("pomdp: action index out of range");
  }
  void check_observation(std::size_t o) const {
    if (o >= num_observations_) throw InvalidArgument("pomdp: observation index out of range");
  }
  void check_belief(const Belief& b) const {
    if (b.size() != num_states_) throw InvalidArgument("pomdp: belief dimension mismatch");
  }

 private:
  void validate() const {
    if (num_states_ == 0 || num_actions_ == 0 || num_observations_ == 0) {
      throw InvalidArgument("pomdp: dimensions must be positive");
    }
    if (transition_.size() != num_states_ * num_actions_ * num_states_) {
      throw InvalidArgument("pomdp: transition tensor has wrong size");
    }
    if (observation_.size() != num_states_ * num_actions_ * num_observations_) {
      throw InvalidArgument("pomdp: observation tensor has wrong size");
    }
    if (reward_.size() != num_states_ * num_actions_) {
      throw InvalidArgument("pomdp: reward tensor has wrong size");
    }
    if (!(discount_ >= 0.0 && discount_ < 1.0)) {
      throw InvalidArgument("pomdp: discount must lie in [0, 1)");
    }
    for (double r : reward_) {
      if (!std::isfinite(r)) throw InvalidArgument("pomdp: non-finite reward");
    }
    for (std::size_t s = 0; s < num_states_; ++s) {
      for (std::size_t a = 0; a < num_actions_; ++a) {
        detail::check_distribution(transition_row(s, a),
                                   "pomdp: transition row (" + std::to_string(s) + ", " +
                                       std::to_string(a) + ")");
        detail::check_distribution(observation_row(s, a),
                                   "pomdp: observation row (" + std::to_string(s) + ", " +
                                       std::to_string(a) + ")");
      }
    }
  }

  std::size_t num_states_;
  std::size_t num_actions_;
  std::size_t num_observations_;
  std::vector<double> transition_;
  std::vector<double> observation_;
  std::vector<double> reward_;
  double discount_;
};

/// Auxiliary observation channel with a private alphabet:
/// likelihood(s, a, o) = Pr(o | s, a) and a positive activation cost.
class InfoSource {
 public:
  InfoSource(std::size_t num_states, std::size_t num_actions, std::size_t alphabet_size,
             std::vector<double> likelihood, double cost)
      : num_states_(num_states),
        num_actions_(num_actions),
        alphabet_size_(alphabet_size),
        likelihood_(std::move(likelihood)),
        cost_(cost) {
    if (num_states_ == 0 || num_actions_ == 0 || alphabet_size_ == 0) {
      throw InvalidArgument("info source: dimensions must be positive");
    }
    if (likelihood_.size() != num_states_ * num_actions_ * alphabet_size_) {
      throw InvalidArgument("info source: likelihood tensor has wrong size");
    }
    if (!(cost_ > 0.0) || !std::isfinite(cost_)) {
      throw InvalidArgument("info source: cost must be positive");
    }
    for (std::size_t s = 0; s < num_states_; ++s) {
      for (std::size_t a = 0; a < num_actions_; ++a) {
        detail::check_distribution(row(s, a), "info source: likelihood row");
      }
    }
  }

  /// Source whose likelihood does not depend on the action.
  static InfoSource action_independent(std::size_t num_states, std::size_t num_actions,
                                       std::size_t alphabet_size,
                                       std::span<const double> per_state, double cost) {
    if (per_state.size() != num_states * alphabet_size) {
      throw InvalidArgument("info source: per-state likelihood has wrong size");
    }
    std::vector<double> full;
    full.reserve(num_states * num_actions * alphabet_size);
    for (std::size_t s = 0; s < num_states; ++s) {
      for (std::size_t a = 0; a < num_actions; ++a) {
        full.insert(full.end(), per_state.begin() + static_cast<std::ptrdiff_t>(s * alphabet_size),
                    per_state.begin() + static_cast<std::ptrdiff_t>((s + 1) * alphabet_size));
      }
    }
    return InfoSource(num_states, num_actions, alphabet_size, std::move(full), cost);
  }

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  double cost() const { return cost_; }

  double likelihood(std::size_t s, std::size_t a, std::size_t o) const {
    return likelihood_[(s * num_actions_ + a) * alphabet_size_ + o];
  }
  std::span<const double> row(std::size_t s, std::size_t a) const {
    return std::span<const double>(likelihood_).subspan((s * num_actions_ + a) * alphabet_size_,
                                                        alphabet_size_);
  }

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::size_t alphabet_size_;
  std::vector<double> likelihood_;
  double cost_;
};

/// Set of selected source indices, kept sorted ascending.
class PerceptionAction {
 public:
  PerceptionAction() = default;
  explicit PerceptionAction(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
      throw InvalidArgument("perception action: duplicate source index");
    }
  }

  bool empty() const { return indices_.empty(); }
  std::size_t size() const { return indices_.size(); }
  bool contains(std::size_t i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }
  std::span<const std::size_t> indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  PerceptionAction with(std::size_t i) const {
    if (contains(i)) throw InvalidArgument("perception action: source already selected");
    auto next = indices_;
    next.push_back(i);
    return PerceptionAction(std::move(next));
  }

  /// Throws unless every index is below `num_sources`.
  void check(std::size_t num_sources) const {
    if (!indices_.empty() && indices_.back() >= num_sources) {
      throw InvalidArgument("perception action: source index out of range");
    }
  }

  friend bool operator==(const PerceptionAction&, const PerceptionAction&) = default;
  friend auto operator<=>(const PerceptionAction&, const PerceptionAction&) = default;

 private:
  std::vector<std::size_t> indices_;
};

/// Prior-predictive state distribution: sum_s T(s, a, s') b(s).
inline std::vector<double> predict(const Pomdp& pomdp, const Belief& b, std::size_t a) {
  pomdp.check_belief(b);
  pomdp.check_action(a);
  const std::size_t n = pomdp.num_states();
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double bs = b[s];
    if (bs == 0.0) continue;
    auto row = pomdp.transition_row(s, a);
    for (std::size_t next = 0; next < n; ++next) out[next] += row[next] * bs;
  }
  return out;
}

/// Pr(o | b, a) = sum_{s'} O(s', a, o) sum_s T(s, a, s') b(s).
inline double observation_probability(const Pomdp& pomdp, const Belief& b, std::size_t a,
                                      std::size_t o) {
  pomdp.check_observation(o);
  const auto pred = predict(pomdp, b, a);
  double p = 0.0;
  for (std::size_t next = 0; next < pred.size(); ++next) p += pomdp.observation(next, a, o) * pred[next];
  return p;
}

inline double expected_immediate_reward(const Pomdp& pomdp, const Belief& b, std::size_t a) {
  pomdp.check_belief(b);
  pomdp.check_action(a);
  double r = 0.0;
  for (std::size_t s = 0; s < pomdp.num_states(); ++s) r += b[s] * pomdp.reward(s, a);
  return r;
}

/// Bayes update after acting with `a` and receiving intrinsic observation `o`.
inline Belief belief_update_intrinsic(const Pomdp& pomdp, const Belief& b, std::size_t a,
                                      std::size_t o) {
  pomdp.check_observation(o);
  auto w = predict(pomdp, b, a);
  for (std::size_t next = 0; next < w.size(); ++next) w[next] *= pomdp.observation(next, a, o);
  return Belief::normalized(std::move(w));
}

/// Bayes update with the auxiliary observations of the selected sources,
/// which are conditionally independent given the state. `observations[k]`
/// is the outcome reported by source `selection.indices()[k]`.
inline Belief belief_update_auxiliary(const Belief& b_prime, std::size_t a,
                                      const PerceptionAction& selection,
                                      std::span<const InfoSource> sources,
                                      std::span<const std::size_t> observations) {
  selection.check(sources.size());
  if (observations.size() != selection.size()) {
    throw InvalidArgument("auxiliary update: one observation per selected source required");
  }
  if (selection.empty()) return b_prime;
  std::vector<double> w(b_prime.probs().begin(), b_prime.probs().end());
  std::size_t k = 0;
  for (std::size_t i : selection) {
    const InfoSource& src = sources[i];
    if (src.num_states() != w.size()) throw InvalidArgument("auxiliary update: state mismatch");
    if (a >= src.num_actions()) throw InvalidArgument("auxiliary update: action out of range");
    const std::size_t o = observations[k++];
    if (o >= src.alphabet_size()) {
      throw InvalidArgument("auxiliary update: observation outside source alphabet");
    }
    for (std::size_t s = 0; s < w.size(); ++s) w[s] *= src.likelihood(s, a, o);
  }
  return Belief::normalized(std::move(w));
}

}  // namespace aperc
