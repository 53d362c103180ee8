#pragma once

// Point-based value iteration over a fixed, uniformly sampled belief set.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "aperc/errors.hpp"
#include "aperc/pomdp.hpp"
#include "aperc/random.hpp"

namespace aperc {

/// One linear facet of the value function, tagged with its maximizing action.
struct AlphaVector {
  std::vector<double> coeffs;
  std::size_t action = 0;

  friend bool operator==(const AlphaVector&, const AlphaVector&) = default;
};

/// Piecewise-linear convex value function: V(b) = max_alpha alpha . b.
class ValueFunction {
 public:
  explicit ValueFunction(std::vector<AlphaVector> alphas) : alphas_(std::move(alphas)) {
    if (alphas_.empty()) throw InvalidArgument("value function: needs at least one alpha vector");
    const std::size_t n = alphas_.front().coeffs.size();
    if (n == 0) throw InvalidArgument("value function: empty alpha vector");
    for (const auto& alpha : alphas_) {
      if (alpha.coeffs.size() != n) throw InvalidArgument("value function: ragged alpha vectors");
    }
  }

  std::size_t num_states() const { return alphas_.front().coeffs.size(); }
  std::size_t size() const { return alphas_.size(); }
  const std::vector<AlphaVector>& alphas() const { return alphas_; }
  const AlphaVector& operator[](std::size_t i) const { return alphas_[i]; }

  /// Index of the maximizing vector at `b`; ties go to the lowest index.
  std::size_t best_index(const Belief& b) const {
    if (b.size() != num_states()) throw InvalidArgument("value function: belief dimension mismatch");
    std::size_t best = 0;
    double best_value = dot(alphas_[0].coeffs, b.probs());
    for (std::size_t i = 1; i < alphas_.size(); ++i) {
      const double v = dot(alphas_[i].coeffs, b.probs());
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    return best;
  }

  friend bool operator==(const ValueFunction&, const ValueFunction&) = default;

 private:
  std::vector<AlphaVector> alphas_;
};

inline double value(const ValueFunction& gamma, const Belief& b) {
  return dot(gamma[gamma.best_index(b)].coeffs, b.probs());
}

inline std::size_t best_action(const ValueFunction& gamma, const Belief& b) {
  return gamma[gamma.best_index(b)].action;
}

struct BeliefPointSet {
  std::vector<Belief> points;

  explicit BeliefPointSet(std::vector<Belief> pts) : points(std::move(pts)) {
    if (points.empty()) throw InvalidArgument("belief set: empty");
    for (const auto& b : points) {
      if (b.size() != points.front().size()) throw InvalidArgument("belief set: ragged beliefs");
    }
  }

  std::size_t size() const { return points.size(); }
  std::size_t num_states() const { return points.front().size(); }
};

/// `count` flat-Dirichlet draws from the simplex, followed by the centroid and
/// every corner. Exact duplicates are dropped.
inline BeliefPointSet sample_beliefs_uniform(std::size_t num_states, std::size_t count,
                                             std::uint64_t seed) {
  if (num_states == 0) throw InvalidArgument("belief sampling: num_states must be positive");
  if (count == 0) throw InvalidArgument("belief sampling: count must be positive");
  Rng rng(seed);
  std::vector<Belief> pts;
  pts.reserve(count + num_states + 1);
  for (std::size_t i = 0; i < count; ++i) pts.emplace_back(rng.dirichlet_flat(num_states));
  pts.push_back(Belief::uniform(num_states));
  for (std::size_t s = 0; s < num_states; ++s) pts.push_back(Belief::point_mass(num_states, s));

  std::set<std::vector<double>> seen;
  std::vector<Belief> unique;
  unique.reserve(pts.size());
  for (auto& b : pts) {
    std::vector<double> key(b.probs().begin(), b.probs().end());
    if (seen.insert(std::move(key)).second) unique.push_back(std::move(b));
  }
  return BeliefPointSet(std::move(unique));
}

/// Single constant vector R_min / (1 - gamma), a lower bound on every value.
inline ValueFunction initialize_value(const Pomdp& pomdp) {
  const double v = pomdp.reward_min() / (1.0 - pomdp.discount());
  return ValueFunction({AlphaVector{std::vector<double>(pomdp.num_states(), v), 0}});
}

namespace detail {

using Matrix = Eigen::MatrixXd;

inline Matrix belief_matrix(const BeliefPointSet& beliefs) {
  Matrix m(beliefs.num_states(), beliefs.size());
  for (std::size_t j = 0; j < beliefs.size(); ++j) {
    const auto& b = beliefs.points[j];
    for (std::size_t s = 0; s < b.size(); ++s) m(Eigen::Index(s), Eigen::Index(j)) = b[s];
  }
  return m;
}

inline Matrix alpha_matrix(const ValueFunction& gamma) {
  Matrix m(gamma.size(), gamma.num_states());
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    for (std::size_t s = 0; s < gamma.num_states(); ++s) {
      m(Eigen::Index(i), Eigen::Index(s)) = gamma[i].coeffs[s];
    }
  }
  return m;
}

/// Column-wise argmax; ties resolve to the lowest row.
inline std::vector<Eigen::Index> column_argmax(const Matrix& scores) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(scores.cols()), 0);
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    Eigen::Index best = 0;
    double best_value = scores(0, j);
    for (Eigen::Index i = 1; i < scores.rows(); ++i) {
      if (scores(i, j) > best_value) {
        best_value = scores(i, j);
        best = i;
      }
    }
    idx[static_cast<std::size_t>(j)] = best;
  }
  return idx;
}

/// First index of the maximum of `v`.
inline Eigen::Index first_argmax(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  Eigen::Index i = 0;
  // Skip whole blocks first; maxCoeff on a fixed-size segment vectorizes.
  for (; i + 16 <= v.size(); i += 16) {
    if (v.segment<16>(i).maxCoeff() == top) break;
  }
  while (v(i) != top) ++i;
  return i;
}

/// ValueFunction::best_index at every point. A matrix product ranks the
/// vectors, then the near-maximal ones are re-scored with `dot` so the result
/// is exactly what best_index would return.
inline std::vector<std::size_t> best_indices(const ValueFunction& gamma, const BeliefPointSet& beliefs) {
  const Matrix scores = alpha_matrix(gamma) * belief_matrix(beliefs);
  std::vector<std::size_t> out(beliefs.size());
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    const double top = scores.col(j).maxCoeff();
    const double slack = 1e-9 * (1.0 + std::abs(top));
    const auto& b = beliefs.points[std::size_t(j)];
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      if (scores(i, j) < top - slack) continue;
      const double v = dot(gamma[std::size_t(i)].coeffs, b.probs());
      if (v > best_value) {
        best_value = v;
        best = std::size_t(i);
      }
    }
    out[std::size_t(j)] = best;
  }
  return out;
}

/// One observation column O(., a, o) written as base + residual, where the
/// residual is nonzero only on `support`. The base is the most frequent
/// entry when that makes the residual sparser, zero otherwise.
struct ObservationSplit {
  double base = 0.0;
  std::vector<Eigen::Index> support;
  Eigen::VectorXd residual;
  bool empty() const { return base == 0.0 && support.empty(); }
};

inline ObservationSplit split_observation(const Eigen::VectorXd& column) {
  std::vector<double> sorted(column.data(), column.data() + column.size());
  std::sort(sorted.begin(), sorted.end());
  double mode = sorted.front();
  std::size_t mode_count = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    if (j - i > mode_count) {
      mode_count = j - i;
      mode = sorted[i];
    }
    i = j;
  }
  std::size_t nonzero = 0;
  for (double x : sorted) nonzero += x != 0.0;
  const std::size_t with_mode = sorted.size() - mode_count + 1;  // +1 for the shared product
  ObservationSplit out;
  out.base = with_mode < nonzero ? mode : 0.0;
  for (Eigen::Index s = 0; s < column.size(); ++s) {
    if (column(s) != out.base) out.support.push_back(s);
  }
  out.residual.resize(Eigen::Index(out.support.size()));
  for (std::size_t k = 0; k < out.support.size(); ++k) out.residual(Eigen::Index(k)) = column(out.support[k]) - out.base;
  return out;
}

}  // namespace detail

/// Point-based Bellman backup of `previous` on the belief points `beliefs`.
///
///   1. alpha^{a,*}(s)     = R(s, a)
///   2. alpha^{a,o}(s)     = gamma sum_{s'} O(s', a, o) T(s, a, s') alpha(s')
///   3. alpha^{b,a}        = alpha^{a,*} + sum_o argmax_{alpha^{a,o}} alpha^{a,o} . b
///   4. alpha^b            = argmax_a alpha^{b,a} . b
///   5. union over b, exact duplicates removed
///
/// Step-3 ties go to the lowest vector index, step-4 ties to the lowest action.
///
/// Steps 2 and 3 are evaluated without forming alpha^{a,o}: with the predicted
/// point p = T_a^T b, alpha^{a,o} . b = gamma sum_{s'} alpha(s') O(s', a, o) p(s').
/// Observation columns that are constant except on a few states share one
/// product of the previous set with the predicted points.
inline ValueFunction backup(const Pomdp& pomdp, const ValueFunction& previous,
                            const BeliefPointSet& beliefs) {
  using detail::Matrix;
  const auto num_states = Eigen::Index(pomdp.num_states());
  const std::size_t num_actions = pomdp.num_actions();
  const std::size_t num_obs = pomdp.num_observations();
  if (previous.num_states() != pomdp.num_states() || beliefs.num_states() != pomdp.num_states()) {
    throw InvalidArgument("backup: dimension mismatch");
  }
  const auto num_points = Eigen::Index(beliefs.size());
  const auto num_prev = Eigen::Index(previous.size());
  const double discount = pomdp.discount();

  const Matrix points = detail::belief_matrix(beliefs);
  const Matrix prev = detail::alpha_matrix(previous);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> prev_rows = prev;

  // Best alpha^{b,a} per action, stored column-wise per belief point.
  std::vector<Matrix> assembled(num_actions);
  Matrix assembled_values(Eigen::Index(num_actions), num_points);

  Matrix transition(num_states, num_states);
  Eigen::VectorXd scores(num_prev);
  for (std::size_t a = 0; a < num_actions; ++a) {
    for (Eigen::Index s = 0; s < num_states; ++s) {
      for (Eigen::Index next = 0; next < num_states; ++next) {
        transition(s, next) = pomdp.transition(std::size_t(s), a, std::size_t(next));
      }
    }
    const Matrix predicted = transition.transpose() * points;

    Matrix obs(num_states, Eigen::Index(num_obs));
    for (Eigen::Index next = 0; next < num_states; ++next) {
      for (std::size_t o = 0; o < num_obs; ++o) obs(next, Eigen::Index(o)) = pomdp.observation(std::size_t(next), a, o);
    }
    std::vector<detail::ObservationSplit> splits;
    std::vector<Matrix> scaled;  // previous set restricted to each support, times the residual
    bool any_base = false;
    for (std::size_t o = 0; o < num_obs; ++o) {
      auto split = detail::split_observation(obs.col(Eigen::Index(o)));
      Matrix u(num_prev, Eigen::Index(split.support.size()));
      for (std::size_t k = 0; k < split.support.size(); ++k) {
        u.col(Eigen::Index(k)) = prev.col(split.support[k]) * split.residual(Eigen::Index(k));
      }
      any_base = any_base || split.base != 0.0;
      splits.push_back(std::move(split));
      scaled.push_back(std::move(u));
    }
    const Matrix shared = any_base ? Matrix(prev * predicted) : Matrix();

    // y(., b) = sum_o O(., a, o) .* alpha_{best(b, o)}; then alpha^{b,a} = R_a + gamma T_a y.
    Matrix y = Matrix::Zero(num_states, num_points);
    Eigen::VectorXd gathered;
    for (Eigen::Index j = 0; j < num_points; ++j) {
      for (std::size_t o = 0; o < num_obs; ++o) {
        const auto& split = splits[o];
        if (split.empty()) continue;  // contributes the zero vector
        const auto k = Eigen::Index(split.support.size());
        if (split.base != 0.0 && k == 1) {
          scores.noalias() = split.base * shared.col(j) + predicted(split.support[0], j) * scaled[o].col(0);
        } else {
          if (split.base != 0.0) {
            scores.noalias() = split.base * shared.col(j);
          } else {
            scores.setZero();
          }
          if (k <= 4) {
            for (Eigen::Index i = 0; i < k; ++i) {
              scores.noalias() += predicted(split.support[std::size_t(i)], j) * scaled[o].col(i);
            }
          } else {
            gathered.resize(k);
            for (Eigen::Index i = 0; i < k; ++i) gathered(i) = predicted(split.support[std::size_t(i)], j);
            scores.noalias() += scaled[o] * gathered;
          }
        }
        const Eigen::Index best = detail::first_argmax(scores);
        y.col(j) += obs.col(Eigen::Index(o)).cwiseProduct(prev_rows.row(best).transpose());
      }
    }
    Matrix& acc = assembled[a];
    acc.noalias() = discount * (transition * y);
    for (Eigen::Index s = 0; s < num_states; ++s) acc.row(s).array() += pomdp.reward(std::size_t(s), a);
    for (Eigen::Index j = 0; j < num_points; ++j) {
      assembled_values(Eigen::Index(a), j) = acc.col(j).dot(points.col(j));
    }
  }

  // Step 4 and 5.
  const auto best_actions = detail::column_argmax(assembled_values);
  std::set<std::vector<double>> seen;
  std::vector<AlphaVector> out;
  for (Eigen::Index j = 0; j < num_points; ++j) {
    const auto a = std::size_t(best_actions[std::size_t(j)]);
    std::vector<double> coeffs(static_cast<std::size_t>(num_states));
    for (Eigen::Index s = 0; s < num_states; ++s) coeffs[std::size_t(s)] = assembled[a](s, j);
    if (seen.insert(coeffs).second) out.push_back(AlphaVector{std::move(coeffs), a});
  }
  return ValueFunction(std::move(out));
}

/// Keeps exactly the vectors that are maximal at some belief point (ties keep
/// the lowest index), preserving their relative order.
inline ValueFunction prune(const ValueFunction& gamma, const BeliefPointSet& beliefs) {
  if (beliefs.num_states() != gamma.num_states()) throw InvalidArgument("prune: dimension mismatch");
  std::vector<bool> keep(gamma.size(), false);
  for (auto i : detail::best_indices(gamma, beliefs)) keep[i] = true;
  std::vector<AlphaVector> out;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (keep[i]) out.push_back(gamma[i]);
  }
  return ValueFunction(std::move(out));
}

struct SolveOptions {
  double tol = 0.001;
  std::size_t max_iter = 1000;
  /// Called after every iteration with (iteration, l1 delta, current set).
  std::function<void(std::size_t, double, const ValueFunction&)> on_iteration;
};

enum class StopReason { converged, max_iterations };

struct SolveResult {
  ValueFunction value_function;
  std::size_t iterations = 0;
  /// l1 distance over the belief points between the last two iterates.
  double final_delta = 0.0;
  StopReason reason = StopReason::max_iterations;
};

inline std::vector<double> values_at(const ValueFunction& gamma, const BeliefPointSet& beliefs) {
  if (beliefs.num_states() != gamma.num_states()) throw InvalidArgument("values_at: dimension mismatch");
  const auto best = detail::best_indices(gamma, beliefs);
  std::vector<double> v(beliefs.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = dot(gamma[best[j]].coeffs, beliefs.points[j].probs());
  return v;
}

/// Union of two vector sets, `first` before `second`, exact duplicates removed.
inline ValueFunction merge(const ValueFunction& first, const ValueFunction& second) {
  if (first.num_states() != second.num_states()) throw InvalidArgument("merge: dimension mismatch");
  std::set<std::vector<double>> seen;
  std::vector<AlphaVector> out;
  for (const auto* set : {&first, &second}) {
    for (const auto& alpha : set->alphas()) {
      if (seen.insert(alpha.coeffs).second) out.push_back(alpha);
    }
  }
  return ValueFunction(std::move(out));
}

/// Iterates from the uniform lower bound until the l1 change over the belief
/// points drops below `tol` or `max_iter` iterations ran.
///
/// Each iteration backs up the current set, merges the previous vectors back
/// in and prunes on the belief points. Keeping the previous vectors makes the
/// values at the belief points nondecreasing; the bare backup can lose value
/// at a point once pruning has discarded vectors that were optimal elsewhere.
inline SolveResult solve(const Pomdp& pomdp, const BeliefPointSet& beliefs,
                         const SolveOptions& options = {}) {
  if (!(options.tol > 0.0)) throw InvalidArgument("solve: tol must be positive");
  if (options.max_iter == 0) throw InvalidArgument("solve: max_iter must be at least 1");
  ValueFunction gamma = initialize_value(pomdp);
  std::vector<double> prev_values = values_at(gamma, beliefs);
  SolveResult result{gamma, 0, std::numeric_limits<double>::infinity(), StopReason::max_iterations};
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    gamma = prune(merge(backup(pomdp, gamma, beliefs), gamma), beliefs);
    auto values = values_at(gamma, beliefs);
    double delta = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) delta += std::abs(values[j] - prev_values[j]);
    prev_values = std::move(values);
    result.iterations = it;
    result.final_delta = delta;
    if (options.on_iteration) options.on_iteration(it, delta, gamma);
    if (delta < options.tol) {
      result.reason = StopReason::converged;
      break;
    }
  }
  result.value_function = std::move(gamma);
  return result;
}

}  // namespace aperc
