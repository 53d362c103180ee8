#pragma once

// Grid-world navigation with patrolling UAVs as auxiliary information sources.
//
// States are cells indexed row-major (row 0 at the top). Actions are
// up, right, down, left, stop. Rewards are collected on entering a cell:
// R(s, a) = sum_{s'} T(s, a, s') r(s'), where r is the goal, obstacle or step
// reward of the cell. The goal is absorbing and pays nothing once reached.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aperc/errors.hpp"
#include "aperc/info_select.hpp"
#include "aperc/pbvi.hpp"
#include "aperc/pomdp.hpp"
#include "aperc/random.hpp"

namespace aperc {

enum class Move : std::size_t { up = 0, right = 1, down = 2, left = 3, stop = 4 };
inline constexpr std::size_t kNumMoves = 5;

struct UavSpec {
  std::vector<std::size_t> waypoints;  ///< periodic patrol path, cell indices
  std::size_t fov_radius = 1;          ///< Chebyshev radius; 1 gives a 3x3 view
  double detection_accuracy = 0.9;
  double cost = 1.0;
};

enum class InitialBelief { uniform, start_cell };

struct Scenario {
  std::size_t width = 8;
  std::size_t height = 8;
  std::size_t goal_cell = 7;
  std::size_t start_cell = 56;
  std::vector<std::size_t> obstacle_cells;
  double goal_reward = 10.0;
  double obstacle_reward = -5.0;
  double step_reward = -1.0;
  double move_success_prob = 0.7;
  double intrinsic_sensor_accuracy = 0.5;
  std::vector<UavSpec> uavs;
  /// Cost budget per step; with unit costs, the number of UAVs that can be queried.
  double budget = 2.0;
  double discount = 0.95;
  std::size_t horizon = 40;
  InitialBelief initial_belief = InitialBelief::uniform;

  std::size_t num_cells() const { return width * height; }
  std::size_t row(std::size_t cell) const { return cell / width; }
  std::size_t col(std::size_t cell) const { return cell % width; }
  std::size_t cell(std::size_t r, std::size_t c) const { return r * width + c; }
  bool is_obstacle(std::size_t c) const {
    return std::find(obstacle_cells.begin(), obstacle_cells.end(), c) != obstacle_cells.end();
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw InvalidScenario("scenario: " + msg); };
    if (width == 0 || height == 0) fail("grid dimensions must be positive");
    if (num_cells() < 2) fail("grid needs at least two cells");
    if (goal_cell >= num_cells()) fail("goal cell out of bounds");
    if (start_cell >= num_cells()) fail("start cell out of bounds");
    for (auto c : obstacle_cells) {
      if (c >= num_cells()) fail("obstacle cell out of bounds");
      if (c == goal_cell) fail("goal cell is an obstacle");
    }
    auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!is_prob(move_success_prob)) fail("move_success_prob outside [0, 1]");
    if (!is_prob(intrinsic_sensor_accuracy)) fail("intrinsic_sensor_accuracy outside [0, 1]");
    if (!(discount >= 0.0 && discount < 1.0)) fail("discount must lie in [0, 1)");
    if (!(budget > 0.0)) fail("budget must be positive");
    if (horizon == 0) fail("horizon must be positive");
    for (const auto& u : uavs) {
      if (u.waypoints.empty()) fail("UAV without waypoints");
      for (auto w : u.waypoints) {
        if (w >= num_cells()) fail("UAV waypoint out of bounds");
      }
      if (!(u.detection_accuracy > 0.0 && u.detection_accuracy <= 1.0)) {
        fail("UAV detection_accuracy outside (0, 1]");
      }
      if (!(u.cost > 0.0)) fail("UAV cost must be positive");
    }
  }
};

inline double cell_reward(const Scenario& sc, std::size_t c) {
  if (c == sc.goal_cell) return sc.goal_reward;
  if (sc.is_obstacle(c)) return sc.obstacle_reward;
  return sc.step_reward;
}

namespace detail {

/// Neighbor of `c` in direction `m`, or `c` itself when the move leaves the grid.
inline std::size_t neighbor(const Scenario& sc, std::size_t c, Move m) {
  const std::size_t r = sc.row(c), k = sc.col(c);
  switch (m) {
    case Move::up: return r == 0 ? c : sc.cell(r - 1, k);
    case Move::right: return k + 1 == sc.width ? c : sc.cell(r, k + 1);
    case Move::down: return r + 1 == sc.height ? c : sc.cell(r + 1, k);
    case Move::left: return k == 0 ? c : sc.cell(r, k - 1);
    case Move::stop: return c;
  }
  return c;
}

inline std::vector<double> transition_tensor(const Scenario& sc) {
  const std::size_t n = sc.num_cells();
  std::vector<double> t(n * kNumMoves * n, 0.0);
  const double slip = (1.0 - sc.move_success_prob) / 3.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < kNumMoves; ++a) {
      double* row = &t[(s * kNumMoves + a) * n];
      const auto move = static_cast<Move>(a);
      if (s == sc.goal_cell || move == Move::stop) {
        row[s] = 1.0;
        continue;
      }
      // Perpendicular moves are the directions one step around the compass.
      const auto cw = static_cast<Move>((a + 1) % 4);
      const auto ccw = static_cast<Move>((a + 3) % 4);
      row[neighbor(sc, s, move)] += sc.move_success_prob;
      row[neighbor(sc, s, cw)] += slip;
      row[neighbor(sc, s, ccw)] += slip;
      row[s] += slip;
    }
  }
  return t;
}

}  // namespace detail

/// Navigation POMDP of the scenario. The intrinsic sensor reports the true
/// cell with `intrinsic_sensor_accuracy` and any other cell uniformly otherwise.
inline Pomdp build_pomdp(const Scenario& sc) {
  sc.validate();
  const std::size_t n = sc.num_cells();
  auto t = detail::transition_tensor(sc);

  std::vector<double> o(n * kNumMoves * n);
  const double miss = (1.0 - sc.intrinsic_sensor_accuracy) / static_cast<double>(n - 1);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < kNumMoves; ++a) {
      for (std::size_t w = 0; w < n; ++w) {
        o[(s * kNumMoves + a) * n + w] = w == s ? sc.intrinsic_sensor_accuracy : miss;
      }
    }
  }

  std::vector<double> r(n * kNumMoves, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (s == sc.goal_cell) continue;
    for (std::size_t a = 0; a < kNumMoves; ++a) {
      double acc = 0.0;
      for (std::size_t next = 0; next < n; ++next) {
        const double p = t[(s * kNumMoves + a) * n + next];
        if (p > 0.0) acc += p * cell_reward(sc, next);
      }
      r[s * kNumMoves + a] = acc;
    }
  }
  return Pomdp(n, kNumMoves, n, std::move(t), std::move(o), std::move(r), sc.discount);
}

inline std::size_t uav_position(const UavSpec& uav, std::size_t t) {
  return uav.waypoints[t % uav.waypoints.size()];
}

/// Cells within the UAV's field of view at `position`, ascending.
inline std::vector<std::size_t> field_of_view(const Scenario& sc, const UavSpec& uav,
                                              std::size_t position) {
  std::vector<std::size_t> cells;
  const auto r0 = static_cast<std::ptrdiff_t>(sc.row(position));
  const auto c0 = static_cast<std::ptrdiff_t>(sc.col(position));
  const auto rad = static_cast<std::ptrdiff_t>(uav.fov_radius);
  for (auto r = r0 - rad; r <= r0 + rad; ++r) {
    for (auto c = c0 - rad; c <= c0 + rad; ++c) {
      if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(sc.height) ||
          c >= static_cast<std::ptrdiff_t>(sc.width)) {
        continue;
      }
      cells.push_back(sc.cell(std::size_t(r), std::size_t(c)));
    }
  }
  return cells;
}

/// Observation models of every UAV at time step `t`.
///
/// A UAV's alphabet is its field-of-view cells (ascending) followed by a
/// final "not seen" symbol. A robot inside the view is reported at its true
/// cell with the detection accuracy and at any other symbol uniformly
/// otherwise; a robot outside the view is always "not seen".
inline std::vector<InfoSource> uav_sources_at(const Scenario& sc, std::size_t t) {
  const std::size_t n = sc.num_cells();
  std::vector<InfoSource> out;
  out.reserve(sc.uavs.size());
  for (const auto& uav : sc.uavs) {
    const auto fov = field_of_view(sc, uav, uav_position(uav, t));
    const std::size_t m = fov.size() + 1;
    const std::size_t not_seen = m - 1;
    const double other = (1.0 - uav.detection_accuracy) / static_cast<double>(m - 1);
    std::vector<double> per_state(n * m, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      double* row = &per_state[s * m];
      const auto it = std::find(fov.begin(), fov.end(), s);
      if (it == fov.end()) {
        row[not_seen] = 1.0;
        continue;
      }
      const auto hit = static_cast<std::size_t>(it - fov.begin());
      for (std::size_t w = 0; w < m; ++w) row[w] = w == hit ? uav.detection_accuracy : other;
    }
    out.push_back(InfoSource::action_independent(n, kNumMoves, m, per_state, uav.cost));
  }
  return out;
}

enum class PerceptionPolicy { none, random_k, greedy };

inline std::string to_string(PerceptionPolicy p) {
  switch (p) {
    case PerceptionPolicy::none: return "none";
    case PerceptionPolicy::random_k: return "random";
    case PerceptionPolicy::greedy: return "greedy";
  }
  return "?";
}

struct StepRecord {
  std::size_t state = 0;
  std::size_t action = 0;
  PerceptionAction selected;
  double reward = 0.0;  ///< undiscounted R(state, action)
};

struct EpisodeRecord {
  std::vector<StepRecord> steps;
  double discounted_reward = 0.0;
  std::size_t final_state = 0;
  bool reached_goal = false;
  /// Set when a belief update hit a zero-likelihood observation.
  std::optional<std::string> failure;
};

struct EpisodeOptions {
  PerceptionPolicy policy = PerceptionPolicy::none;
  std::size_t k = 0;  ///< sources per step for random_k; budget for greedy
  std::uint64_t seed = 0;
  /// When set, replaces the planner's action choice at each step.
  std::optional<std::vector<std::size_t>> forced_actions;
};

inline Belief initial_belief(const Scenario& sc) {
  return sc.initial_belief == InitialBelief::uniform ? Belief::uniform(sc.num_cells())
                                                     : Belief::point_mass(sc.num_cells(), sc.start_cell);
}

/// Recomputes sum_t gamma^t R(s_t, a_t) from a stored trajectory.
inline double discounted_return(const EpisodeRecord& ep, double discount) {
  double acc = 0.0, g = 1.0;
  for (const auto& st : ep.steps) {
    acc += g * st.reward;
    g *= discount;
  }
  return acc;
}

/// One closed-loop episode from the scenario's start cell.
///
/// Random streams are split by purpose (state transitions, intrinsic
/// observations, UAV reports, random selection), and every UAV report is
/// drawn each step whether or not it is requested. Runs with equal seeds thus
/// share the same environment noise across perception policies.
inline EpisodeRecord run_episode(const Pomdp& pomdp, const ValueFunction& gamma, const Scenario& sc,
                                 const EpisodeOptions& opt) {
  if (pomdp.num_states() != sc.num_cells() || gamma.num_states() != sc.num_cells()) {
    throw InvalidArgument("run_episode: model does not match scenario");
  }
  if (opt.policy != PerceptionPolicy::none && static_cast<double>(opt.k) > sc.budget) {
    throw InvalidArgument("run_episode: k exceeds the scenario budget");
  }
  Rng transition_rng(opt.seed, 1), intrinsic_rng(opt.seed, 2), report_rng(opt.seed, 3),
      select_rng(opt.seed, 4);

  EpisodeRecord ep;
  std::size_t s = sc.start_cell;
  Belief b = initial_belief(sc);
  double g = 1.0;
  for (std::size_t t = 0; t < sc.horizon; ++t) {
    if (s == sc.goal_cell) break;
    std::size_t a = best_action(gamma, b);
    if (opt.forced_actions) {
      if (t >= opt.forced_actions->size()) break;
      a = (*opt.forced_actions)[t];
      pomdp.check_action(a);
    }
    const double r = pomdp.reward(s, a);
    ep.discounted_reward += g * r;
    g *= pomdp.discount();

    const std::size_t next = transition_rng.categorical(pomdp.transition_row(s, a));
    const std::size_t obs = intrinsic_rng.categorical(pomdp.observation_row(next, a));

    const auto sources = uav_sources_at(sc, t);
    std::vector<std::size_t> reports(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
      reports[i] = report_rng.categorical(sources[i].row(next, a));
    }

    StepRecord step{s, a, {}, r};
    try {
      Belief b_prime = belief_update_intrinsic(pomdp, b, a, obs);
      PerceptionAction sel;
      switch (opt.policy) {
        case PerceptionPolicy::none: break;
        case PerceptionPolicy::random_k: {
          std::vector<std::size_t> affordable;
          for (std::size_t i = 0; i < sources.size(); ++i) {
            if (sources[i].cost() <= sc.budget) affordable.push_back(i);
          }
          // Partial Fisher-Yates: the first k entries are a uniform k-subset.
          const std::size_t take = std::min(opt.k, affordable.size());
          for (std::size_t i = 0; i < take; ++i) {
            std::swap(affordable[i], affordable[i + select_rng.index(affordable.size() - i)]);
          }
          affordable.resize(take);
          sel = PerceptionAction(std::move(affordable));
          break;
        }
        case PerceptionPolicy::greedy: {
          SelectionProblem prob{b_prime, a, sources, static_cast<double>(opt.k), 1.0, kDefaultJointCap};
          sel = generalized_greedy(prob).selected;
          break;
        }
      }
      std::vector<std::size_t> observed;
      for (std::size_t i : sel) observed.push_back(reports[i]);
      b = belief_update_auxiliary(b_prime, a, sel, sources, observed);
      step.selected = std::move(sel);
    } catch (const ZeroLikelihoodObservation& e) {
      ep.steps.push_back(std::move(step));
      ep.failure = e.what();
      s = next;
      break;
    }
    ep.steps.push_back(std::move(step));
    s = next;
  }
  ep.final_state = s;
  ep.reached_goal = s == sc.goal_cell;
  return ep;
}

struct SimResult {
  PerceptionPolicy policy = PerceptionPolicy::none;
  std::size_t k = 0;
  std::vector<EpisodeRecord> episodes;
  /// visits[cell]: number of steps taken from that cell, summed over episodes.
  std::vector<std::size_t> visits;
  double mean_reward = 0.0;
  double stddev_reward = 0.0;  ///< sample standard deviation; 0 for one run
  std::size_t failures = 0;

  std::size_t total_steps() const {
    std::size_t n = 0;
    for (auto v : visits) n += v;
    return n;
  }
};

/// `n_runs` episodes with seeds base_seed, base_seed + 1, ...; aggregation
/// is in seed order.
inline SimResult monte_carlo(const Pomdp& pomdp, const ValueFunction& gamma, const Scenario& sc,
                             PerceptionPolicy policy, std::size_t k, std::size_t n_runs,
                             std::uint64_t base_seed) {
  if (n_runs == 0) throw InvalidArgument("monte_carlo: n_runs must be at least 1");
  SimResult res;
  res.policy = policy;
  res.k = k;
  res.visits.assign(sc.num_cells(), 0);
  for (std::size_t run = 0; run < n_runs; ++run) {
    EpisodeOptions opt{policy, k, base_seed + run, std::nullopt};
    auto ep = run_episode(pomdp, gamma, sc, opt);
    for (const auto& st : ep.steps) ++res.visits[st.state];
    if (ep.failure) ++res.failures;
    res.episodes.push_back(std::move(ep));
  }
  double sum = 0.0;
  for (const auto& ep : res.episodes) sum += ep.discounted_reward;
  res.mean_reward = sum / static_cast<double>(n_runs);
  if (n_runs > 1) {
    double sq = 0.0;
    for (const auto& ep : res.episodes) {
      const double d = ep.discounted_reward - res.mean_reward;
      sq += d * d;
    }
    res.stddev_reward = std::sqrt(sq / static_cast<double>(n_runs - 1));
  }
  return res;
}

/// Number of steps taken from obstacle cells.
inline std::size_t obstacle_visits(const Scenario& sc, const SimResult& res) {
  std::size_t n = 0;
  for (auto c : sc.obstacle_cells) n += res.visits[c];
  return n;
}

}  // namespace aperc
