#pragma once

// Scenario files (JSON) and simulation output CSVs.
//
// Scenario file, all keys except "format" optional (defaults in parentheses):
//
//   {
//     "format": "aperc-scenario 1",
//     "grid": {"width": 8, "height": 8},
//     "start": [row, col],            (7, 0)
//     "goal": [row, col],             (0, 7)
//     "obstacles": [[row, col], ...],
//     "rewards": {"goal": 10, "obstacle": -5, "step": -1},
//     "move_success_prob": 0.7,
//     "intrinsic_sensor_accuracy": 0.5,
//     "initial_belief": "uniform" | "start",
//     "budget": 2, "discount": 0.95, "horizon": 40,
//     "uav_defaults": {"fov_radius": 1, "detection_accuracy": 0.9, "cost": 1},
//     "uavs": [
//       {"waypoints": [[row, col], ...]},
//       {"loop": {"top": r0, "left": c0, "bottom": r1, "right": c1}, "phase": 0}
//     ],
//     "solver": {"belief_count": 2000, "tol": 0.001, "max_iter": 1000, "seed": 1},
//     "simulation": {"runs": 50, "seed": 1}
//   }
//
// A "loop" patrols the rectangle's perimeter clockwise from its top-left
// corner; "phase" rotates the starting waypoint. Each UAV may override the
// "uav_defaults" keys.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aperc/errors.hpp"
#include "aperc/gridworld.hpp"
#include "aperc/model_io.hpp"
#include "aperc/pbvi.hpp"

namespace aperc {

inline constexpr std::string_view kScenarioFormat = "aperc-scenario 1";
inline constexpr std::string_view kVisitsHeader = "# aperc-visits 1";
inline constexpr std::string_view kRewardsHeader = "# aperc-rewards 1";

struct ScenarioConfig {
  Scenario scenario;
  std::size_t belief_count = 2000;
  SolveOptions solve;
  std::uint64_t solver_seed = 1;
  std::size_t runs = 50;
  std::uint64_t sim_seed = 1;
};

namespace detail {

using nlohmann::json;

inline std::size_t cell_from_json(const Scenario& sc, const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError(std::string("scenario: ") + what + " must be [row, col]");
  }
  const auto r = j[0].get<long long>();
  const auto c = j[1].get<long long>();
  if (r < 0 || c < 0 || r >= static_cast<long long>(sc.height) || c >= static_cast<long long>(sc.width)) {
    throw InvalidScenario(std::string("scenario: ") + what + " out of bounds");
  }
  return sc.cell(std::size_t(r), std::size_t(c));
}

/// Clockwise perimeter of the rectangle, starting at its top-left corner.
inline std::vector<std::size_t> loop_waypoints(const Scenario& sc, std::size_t top, std::size_t left,
                                               std::size_t bottom, std::size_t right) {
  if (top > bottom || left > right || bottom >= sc.height || right >= sc.width) {
    throw InvalidScenario("scenario: UAV loop rectangle out of bounds or inverted");
  }
  std::vector<std::size_t> w;
  if (top == bottom || left == right) {
    // Degenerate rectangle: sweep the segment back and forth.
    for (std::size_t r = top; r <= bottom; ++r)
      for (std::size_t c = left; c <= right; ++c) w.push_back(sc.cell(r, c));
    for (std::size_t i = w.size() - 1; i-- > 1;) w.push_back(w[i]);
    return w;
  }
  for (std::size_t c = left; c < right; ++c) w.push_back(sc.cell(top, c));
  for (std::size_t r = top; r < bottom; ++r) w.push_back(sc.cell(r, right));
  for (std::size_t c = right; c > left; --c) w.push_back(sc.cell(bottom, c));
  for (std::size_t r = bottom; r > top; --r) w.push_back(sc.cell(r, left));
  return w;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::get_or;
  if (!j.is_object()) throw ParseError("scenario: top level must be an object");
  if (get_or<std::string>(j, "format", "") != kScenarioFormat) {
    throw ParseError("scenario: missing or unsupported \"format\" (expected \"" +
                     std::string(kScenarioFormat) + "\")");
  }
  ScenarioConfig cfg;
  Scenario& sc = cfg.scenario;
  if (j.contains("grid")) {
    sc.width = get_or<std::size_t>(j["grid"], "width", sc.width);
    sc.height = get_or<std::size_t>(j["grid"], "height", sc.height);
  }
  if (sc.width == 0 || sc.height == 0) throw InvalidScenario("scenario: grid dimensions must be positive");
  sc.start_cell = j.contains("start") ? detail::cell_from_json(sc, j["start"], "start")
                                      : sc.cell(sc.height - 1, 0);
  sc.goal_cell = j.contains("goal") ? detail::cell_from_json(sc, j["goal"], "goal")
                                    : sc.cell(0, sc.width - 1);
  if (j.contains("obstacles")) {
    for (const auto& o : j["obstacles"]) sc.obstacle_cells.push_back(detail::cell_from_json(sc, o, "obstacle"));
  }
  if (j.contains("rewards")) {
    const auto& r = j["rewards"];
    sc.goal_reward = get_or<double>(r, "goal", sc.goal_reward);
    sc.obstacle_reward = get_or<double>(r, "obstacle", sc.obstacle_reward);
    sc.step_reward = get_or<double>(r, "step", sc.step_reward);
  }
  sc.move_success_prob = get_or<double>(j, "move_success_prob", sc.move_success_prob);
  sc.intrinsic_sensor_accuracy = get_or<double>(j, "intrinsic_sensor_accuracy", sc.intrinsic_sensor_accuracy);
  const auto init = get_or<std::string>(j, "initial_belief", "uniform");
  if (init == "uniform") {
    sc.initial_belief = InitialBelief::uniform;
  } else if (init == "start") {
    sc.initial_belief = InitialBelief::start_cell;
  } else {
    throw ParseError("scenario: initial_belief must be \"uniform\" or \"start\"");
  }
  sc.budget = get_or<double>(j, "budget", sc.budget);
  sc.discount = get_or<double>(j, "discount", sc.discount);
  sc.horizon = get_or<std::size_t>(j, "horizon", sc.horizon);

  UavSpec defaults;
  if (j.contains("uav_defaults")) {
    const auto& d = j["uav_defaults"];
    defaults.fov_radius = get_or<std::size_t>(d, "fov_radius", defaults.fov_radius);
    defaults.detection_accuracy = get_or<double>(d, "detection_accuracy", defaults.detection_accuracy);
    defaults.cost = get_or<double>(d, "cost", defaults.cost);
  }
  if (j.contains("uavs")) {
    for (const auto& u : j["uavs"]) {
      UavSpec spec = defaults;
      spec.fov_radius = get_or<std::size_t>(u, "fov_radius", spec.fov_radius);
      spec.detection_accuracy = get_or<double>(u, "detection_accuracy", spec.detection_accuracy);
      spec.cost = get_or<double>(u, "cost", spec.cost);
      if (u.contains("waypoints")) {
        for (const auto& w : u["waypoints"]) spec.waypoints.push_back(detail::cell_from_json(sc, w, "waypoint"));
      } else if (u.contains("loop")) {
        const auto& l = u["loop"];
        spec.waypoints = detail::loop_waypoints(
            sc, get_or<std::size_t>(l, "top", 0), get_or<std::size_t>(l, "left", 0),
            get_or<std::size_t>(l, "bottom", 0), get_or<std::size_t>(l, "right", 0));
      } else {
        throw ParseError("scenario: UAV needs \"waypoints\" or \"loop\"");
      }
      if (spec.waypoints.empty()) throw InvalidScenario("scenario: UAV without waypoints");
      const auto phase = get_or<std::size_t>(u, "phase", 0) % spec.waypoints.size();
      std::rotate(spec.waypoints.begin(), spec.waypoints.begin() + std::ptrdiff_t(phase),
                  spec.waypoints.end());
      sc.uavs.push_back(std::move(spec));
    }
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    cfg.belief_count = get_or<std::size_t>(s, "belief_count", cfg.belief_count);
    cfg.solve.tol = get_or<double>(s, "tol", cfg.solve.tol);
    cfg.solve.max_iter = get_or<std::size_t>(s, "max_iter", cfg.solve.max_iter);
    cfg.solver_seed = get_or<std::uint64_t>(s, "seed", cfg.solver_seed);
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    cfg.runs = get_or<std::size_t>(s, "runs", cfg.runs);
    cfg.sim_seed = get_or<std::uint64_t>(s, "seed", cfg.sim_seed);
  }
  sc.validate();
  return cfg;
}

inline ScenarioConfig read_scenario(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return parse_scenario(j);
}

inline std::string policy_label(PerceptionPolicy p, std::size_t k) {
  return p == PerceptionPolicy::none ? "none" : to_string(p) + "_k" + std::to_string(k);
}

/// height x width grid of visit counts, one CSV row per grid row.
inline void write_visits_csv(std::ostream& out, const Scenario& sc, const SimResult& res) {
  out << kVisitsHeader << " policy=" << policy_label(res.policy, res.k)
      << " runs=" << res.episodes.size() << " width=" << sc.width << " height=" << sc.height << '\n';
  for (std::size_t r = 0; r < sc.height; ++r) {
    for (std::size_t c = 0; c < sc.width; ++c) {
      out << res.visits[sc.cell(r, c)] << (c + 1 == sc.width ? '\n' : ',');
    }
  }
}

inline std::vector<std::vector<std::size_t>> read_visits_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kVisitsHeader, 0) != 0) {
    throw ParseError("visits csv: missing header");
  }
  std::vector<std::vector<std::size_t>> grid;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::size_t> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stoull(cell));
      } catch (const std::exception&) {
        throw ParseError("visits csv: bad count '" + cell + "'");
      }
    }
    if (!grid.empty() && row.size() != grid.front().size()) throw ParseError("visits csv: ragged rows");
    grid.push_back(std::move(row));
  }
  return grid;
}

/// Long-format rewards: one row per (run, policy).
inline void write_rewards_csv(std::ostream& out, const std::vector<SimResult>& results) {
  out << kRewardsHeader << '\n' << "run,policy,discounted_reward\n";
  for (const auto& res : results) {
    const auto label = policy_label(res.policy, res.k);
    for (std::size_t run = 0; run < res.episodes.size(); ++run) {
      out << run << ',' << label << ',' << format_double(res.episodes[run].discounted_reward) << '\n';
    }
  }
}

struct RewardRow {
  std::size_t run = 0;
  std::string policy;
  double discounted_reward = 0.0;
};

inline std::vector<RewardRow> read_rewards_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kRewardsHeader, 0) != 0) {
    throw ParseError("rewards csv: missing header");
  }
  if (!std::getline(in, line) || line != "run,policy,discounted_reward") {
    throw ParseError("rewards csv: missing column header");
  }
  std::vector<RewardRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string run, policy, reward;
    if (!std::getline(ss, run, ',') || !std::getline(ss, policy, ',') || !std::getline(ss, reward)) {
      throw ParseError("rewards csv: malformed row '" + line + "'");
    }
    try {
      rows.push_back(RewardRow{std::stoull(run), policy, std::stod(reward)});
    } catch (const std::exception&) {
      throw ParseError("rewards csv: malformed row '" + line + "'");
    }
  }
  return rows;
}

}  // namespace aperc
