#pragma once

// Seeded benchmark of the selection guarantees: greedy against brute force on
// random instances, plus the distance and value-loss bounds.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <vector>

#include "aperc/info_select.hpp"
#include "aperc/model_io.hpp"
#include "aperc/pbvi.hpp"
#include "aperc/random_instances.hpp"

namespace aperc {

inline constexpr std::string_view kSelectBenchHeader = "# aperc-select-bench 1";

struct BenchOptions {
  InstanceLimits limits;
  double beta = 1.0;
  std::uint64_t joint_cap = kDefaultJointCap;
  double discount = 0.9;
  std::size_t belief_points = 50;
  std::size_t max_solve_iter = 200;
};

struct BenchRow {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double budget = 0.0;
  double greedy_utility = 0.0;
  double optimal_utility = 0.0;
  double ratio = 1.0;
  bool theorem1_pass = true;
  bool theorem2_pass = true;
  /// Value-loss bound under both the one-backup and the solved value function.
  bool theorem3_pass = true;
  double distance_lhs = 0.0;
  double distance_rhs = 0.0;
};

inline BenchRow bench_instance(std::uint64_t seed, const BenchOptions& opt = {}) {
  auto p = random_selection_problem(seed, opt.limits);
  p.beta = opt.beta;
  p.joint_cap = opt.joint_cap;
  const auto greedy = generalized_greedy(p);
  const auto optimal = brute_force_optimal(p);
  BenchRow row;
  row.seed = seed;
  row.n = p.sources.size();
  row.budget = p.budget;
  row.greedy_utility = greedy.utility;
  row.optimal_utility = optimal.utility;
  row.ratio = optimal.utility > 0.0 ? greedy.utility / optimal.utility : 1.0;
  row.theorem1_pass = greedy.utility >= kGreedyRatio * optimal.utility - kBoundSlack;

  const auto dist = distance_bound(p, p.belief, greedy.selected, optimal.selected);
  row.distance_lhs = dist.lhs;
  row.distance_rhs = dist.rhs;
  row.theorem2_pass = dist.pass;

  Rng rng(seed, 0xb0);
  const auto m = random_pomdp(rng, p.belief.size(), opt.limits.num_actions, 2, opt.discount);
  const auto points = sample_beliefs_uniform(m.num_states(), opt.belief_points, seed);
  const auto one = backup(m, initialize_value(m), points);
  SolveOptions so;
  so.max_iter = opt.max_solve_iter;
  const auto solved = solve(m, points, so).value_function;
  row.theorem3_pass = value_bound(m, one, p, p.belief, greedy.selected, optimal.selected).pass &&
                      value_bound(m, solved, p, p.belief, greedy.selected, optimal.selected).pass;
  return row;
}

struct BenchSummary {
  std::size_t instances = 0;
  double min_ratio = 1.0;
  std::size_t theorem1_failures = 0;
  std::size_t theorem2_failures = 0;
  std::size_t theorem3_failures = 0;
};

inline void add_to_summary(BenchSummary& s, const BenchRow& r) {
  ++s.instances;
  s.min_ratio = std::min(s.min_ratio, r.ratio);
  s.theorem1_failures += !r.theorem1_pass;
  s.theorem2_failures += !r.theorem2_pass;
  s.theorem3_failures += !r.theorem3_pass;
}

inline void write_bench_header(std::ostream& out) {
  out << kSelectBenchHeader << "\n"
      << "seed,n,budget,greedy_utility,optimal_utility,ratio,theorem1_pass,theorem2_pass,theorem3_pass\n";
}

inline void write_bench_row(std::ostream& out, const BenchRow& r) {
  out << r.seed << ',' << r.n << ',' << format_double(r.budget) << ',' << format_double(r.greedy_utility)
      << ',' << format_double(r.optimal_utility) << ',' << format_double(r.ratio) << ','
      << int(r.theorem1_pass) << ',' << int(r.theorem2_pass) << ',' << int(r.theorem3_pass) << "\n";
}

inline std::string summary_line(const BenchSummary& s) {
  return "# summary instances=" + std::to_string(s.instances) + " min_ratio=" + format_double(s.min_ratio) +
         " guarantee=" + format_double(kGreedyRatio) +
         " theorem1_failures=" + std::to_string(s.theorem1_failures) +
         " theorem2_failures=" + std::to_string(s.theorem2_failures) +
         " theorem3_failures=" + std::to_string(s.theorem3_failures);
}

}  // namespace aperc
