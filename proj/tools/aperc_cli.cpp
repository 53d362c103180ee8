#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aperc/aperc.hpp"

namespace fs = std::filesystem;
using namespace aperc;

namespace {

// Bad paths and unusable flag values; exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  const char* env = std::getenv("APERC_OUT_DIR");
  return env && *env ? env : ".";
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return out;
}

ScenarioConfig load_scenario(const std::string& path) {
  auto in = open_in(path);
  return read_scenario(in);
}

struct SolverFlags {
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::size_t> beliefs;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "Convergence threshold on the l1 change over belief points");
    cmd->add_option("--max-iter", max_iter, "Iteration cap");
    cmd->add_option("--beliefs", beliefs, "Number of sampled belief points");
    cmd->add_option("--solver-seed", seed, "Belief sampling seed");
  }

  void apply(ScenarioConfig& cfg) const {
    if (tol) cfg.solve.tol = *tol;
    if (max_iter) cfg.solve.max_iter = *max_iter;
    if (beliefs) cfg.belief_count = *beliefs;
    if (seed) cfg.solver_seed = *seed;
  }
};

SolveResult run_solve(const Pomdp& pomdp, const ScenarioConfig& cfg) {
  const auto points = sample_beliefs_uniform(pomdp.num_states(), cfg.belief_count, cfg.solver_seed);
  return solve(pomdp, points, cfg.solve);
}

void report_solve(const SolveResult& res, const fs::path& out) {
  std::cout << "iterations " << res.iterations << "\n"
            << "final_delta " << format_double(res.final_delta) << "\n"
            << "stop " << (res.reason == StopReason::converged ? "converged" : "max_iterations") << "\n"
            << "vectors " << res.value_function.size() << "\n"
            << "value_function " << out.string() << "\n";
}

void save_value_function(const fs::path& path, const ValueFunction& g) {
  auto out = open_out(path);
  write_value_function(out, g);
}

std::pair<PerceptionPolicy, std::size_t> parse_policy(const std::string& label) {
  if (label == "none") return {PerceptionPolicy::none, 0};
  for (auto p : {PerceptionPolicy::random_k, PerceptionPolicy::greedy}) {
    const auto prefix = to_string(p) + "_k";
    if (label.rfind(prefix, 0) == 0 && label.size() > prefix.size()) {
      const auto digits = label.substr(prefix.size());
      if (digits.find_first_not_of("0123456789") == std::string::npos) {
        return {p, std::stoul(digits)};
      }
    }
  }
  throw ConfigError("unknown policy '" + label + "' (expected none, random_kN or greedy_kN)");
}

// ---- solve

struct SolveArgs {
  std::string scenario;
  std::string model;
  std::string out;
  SolverFlags solver;
};

void cmd_solve(const SolveArgs& a, const fs::path& out_dir) {
  ScenarioConfig cfg;
  Pomdp pomdp = [&] {
    if (!a.model.empty()) {
      auto in = open_in(a.model);
      return read_pomdp(in);
    }
    cfg = load_scenario(a.scenario);
    return build_pomdp(cfg.scenario);
  }();
  a.solver.apply(cfg);
  const auto res = run_solve(pomdp, cfg);
  const fs::path out = a.out.empty() ? out_dir / "value_function.txt" : fs::path(a.out);
  save_value_function(out, res.value_function);
  report_solve(res, out);
}

// ---- simulate

struct SimulateArgs {
  std::string scenario;
  std::string value_function;
  std::vector<std::string> policies{"none", "random_k1", "random_k2", "greedy_k1", "greedy_k2"};
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  SolverFlags solver;
};

void cmd_simulate(const SimulateArgs& a, const fs::path& out_dir) {
  auto cfg = load_scenario(a.scenario);
  a.solver.apply(cfg);
  if (a.runs) cfg.runs = *a.runs;
  if (a.seed) cfg.sim_seed = *a.seed;
  std::vector<std::pair<PerceptionPolicy, std::size_t>> policies;
  for (const auto& label : a.policies) policies.push_back(parse_policy(label));

  const auto pomdp = build_pomdp(cfg.scenario);
  const ValueFunction gamma = [&] {
    if (!a.value_function.empty()) {
      auto in = open_in(a.value_function);
      auto g = read_value_function(in);
      if (g.num_states() != pomdp.num_states()) {
        throw ConfigError("value function has " + std::to_string(g.num_states()) + " states, scenario has " +
                          std::to_string(pomdp.num_states()));
      }
      return g;
    }
    auto res = run_solve(pomdp, cfg);
    const auto path = out_dir / "value_function.txt";
    save_value_function(path, res.value_function);
    report_solve(res, path);
    return std::move(res.value_function);
  }();

  std::vector<SimResult> results;
  for (auto [policy, k] : policies) {
    auto res = monte_carlo(pomdp, gamma, cfg.scenario, policy, k, cfg.runs, cfg.sim_seed);
    const auto label = policy_label(policy, k);
    auto out = open_out(out_dir / ("visits_" + label + ".csv"));
    write_visits_csv(out, cfg.scenario, res);
    std::size_t goals = 0;
    for (const auto& ep : res.episodes) goals += ep.reached_goal;
    std::cout << label << " mean=" << format_double(res.mean_reward)
              << " sd=" << format_double(res.stddev_reward)
              << " obstacle_visits=" << obstacle_visits(cfg.scenario, res) << " steps=" << res.total_steps()
              << " goals=" << goals << " failures=" << res.failures << "\n";
    results.push_back(std::move(res));
  }
  auto out = open_out(out_dir / "rewards.csv");
  write_rewards_csv(out, results);
}

// ---- select-bench

struct BenchArgs {
  std::size_t instances = 1000;
  std::uint64_t seed = 0;
  BenchOptions opt;
  std::string out;
};

void cmd_select_bench(const BenchArgs& a, const fs::path& out_dir) {
  if (a.instances == 0) throw ConfigError("--instances must be at least 1");
  const fs::path path = a.out.empty() ? out_dir / "select_bench.csv" : fs::path(a.out);
  auto out = open_out(path);
  write_bench_header(out);
  BenchSummary summary;
  for (std::size_t i = 0; i < a.instances; ++i) {
    const auto row = bench_instance(a.seed + i, a.opt);
    write_bench_row(out, row);
    add_to_summary(summary, row);
  }
  const auto line = summary_line(summary);
  out << line << "\n";
  std::cout << line << "\n";
}

// ---- report

inline constexpr std::string_view kReportHeader = "# aperc-report 1";

struct ReportArgs {
  std::string rewards;
  std::string scenario;
  std::string out;
};

void cmd_report(const ReportArgs& a, const fs::path& out_dir) {
  const fs::path rewards_path = a.rewards.empty() ? out_dir / "rewards.csv" : fs::path(a.rewards);
  auto in = open_in(rewards_path);
  const auto rows = read_rewards_csv(in);
  std::optional<Scenario> sc;
  if (!a.scenario.empty()) sc = load_scenario(a.scenario).scenario;

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_policy;
  for (const auto& r : rows) {
    auto [it, fresh] = by_policy.try_emplace(r.policy);
    if (fresh) order.push_back(r.policy);
    it->second.push_back(r.discounted_reward);
  }

  const fs::path path = a.out.empty() ? out_dir / "summary.csv" : fs::path(a.out);
  auto out = open_out(path);
  out << kReportHeader << "\n" << "policy,runs,mean_reward,stddev_reward,steps,obstacle_visits\n";
  for (const auto& label : order) {
    const auto& v = by_policy[label];
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / double(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(sq / double(v.size() - 1)) : 0.0;
    out << label << ',' << v.size() << ',' << format_double(mean) << ',' << format_double(sd) << ',';

    const auto visits_path = rewards_path.parent_path() / ("visits_" + label + ".csv");
    if (fs::exists(visits_path)) {
      auto vin = open_in(visits_path);
      const auto grid = read_visits_csv(vin);
      std::size_t steps = 0, obstacles = 0;
      for (std::size_t r = 0; r < grid.size(); ++r) {
        for (std::size_t c = 0; c < grid[r].size(); ++c) {
          steps += grid[r][c];
          if (sc && r < sc->height && c < sc->width && sc->is_obstacle(sc->cell(r, c))) obstacles += grid[r][c];
        }
      }
      out << steps << ',';
      if (sc) out << obstacles;
    } else {
      out << ',';
    }
    out << "\n";
    std::cout << label << " runs=" << v.size() << " mean=" << format_double(mean) << " sd=" << format_double(sd)
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained active perception for POMDPs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir = default_out_dir();
  app.add_option("--out-dir", out_dir, "Output directory (default: $APERC_OUT_DIR or .)");

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a scenario or model file with PBVI");
  auto* src = solve_cmd->add_option_group("source");
  src->add_option("--scenario", solve_args.scenario, "Scenario JSON file");
  src->add_option("--model", solve_args.model, "POMDP text file");
  src->require_option(1);
  solve_cmd->add_option("--out", solve_args.out, "Value-function path (default: <out-dir>/value_function.txt)");
  solve_args.solver.add_to(solve_cmd);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo runs of the perception policies");
  sim_cmd->add_option("--scenario", sim_args.scenario, "Scenario JSON file")->required();
  sim_cmd->add_option("--value-function", sim_args.value_function, "Solved value function; solves if omitted");
  sim_cmd->add_option("--policies", sim_args.policies, "Policies: none, random_kN, greedy_kN")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--runs", sim_args.runs, "Episodes per policy");
  sim_cmd->add_option("--seed", sim_args.seed, "Seed of the first episode");
  sim_args.solver.add_to(sim_cmd);

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("select-bench", "Greedy versus brute-force selection on random instances");
  bench_cmd->add_option("--instances", bench_args.instances, "Number of instances")->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Seed of the first instance")->capture_default_str();
  bench_cmd->add_option("--max-states", bench_args.opt.limits.max_states)->capture_default_str();
  bench_cmd->add_option("--max-sources", bench_args.opt.limits.max_sources)->capture_default_str();
  bench_cmd->add_option("--max-alphabet", bench_args.opt.limits.max_alphabet)->capture_default_str();
  bench_cmd->add_option("--actions", bench_args.opt.limits.num_actions)->capture_default_str();
  bench_cmd->add_option("--beta", bench_args.opt.beta, "Gain exponent on cost")->capture_default_str();
  bench_cmd->add_option("--joint-cap", bench_args.opt.joint_cap, "Largest enumerable joint alphabet")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "CSV path (default: <out-dir>/select_bench.csv)");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Summarize simulation outputs");
  report_cmd->add_option("--rewards", report_args.rewards, "Rewards CSV (default: <out-dir>/rewards.csv)");
  report_cmd->add_option("--scenario", report_args.scenario, "Scenario JSON, for obstacle counts");
  report_cmd->add_option("--out", report_args.out, "Summary path (default: <out-dir>/summary.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const fs::path dir(out_dir);
    if (*solve_cmd) cmd_solve(solve_args, dir);
    if (*sim_cmd) cmd_simulate(sim_args, dir);
    if (*bench_cmd) cmd_select_bench(bench_args, dir);
    if (*report_cmd) cmd_report(report_args, dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidScenario& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const aperc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const TooManySources& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
