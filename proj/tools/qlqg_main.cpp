#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "qlqg/config.hpp"
#include "qlqg/csv.hpp"
#include "qlqg/dynamics.hpp"
#include "qlqg/experiments.hpp"
#include "qlqg/graphon.hpp"
#include "qlqg/lowrank.hpp"
#include "qlqg/qnoise.hpp"
#include "qlqg/riccati.hpp"
#include "qlqg/svg.hpp"

namespace {

using namespace qlqg;

struct CliOptions {
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<double> dt;
  std::optional<double> horizon;
  bool quiet = false;
  bool emit_svg = false;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON scenario config");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--seed", opt.seed, "override the base seed");
  cmd->add_option("--n", opt.n, "override the grid size");
  cmd->add_option("--dt", opt.dt, "override the time step");
  cmd->add_option("--horizon", opt.horizon, "override the horizon T");
  cmd->add_flag("--quiet", opt.quiet, "suppress console tables");
  cmd->add_flag("--emit-svg", opt.emit_svg, "also write SVG renderings");
}

ScenarioConfig load_config(const CliOptions& opt) {
  ScenarioConfig cfg = opt.config_path.empty()
                           ? ScenarioConfig::defaults()
                           : ScenarioConfig::from_file(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.n) cfg.n = *opt.n;
  if (opt.dt) cfg.dt = *opt.dt;
  if (opt.horizon) cfg.T = *opt.horizon;
  return cfg;
}

void write_manifest(const std::string& outdir, std::vector<std::string> files) {
  std::sort(files.begin(), files.end());
  const std::string path =
      (std::filesystem::path(outdir) / "manifest.txt").string();
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");
  char buf[24];
  for (const auto& f : files) {
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(csv::fnv1a_file(f)));
    out << buf << "  "
        << std::filesystem::relative(f, outdir).generic_string() << "\n";
  }
}

void print_checks(const ExperimentReport& report, bool quiet) {
  if (quiet) return;
  for (const auto& c : report.checks())
    std::printf("  [%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
}

int finish(const ExperimentReport& report, const CliOptions& opt,
           std::vector<std::string> extra_files = {}) {
  auto files = report.write(opt.out);
  files.insert(files.end(), extra_files.begin(), extra_files.end());
  write_manifest(opt.out, std::move(files));
  print_checks(report, opt.quiet);
  if (!opt.quiet)
    std::printf("%s finished in %.2fs (%s)\n", report.id().c_str(),
                report.duration_seconds, report.all_passed() ? "ok" : "CHECK FAILURES");
  return report.all_passed() ? 0 : 1;
}

// Builds the standard pieces of a configured scenario.
struct Scenario {
  Grid grid;
  TimeGrid tg;
  OperatorKPS a_kernel;  // drift kernel without the identity part
  OperatorKPS a_op, b_op;
  CostOperators costs;
  QCovariance q;
  GridField x0;
};

Scenario build_scenario(const ScenarioConfig& cfg) {
  const Grid grid = make_grid(cfg.n);
  Scenario sc{
      grid,
      TimeGrid::make(cfg.T, cfg.dt),
      discretize(cfg.graphon.build(), grid),
      OperatorKPS::zero(grid),
      OperatorKPS::scaled_identity(grid, cfg.b),
      CostOperators::validate(cfg.state_cost.build(grid),
                              cfg.terminal_cost.build(grid),
                              cfg.control_cost.build(grid)),
      QCovariance::zero(grid),
      GridField::zeros(grid),
  };
  sc.a_op = add(sc.a_kernel, OperatorKPS::scaled_identity(grid, cfg.a));
  sc.q = cfg.noise.build(sc.a_kernel, grid);
  sc.x0 = cfg.x0 == "one" ? GridField::constant(grid, 1.0) : GridField::zeros(grid);
  return sc;
}

int cmd_table1(const CliOptions& opt) {
  ScenarioConfig cfg = load_config(opt);
  if (opt.n) cfg.table1_n = *opt.n;
  std::vector<Table1Row> rows;
  if (cfg.table1_graphons) {
    for (std::size_t i = 0; i < cfg.table1_graphons->size(); ++i)
      rows.push_back(Table1Row{"row" + std::to_string(i),
                               (*cfg.table1_graphons)[i].build(), std::nullopt});
  } else {
    rows = default_table1_rows();
  }
  ExperimentReport report = run_table1(cfg.table1_n, rows);
  if (!opt.quiet) {
    const auto& t = report.table("table1");
    std::printf("%-20s %14s %12s %12s\n", "graphon", "max_eigenvalue",
                "lra_value", "discounted");
    for (const auto& row : t.rows)
      std::printf("%-20s %14.4f %12.4f %12.4f\n", row[0].c_str(),
                  std::stod(row[1]), std::stod(row[2]), std::stod(row[4]));
  }
  return finish(report, opt);
}

int cmd_simulate(const CliOptions& opt) {
  const ScenarioConfig cfg = load_config(opt);
  Scenario sc = build_scenario(cfg);
  const QNoisePath path = sample_path(sc.q, sc.tg, cfg.seed);
  const Trajectory traj = simulate(LinearSystem(sc.a_op, sc.b_op, sc.q),
                                   FeedbackLaw::zero_control(), sc.x0, sc.tg, path);

  namespace fs = std::filesystem;
  const fs::path dir = fs::path(opt.out) / "simulate";
  fs::create_directories(dir);
  std::vector<std::string> files;
  write_trajectory_csv(traj, (dir / "trajectory.csv").string());
  files.push_back((dir / "trajectory.csv").string());
  write_trajectory_long_csv(traj, (dir / "trajectory_long.csv").string());
  files.push_back((dir / "trajectory_long.csv").string());
  if (opt.emit_svg) {
    svg::write_heatmap((dir / "trajectory.svg").string(),
                       "state trajectory (rows = time)", sc.tg.steps + 1,
                       sc.grid.n, traj.states);
    files.push_back((dir / "trajectory.svg").string());
  }
  ExperimentReport report("simulate");
  report.set_param("graphon", cfg.graphon.describe());
  report.set_param("n", cfg.n);
  report.set_param("T", cfg.T);
  report.set_param("dt", cfg.dt);
  report.set_param("seed", cfg.seed);
  report.set_param("terminal_l2",
                   l2_norm(traj.state(sc.tg.steps)));
  return finish(report, opt, files);
}

int cmd_lqg(const CliOptions& opt) {
  const ScenarioConfig cfg = load_config(opt);
  Scenario sc = build_scenario(cfg);
  auto sol = std::make_shared<RiccatiSolution>(
      solve_differential_riccati(sc.a_op, sc.b_op, sc.costs, sc.tg));
  const FeedbackLaw law = feedback_gain(sol, sc.b_op, sc.costs.control_cost);
  const QNoisePath path = sample_path(sc.q, sc.tg, cfg.seed);
  const Trajectory traj =
      simulate(LinearSystem(sc.a_op, sc.b_op, sc.q), law, sc.x0, sc.tg, path);

  const double value = value_function(*sol, sc.q, sc.x0, 0.0);
  const double realized = trajectory_cost(traj, sc.costs);

  namespace fs = std::filesystem;
  const fs::path dir = fs::path(opt.out) / "lqg";
  fs::create_directories(dir);
  std::vector<std::string> files;
  write_trajectory_csv(traj, (dir / "trajectory.csv").string());
  files.push_back((dir / "trajectory.csv").string());
  sol->write_summary_csv((dir / "riccati.csv").string());
  files.push_back((dir / "riccati.csv").string());
  if (opt.emit_svg) {
    svg::write_heatmap((dir / "trajectory.svg").string(),
                       "controlled trajectory (rows = time)", sc.tg.steps + 1,
                       sc.grid.n, traj.states);
    files.push_back((dir / "trajectory.svg").string());
  }

  ExperimentReport report("lqg");
  report.set_param("graphon", cfg.graphon.describe());
  report.set_param("n", cfg.n);
  report.set_param("T", cfg.T);
  report.set_param("dt", cfg.dt);
  report.set_param("seed", cfg.seed);
  report.set_param("value_function_t0", value);
  report.set_param("realized_cost", realized);
  if (!opt.quiet)
    std::printf("value function at t=0: %.6f (realized cost this path: %.6f)\n",
                value, realized);
  return finish(report, opt, files);
}

int cmd_convergence(const CliOptions& opt) {
  const ScenarioConfig cfg = load_config(opt);
  LqgExperimentConfig ecfg;
  ecfg.a = cfg.a;
  ecfg.b = cfg.b;
  ecfg.T = cfg.T;
  ecfg.dt = cfg.dt;
  ecfg.x0 = cfg.x0;
  ExperimentReport report = run_convergence_study(
      cfg.graphon.build(), cfg.n_list, cfg.seed, cfg.seed_count, ecfg);
  std::vector<std::string> extra;
  if (opt.emit_svg) {
    const auto& summary = report.table("summary");
    svg::Series med{"median terminal rmd", {}, {}};
    for (const auto& row : summary.rows) {
      med.xs.push_back(std::stod(row[0]));
      med.ys.push_back(std::stod(row[1]));
    }
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(opt.out) / "convergence";
    fs::create_directories(dir);
    svg::write_line_chart((dir / "median_rmd.svg").string(),
                          "terminal rmd vs n", {med});
    extra.push_back((dir / "median_rmd.svg").string());
  }
  if (!opt.quiet) {
    for (const auto& row : report.table("summary").rows)
      std::printf("n=%4s median terminal rmd %.5f, median max %.5f\n",
                  row[0].c_str(), std::stod(row[1]), std::stod(row[2]));
  }
  return finish(report, opt, extra);
}

int cmd_lowrank(const CliOptions& opt) {
  const ScenarioConfig cfg = load_config(opt);
  LqgExperimentConfig ecfg;
  ecfg.a = cfg.a;
  ecfg.b = cfg.b;
  ecfg.T = cfg.T;
  ecfg.dt = cfg.dt;
  ecfg.x0 = cfg.x0;
  ExperimentReport report = run_lowrank_demo(cfg.seed, cfg.n, ecfg);
  std::vector<std::string> extra;
  if (opt.emit_svg) {
    const auto& t = report.table("rmd_series");
    svg::Series fp{"full vs projected", {}, {}}, fl{"full vs limit", {}, {}};
    for (const auto& row : t.rows) {
      fp.xs.push_back(std::stod(row[0]));
      fp.ys.push_back(std::stod(row[1]));
      fl.xs.push_back(std::stod(row[0]));
      fl.ys.push_back(std::stod(row[2]));
    }
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(opt.out) / "lowrank";
    fs::create_directories(dir);
    svg::write_line_chart((dir / "rmd.svg").string(), "trajectory distances",
                          {fp, fl});
    extra.push_back((dir / "rmd.svg").string());
  }
  return finish(report, opt, extra);
}

int cmd_infhorizon(const CliOptions& opt) {
  ScenarioConfig cfg = load_config(opt);
  if (!opt.horizon) cfg.T = 10.0;  // this study defaults to a long horizon
  ExperimentReport report = run_infinite_horizon_comparison(
      cfg.graphon.build(), cfg.a, cfg.n, cfg.T, cfg.dt, cfg.seed);
  std::vector<std::string> extra;
  if (opt.emit_svg) {
    const auto& t = report.table("distance");
    svg::Series d{"distance to stationary", {}, {}};
    for (const auto& row : t.rows) {
      d.xs.push_back(std::stod(row[0]));
      d.ys.push_back(std::stod(row[2]));
    }
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(opt.out) / "infhorizon";
    fs::create_directories(dir);
    svg::write_line_chart((dir / "distance.svg").string(),
                          "Riccati distance to the stationary solution", {d},
                          /*log_y=*/true);
    extra.push_back((dir / "distance.svg").string());
  }
  return finish(report, opt, extra);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "LQG control on graphon-limit network systems with Q-type noise"};
  app.require_subcommand(1);

  CliOptions opt;
  auto* table1 = app.add_subcommand("table1", "worst-case stationary values");
  auto* simulate = app.add_subcommand("simulate", "uncontrolled trajectory");
  auto* lqg = app.add_subcommand("lqg", "solve and simulate the LQG problem");
  auto* convergence =
      app.add_subcommand("convergence", "finite-graph convergence study");
  auto* lowrank = app.add_subcommand("lowrank", "low-rank decomposition demo");
  auto* infhorizon =
      app.add_subcommand("infhorizon", "finite vs stationary Riccati study");
  for (auto* cmd : {table1, simulate, lqg, convergence, lowrank, infhorizon})
    add_common(cmd, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (table1->parsed()) return cmd_table1(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (lqg->parsed()) return cmd_lqg(opt);
    if (convergence->parsed()) return cmd_convergence(opt);
    if (lowrank->parsed()) return cmd_lowrank(opt);
    if (infhorizon->parsed()) return cmd_infhorizon(opt);
  } catch (const qlqg::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
