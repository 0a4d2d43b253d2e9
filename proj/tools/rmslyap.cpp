// rmslyap: estimate top Lyapunov exponents of random matrix systems
// S(omega) = A D(omega) and check the averaging lower bound
// lambda >= ln rho(A Dbar).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rms/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random matrix systems: Lyapunov estimation and averaging bounds"};
  app.require_subcommand(1);

  rms::CliOptions opt;
  std::string scenario_file, scenario_dir;

  std::int64_t n = 0, num_paths = 0, budget = 0, depth = 0;
  std::uint64_t seed = 0;
  std::string mode, norm, epsilons_str;

  auto add_common = [&](CLI::App* cmd, bool takes_file) {
    if (takes_file)
      cmd->add_option("scenario", scenario_file, "Scenario JSON file")->required();
    cmd->add_option("--n", n, "Trajectory length");
    cmd->add_option("--num-paths", num_paths, "Monte Carlo paths for Kingman bounds");
    cmd->add_option("--seed", seed, "Seed (overrides scenario defaults)");
    cmd->add_option("--mode", mode, "Estimator mode: vector|matrix");
    cmd->add_option("--norm", norm, "Matrix norm: frobenius|operator2");
    cmd->add_option("--epsilons", epsilons_str, "Comma-separated decreasing epsilon ladder");
    cmd->add_option("--budget", budget, "Matrix-multiply budget");
    cmd->add_option("--depth", depth, "Minimum pull-back depth");
    cmd->add_option("--out", opt.out, "Result bundle path (default: stdout)");
    cmd->add_option("--csv", opt.csv, "CSV output path");
    cmd->add_option("--jobs", opt.jobs, "Worker threads");
  };

  CLI::App* est = app.add_subcommand("estimate", "Estimate the top Lyapunov exponent");
  add_common(est, true);
  CLI::App* thm = app.add_subcommand("theorem", "Check lambda >= ln rho(A Dbar)");
  add_common(thm, true);
  CLI::App* trace = app.add_subcommand("proof-trace", "Replay the Cesaro averaging argument");
  add_common(trace, true);
  CLI::App* suite = app.add_subcommand("suite", "Run the theorem check over a scenario directory");
  suite->add_option("dir", scenario_dir, "Directory of scenario JSON files")->required();
  add_common(suite, false);

  CLI11_PARSE(app, argc, argv);

  auto fill = [&](CLI::App* cmd) {
    if (cmd->count("--n")) opt.n = n;
    if (cmd->count("--num-paths")) opt.num_paths = num_paths;
    if (cmd->count("--seed")) opt.seed = seed;
    if (cmd->count("--mode")) opt.mode = mode;
    if (cmd->count("--norm")) opt.norm = norm;
    if (cmd->count("--budget")) opt.budget = budget;
    if (cmd->count("--depth")) opt.depth = depth;
    if (cmd->count("--epsilons")) {
      std::string item;
      std::stringstream ss(epsilons_str);
      while (std::getline(ss, item, ',')) opt.epsilons.push_back(std::stod(item));
    }
  };

  if (est->parsed()) {
    fill(est);
    return rms::cmd_estimate(scenario_file, opt, std::cerr);
  }
  if (thm->parsed()) {
    fill(thm);
    return rms::cmd_theorem(scenario_file, opt, std::cerr);
  }
  if (trace->parsed()) {
    fill(trace);
    return rms::cmd_proof_trace(scenario_file, opt, std::cerr);
  }
  if (suite->parsed()) {
    fill(suite);
    return rms::cmd_suite(scenario_dir, opt, std::cerr);
  }
  return 1;
}
