#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "symgraph/experiment.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<double> epsilon;
  std::optional<std::string> strategy;
  std::optional<int> jobs;
  std::optional<std::string> out_dir;
  bool allow_approx = false;
};

void add_common(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "Experiment config (JSON)")->required();
  cmd->add_option("--seed", ov.seed, "Override the config seed");
  cmd->add_option("--trials", ov.trials, "Override the trial count");
  cmd->add_option("--epsilon", ov.epsilon, "Override the sandwich epsilon");
  cmd->add_option("--strategy", ov.strategy, "Profile strategy: enum, dp, or mcmc");
  cmd->add_option("--jobs", ov.jobs, "Parallel trial workers");
  cmd->add_option("--out", ov.out_dir, "Output directory");
  cmd->add_flag("--allow-approx", ov.allow_approx, "Permit the approximate mcmc strategy");
}

int load_config(const Overrides& ov, symgraph::ExperimentConfig& config, std::ostream& log) {
  std::ifstream in(ov.config_path);
  if (!in) {
    log << "config error: cannot open '" << ov.config_path << "'\n";
    return symgraph::kExitConfig;
  }
  nlohmann::json j;
  try {
    in >> j;
    config = symgraph::config_from_json(j);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return symgraph::kExitConfig;
  }
  if (ov.seed) config.seed = *ov.seed;
  if (ov.trials) config.trials = *ov.trials;
  if (ov.epsilon) config.epsilon = *ov.epsilon;
  if (ov.strategy) config.strategy = *ov.strategy;
  if (ov.jobs) config.jobs = *ov.jobs;
  if (ov.out_dir) config.out_dir = *ov.out_dir;
  if (ov.allow_approx) config.allow_approx = true;
  if (config.strategy != "enum" && config.strategy != "dp" && config.strategy != "mcmc") {
    log << "config error: field 'strategy' must be enum, dp, or mcmc\n";
    return symgraph::kExitConfig;
  }
  return symgraph::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-optimal product approximations and exact samplers for "
               "edge-profile-constrained graph families"};
  app.set_version_flag("--version", symgraph::kArtifactVersion);
  app.require_subcommand(1);

  Overrides solve_ov, sample_ov, couple_ov, diagnose_ov, verify_ov;
  bool inject_ent_bug = false;

  CLI::App* solve = app.add_subcommand("solve", "Entropy solve plus diagnostics");
  add_common(solve, solve_ov);
  CLI::App* sample = app.add_subcommand("sample", "Draw graphs from the uniform family measure");
  add_common(sample, sample_ov);
  CLI::App* couple = app.add_subcommand("couple", "Run sandwich-coupling trials");
  add_common(couple, couple_ov);
  CLI::App* diagnose = app.add_subcommand("diagnose", "Diagnostics with profile-space extras");
  add_common(diagnose, diagnose_ov);
  CLI::App* verify = app.add_subcommand("verify", "Exact property suite at oracle scale");
  add_common(verify, verify_ov);
  verify->add_flag("--inject-ent-bug", inject_ent_bug, "Corrupt the entropy recomputation (test hook)")
      ->group("");  // hidden

  CLI11_PARSE(app, argc, argv);

  symgraph::ExperimentConfig config;
  if (solve->parsed()) {
    if (int rc = load_config(solve_ov, config, std::cerr)) return rc;
    return symgraph::run_solve(config, std::cout);
  }
  if (sample->parsed()) {
    if (int rc = load_config(sample_ov, config, std::cerr)) return rc;
    return symgraph::run_sample(config, std::cout);
  }
  if (couple->parsed()) {
    if (int rc = load_config(couple_ov, config, std::cerr)) return rc;
    return symgraph::run_couple(config, std::cout);
  }
  if (diagnose->parsed()) {
    if (int rc = load_config(diagnose_ov, config, std::cerr)) return rc;
    return symgraph::run_diagnose(config, std::cout);
  }
  if (int rc = load_config(verify_ov, config, std::cerr)) return rc;
  return symgraph::run_verify(config, std::cout, inject_ent_bug);
}
