#pragma once

#include <iosfwd>

#include "symgraph/io.hpp"

namespace symgraph {

// Exit codes shared by the CLI: 0 ok, 1 config error, 2 infeasible/empty,
// 3 iteration limit, 4 capacity, 5 verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitIterationLimit = 3;
inline constexpr int kExitCapacity = 4;
inline constexpr int kExitVerifyFailed = 5;

int run_solve(const ExperimentConfig& config, std::ostream& log);
int run_diagnose(const ExperimentConfig& config, std::ostream& log);
int run_sample(const ExperimentConfig& config, std::ostream& log);
int run_couple(const ExperimentConfig& config, std::ostream& log);

/// Property suite over the configured instance: orbit constancy, conditional
/// factorization, profile-space bound, Stirling-gap bounds, the entropy-decay
/// inequality, the log-size domination, and solver-vs-grid optimality.
/// `inject_ent_bug` corrupts the entropy used by the recomputation paths so the
/// suite's failure reporting can itself be tested.
int run_verify(const ExperimentConfig& config, std::ostream& log, bool inject_ent_bug = false);

}  // namespace symgraph
