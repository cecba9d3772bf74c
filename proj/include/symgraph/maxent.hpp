#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symgraph/constraints.hpp"
#include "symgraph/graphspace.hpp"

namespace symgraph {

enum class SolveStatus { converged, infeasible, iteration_limit };

std::string to_string(SolveStatus status);

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 100000;
};

/// Entropic optimizer of a constrained profile family: the maximizer m* of the
/// product-measure entropy over the continuous relaxation of the feasible box,
/// with per-part densities a* = q* and dual multipliers for linear constraints.
struct MaxEntSolution {
  RealProfile m_star;
  std::vector<double> a_star;
  std::vector<double> q_star;
  std::vector<double> duals;  // one per linear row; empty for box/spectral/intersection
  double objective = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// log C(p, m) via log-gamma.
double log_binomial(std::int64_t p, std::int64_t m);

/// Table v -> log C(p, v) for v in [0, p].
std::vector<double> log_binomial_table(std::int64_t p);

/// Exact profile entropy: sum_i log C(p_i, m_i), natural log.
double ent(const Profile& m, const EdgePartition& part);

/// Product-measure entropy of a (possibly real) profile:
/// -sum_i [v_i log(v_i/p_i) + (p_i - v_i) log((p_i - v_i)/p_i)], with the
/// x log x -> 0 convention at the boundary.
double p_entropy(const RealProfile& v, const EdgePartition& part);
double p_entropy(const Profile& v, const EdgePartition& part);

/// Stirling gap gamma = p_entropy(m) - ent(m); callers may check 0 <= gamma <= k log n.
double stirling_gap(const Profile& m, const EdgePartition& part);

/// Maximizes the product-measure entropy over {0 <= v <= p} cut by the spec.
/// Budget/linear specs are solved through the concave dual (damped Newton with a
/// bisection fallback for a scalar dual); boxes clamp the half-density point;
/// spectral and intersection specs run projected gradient with an
/// alternating-projection feasibility projector.
MaxEntSolution maximize_entropy(const EdgePartition& part, const ConstraintSpec& spec,
                                const SolveOptions& options = {});

/// Row-major n x n matrix with Q_uv = m*_i / p_i on part-i edges, zero diagonal.
std::vector<double> product_matrix(const MaxEntSolution& sol, const EdgePartition& part);

}  // namespace symgraph
