#pragma once

#include <optional>
#include <vector>

#include "symgraph/graphspace.hpp"

namespace symgraph {

/// Per-part distance of the optimizer from the trivial boundary and its minimum.
struct ThicknessResult {
  double mu = 0.0;
  std::vector<double> tilde_m;
};

ThicknessResult thickness(const RealProfile& m_star, const EdgePartition& part);

/// lambda = 5 k ln(n) / mu (natural log). Requires mu > 0.
double condition_number(double mu, int k, int n);

/// Positive root of r^2 / (1 + r) = lambda: r = (lambda + sqrt(lambda^2 + 4 lambda)) / 2.
double resolution(double lambda);

struct BoundValue {
  double value = 0.0;
  bool valid = false;
};

/// Concentration failure bound exp(-mu (eps^2/(1+eps) - lambda)); valid iff eps > resolution.
BoundValue concentration_bound(double eps, double mu, double lambda);

/// Sandwich failure bound delta = 2 exp(-mu (eps^2/12 - lambda)); valid iff eps > sqrt(12 lambda).
BoundValue sandwich_delta(double eps, double mu, double lambda);

/// Upper bound on ent(w) - ent(m*):
/// -sum_i (w_i - m*_i)^2 / max(tilde_m*_i, tilde_w_i) + 3 k ln n,
/// with zero-thickness parts contributing 0.
double entropy_decay_bound(const Profile& w, const RealProfile& m_star, const EdgePartition& part);

/// I* = { i : tilde_m_i >= 5 k ln n }, sorted ascending.
std::vector<int> well_conditioned_parts(const RealProfile& m_star, const EdgePartition& part);

struct UnimodalityResult {
  double delta = 0.0;            // min L1 distance from m* to a feasible integer profile
  double adjusted_lambda = 0.0;  // (2 delta + 3k) ln(n) / mu
  bool adjusted_valid = false;   // false when mu = 0
};

UnimodalityResult unimodality_distance(const RealProfile& m_star,
                                       const std::vector<Profile>& feasible,
                                       const EdgePartition& part);

/// Diagnostic parameters of an optimizer. When mu = 0 the condition number and
/// resolution are omitted and I* carries the usable parts.
struct DiagnosticsReport {
  int n = 0;
  int k = 0;
  double mu = 0.0;
  std::vector<double> tilde_m;
  std::optional<double> lambda;
  std::optional<double> resolution;
  std::vector<int> well_conditioned;
};

DiagnosticsReport diagnose(const RealProfile& m_star, const EdgePartition& part);

}  // namespace symgraph
