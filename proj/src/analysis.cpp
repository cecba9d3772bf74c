#include "symgraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symgraph/errors.hpp"

namespace symgraph {

ThicknessResult thickness(const RealProfile& m_star, const EdgePartition& part) {
  if (static_cast<int>(m_star.size()) != part.k()) throw invalid_input("thickness: dimension mismatch");
  ThicknessResult result;
  result.tilde_m.resize(m_star.size());
  result.mu = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m_star.size(); ++i) {
    const double p = static_cast<double>(part.part_sizes()[i]);
    if (m_star[i] < -1e-9 || m_star[i] > p + 1e-9) throw invalid_input("thickness: profile outside [0, p_i]");
    result.tilde_m[i] = std::min(m_star[i], p - m_star[i]);
    result.mu = std::min(result.mu, result.tilde_m[i]);
  }
  result.mu = std::max(result.mu, 0.0);
  return result;
}

double condition_number(double mu, int k, int n) {
  if (!(mu > 0.0)) throw invalid_input("condition_number: degenerate thickness (mu must be positive)");
  return 5.0 * static_cast<double>(k) * std::log(static_cast<double>(n)) / mu;
}

double resolution(double lambda) {
  if (lambda < 0.0) throw invalid_input("resolution: lambda must be nonnegative");
  return (lambda + std::sqrt(lambda * lambda + 4.0 * lambda)) / 2.0;
}

BoundValue concentration_bound(double eps, double mu, double lambda) {
  BoundValue out;
  out.value = std::exp(-mu * (eps * eps / (1.0 + eps) - lambda));
  out.valid = eps > resolution(lambda);
  return out;
}

BoundValue sandwich_delta(double eps, double mu, double lambda) {
  BoundValue out;
  out.value = 2.0 * std::exp(-mu * (eps * eps / 12.0 - lambda));
  out.valid = eps > std::sqrt(12.0 * lambda);
  return out;
}

double entropy_decay_bound(const Profile& w, const RealProfile& m_star, const EdgePartition& part) {
  if (w.size() != m_star.size() || static_cast<int>(w.size()) != part.k())
    throw invalid_input("entropy_decay_bound: dimension mismatch");
  double quad = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = static_cast<double>(part.part_sizes()[i]);
    const double wi = static_cast<double>(w[i]);
    const double tilde_m = std::min(m_star[i], p - m_star[i]);
    const double tilde_w = std::min(wi, p - wi);
    const double denom = std::max(tilde_m, tilde_w);
    if (denom > 0.0) {
      const double d = wi - m_star[i];
      quad += d * d / denom;
    }
  }
  return -quad + 3.0 * part.k() * std::log(static_cast<double>(part.n()));
}

std::vector<int> well_conditioned_parts(const RealProfile& m_star, const EdgePartition& part) {
  const ThicknessResult t = thickness(m_star, part);
  const double bar = 5.0 * part.k() * std::log(static_cast<double>(part.n()));
  std::vector<int> out;
  for (std::size_t i = 0; i < t.tilde_m.size(); ++i)
    if (t.tilde_m[i] >= bar) out.push_back(static_cast<int>(i));
  return out;
}

UnimodalityResult unimodality_distance(const RealProfile& m_star,
                                       const std::vector<Profile>& feasible,
                                       const EdgePartition& part) {
  if (feasible.empty()) throw invalid_input("unimodality_distance: empty feasible set");
  UnimodalityResult out;
  out.delta = std::numeric_limits<double>::infinity();
  for (const auto& v : feasible) {
    if (v.size() != m_star.size()) throw invalid_input("unimodality_distance: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d += std::abs(m_star[i] - static_cast<double>(v[i]));
    out.delta = std::min(out.delta, d);
  }
  const ThicknessResult t = thickness(m_star, part);
  if (t.mu > 0.0) {
    out.adjusted_lambda =
        (2.0 * out.delta + 3.0 * part.k()) * std::log(static_cast<double>(part.n())) / t.mu;
    out.adjusted_valid = true;
  }
  return out;
}

DiagnosticsReport diagnose(const RealProfile& m_star, const EdgePartition& part) {
  DiagnosticsReport report;
  report.n = part.n();
  report.k = part.k();
  const ThicknessResult t = thickness(m_star, part);
  report.mu = t.mu;
  report.tilde_m = t.tilde_m;
  report.well_conditioned = well_conditioned_parts(m_star, part);
  if (t.mu > 0.0) {
    report.lambda = condition_number(t.mu, part.k(), part.n());
    report.resolution = resolution(*report.lambda);
  }
  return report;
}

}  // namespace symgraph
