#include "symgraph/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "symgraph/errors.hpp"

namespace symgraph {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration-limit";
  }
  return "unknown";
}

double log_binomial(std::int64_t p, std::int64_t m) {
  if (m < 0 || m > p) throw invalid_input("log_binomial: need 0 <= m <= p");
  return std::lgamma(static_cast<double>(p) + 1.0) - std::lgamma(static_cast<double>(m) + 1.0) -
         std::lgamma(static_cast<double>(p - m) + 1.0);
}

std::vector<double> log_binomial_table(std::int64_t p) {
  std::vector<double> table(static_cast<std::size_t>(p) + 1);
  for (std::int64_t v = 0; v <= p; ++v) table[static_cast<std::size_t>(v)] = log_binomial(p, v);
  return table;
}

double ent(const Profile& m, const EdgePartition& part) {
  if (static_cast<int>(m.size()) != part.k()) throw invalid_input("ent: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) total += log_binomial(part.part_sizes()[i], m[i]);
  return total;
}

namespace {

// p * h(v/p) in nats, 0 at the boundary.
double part_entropy(double v, double p) {
  if (v <= 0.0 || v >= p) return 0.0;
  return -(v * std::log(v / p) + (p - v) * std::log((p - v) / p));
}

void check_real_profile(const RealProfile& v, const EdgePartition& part, const char* who) {
  if (static_cast<int>(v.size()) != part.k()) throw invalid_input(std::string(who) + ": dimension mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = static_cast<double>(part.part_sizes()[i]);
    if (!(v[i] >= -1e-9) || !(v[i] <= p + 1e-9))
      throw invalid_input(std::string(who) + ": profile outside [0, p_i]");
  }
}

}  // namespace

double p_entropy(const RealProfile& v, const EdgePartition& part) {
  check_real_profile(v, part, "p_entropy");
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = static_cast<double>(part.part_sizes()[i]);
    total += part_entropy(std::clamp(v[i], 0.0, p), p);
  }
  return total;
}

double p_entropy(const Profile& v, const EdgePartition& part) {
  return p_entropy(RealProfile(v.begin(), v.end()), part);
}

double stirling_gap(const Profile& m, const EdgePartition& part) {
  return p_entropy(m, part) - ent(m, part);
}

namespace {

double sigmoid_neg(double u) {  // 1 / (1 + e^u)
  if (u >= 0.0) {
    const double z = std::exp(-u);
    return z / (1.0 + z);
  }
  return 1.0 / (1.0 + std::exp(u));
}

struct LinearProblem {
  std::vector<std::vector<double>> a;  // ell rows of length k
  std::vector<double> b;
};

RealProfile primal_from_dual(const LinearProblem& lp, const std::vector<double>& lambda,
                             const std::vector<std::int64_t>& p) {
  const std::size_t k = p.size();
  RealProfile v(k);
  for (std::size_t i = 0; i < k; ++i) {
    double u = 0.0;
    for (std::size_t j = 0; j < lp.a.size(); ++j) u += lambda[j] * lp.a[j][i];
    v[i] = static_cast<double>(p[i]) * sigmoid_neg(u);
  }
  return v;
}

double dual_value(const LinearProblem& lp, const std::vector<double>& lambda,
                  const std::vector<std::int64_t>& p, const RealProfile& v) {
  double g = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) g += part_entropy(v[i], static_cast<double>(p[i]));
  for (std::size_t j = 0; j < lp.a.size(); ++j) {
    double av = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) av += lp.a[j][i] * v[i];
    g += lambda[j] * (lp.b[j] - av);
  }
  return g;
}

std::vector<double> dual_gradient(const LinearProblem& lp, const std::vector<std::int64_t>& p,
                                  const RealProfile& v) {
  std::vector<double> grad(lp.b);
  for (std::size_t j = 0; j < lp.a.size(); ++j)
    for (std::size_t i = 0; i < p.size(); ++i) grad[j] -= lp.a[j][i] * v[i];
  return grad;
}

// Gaussian elimination with partial pivoting; returns false on a (near-)singular pivot.
bool solve_dense(std::vector<std::vector<double>> h, std::vector<double> rhs, std::vector<double>& out) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(h[r][col]) > std::abs(h[pivot][col])) pivot = r;
    if (std::abs(h[pivot][col]) < 1e-300) return false;
    std::swap(h[col], h[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = h[r][col] / h[col][col];
      for (std::size_t c = col; c < n; ++c) h[r][c] -= f * h[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= h[r][c] * out[c];
    out[r] = s / h[r][r];
  }
  return true;
}

// Minimizes the squared violation of A v <= b over the box; certifies feasibility.
bool linear_feasible(const LinearProblem& lp, const std::vector<std::int64_t>& p) {
  const std::size_t k = p.size();
  const std::size_t ell = lp.b.size();
  if (ell == 1) {
    double lo = 0.0;
    for (std::size_t i = 0; i < k; ++i) lo += std::min(0.0, lp.a[0][i] * static_cast<double>(p[i]));
    return lo <= lp.b[0];
  }
  double scale = 1.0;
  for (double bj : lp.b) scale = std::max(scale, std::abs(bj));
  double lipschitz = 0.0;
  for (std::size_t j = 0; j < ell; ++j)
    for (std::size_t i = 0; i < k; ++i) lipschitz += lp.a[j][i] * lp.a[j][i];
  lipschitz = std::max(2.0 * lipschitz, 1e-12);

  RealProfile v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = static_cast<double>(p[i]) / 2.0;
  for (int it = 0; it < 50000; ++it) {
    std::vector<double> r(ell);
    double f = 0.0;
    for (std::size_t j = 0; j < ell; ++j) {
      double lhs = -lp.b[j];
      for (std::size_t i = 0; i < k; ++i) lhs += lp.a[j][i] * v[i];
      r[j] = std::max(0.0, lhs);
      f += r[j] * r[j];
    }
    if (f <= 1e-18 * scale * scale) return true;
    RealProfile next(k);
    double moved = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double g = 0.0;
      for (std::size_t j = 0; j < ell; ++j) g += 2.0 * r[j] * lp.a[j][i];
      next[i] = std::clamp(v[i] - g / lipschitz, 0.0, static_cast<double>(p[i]));
      moved += std::abs(next[i] - v[i]);
    }
    v = std::move(next);
    if (moved <= 1e-15 * (1.0 + scale)) break;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < ell; ++j) {
    double lhs = -lp.b[j];
    for (std::size_t i = 0; i < k; ++i) lhs += lp.a[j][i] * v[i];
    worst = std::max(worst, lhs);
  }
  return worst <= 1e-9 * scale;
}

struct DualResult {
  std::vector<double> lambda;
  SolveStatus status;
  int iterations;
};

// Scalar dual by bisection. The constraint value A.v(lambda) is strictly
// decreasing, so a sign change brackets the root. The bracket starts at [0, 50]
// where exp saturates the logistic for unit-scale rows, and doubles when the
// row scaling requires a larger multiplier.
DualResult bisect_scalar_dual(const LinearProblem& lp, const std::vector<std::int64_t>& p, double tol) {
  auto phi = [&](double lambda) {
    const RealProfile v = primal_from_dual(lp, {lambda}, p);
    double av = -lp.b[0];
    for (std::size_t i = 0; i < p.size(); ++i) av += lp.a[0][i] * v[i];
    return av;
  };
  double lo = 0.0, hi = 50.0;
  int iters = 0;
  while (phi(hi) > 0.0 && hi < 1e9) {
    lo = hi;
    hi *= 2.0;
    ++iters;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > 0.0) lo = mid;
    else hi = mid;
    ++iters;
    if (hi - lo <= tol * std::max(1.0, hi)) break;
  }
  return {{0.5 * (lo + hi)}, SolveStatus::converged, iters};
}

DualResult newton_dual(const LinearProblem& lp, const std::vector<std::int64_t>& p,
                       const SolveOptions& options) {
  const std::size_t ell = lp.b.size();
  const std::size_t k = p.size();
  double scale = 1.0;
  for (double bj : lp.b) scale = std::max(scale, std::abs(bj));
  const double tol = options.tol * scale;

  std::vector<double> lambda(ell, 0.0);
  RealProfile v = primal_from_dual(lp, lambda, p);
  double g = dual_value(lp, lambda, p, v);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const std::vector<double> grad = dual_gradient(lp, p, v);
    double residual = 0.0;
    for (std::size_t j = 0; j < ell; ++j) {
      const double r = (lambda[j] <= 0.0) ? std::min(grad[j], 0.0) : grad[j];
      residual = std::max(residual, std::abs(r));
      residual = std::max(residual, std::abs(lambda[j] * grad[j]));  // slackness scale
    }
    if (residual <= tol) return {lambda, SolveStatus::converged, it};

    if (ell == 1 && it >= 500) {
      // Newton is struggling on a scalar dual; hand over to bisection.
      return bisect_scalar_dual(lp, p, options.tol);
    }

    // Rows pinned at zero that want to stay there leave the Newton system;
    // a full-space step twisted by them need not descend after projection.
    std::vector<std::size_t> free_rows;
    for (std::size_t j = 0; j < ell; ++j)
      if (lambda[j] > 0.0 || grad[j] < 0.0) free_rows.push_back(j);
    std::vector<double> dir(ell, 0.0);
    if (!free_rows.empty()) {
      const std::size_t nf = free_rows.size();
      std::vector<std::vector<double>> hess(nf, std::vector<double>(nf, 0.0));
      for (std::size_t i = 0; i < k; ++i) {
        const double pi = static_cast<double>(p[i]);
        const double a = v[i] / pi;
        const double wgt = pi * a * (1.0 - a);
        for (std::size_t j1 = 0; j1 < nf; ++j1)
          for (std::size_t j2 = 0; j2 < nf; ++j2)
            hess[j1][j2] += lp.a[free_rows[j1]][i] * lp.a[free_rows[j2]][i] * wgt;
      }
      double ridge = 1e-12 * (1.0 + std::abs(hess[0][0]));
      std::vector<double> neg_grad(nf);
      for (std::size_t j = 0; j < nf; ++j) neg_grad[j] = -grad[free_rows[j]];
      std::vector<double> reduced;
      for (int attempt = 0; attempt < 8; ++attempt) {
        auto damped = hess;
        for (std::size_t j = 0; j < nf; ++j) damped[j][j] += ridge;
        if (solve_dense(damped, neg_grad, reduced)) break;
        ridge *= 100.0;
        reduced.clear();
      }
      if (reduced.empty()) reduced = neg_grad;
      for (std::size_t j = 0; j < nf; ++j) dir[free_rows[j]] = reduced[j];
    }

    // Step halving on the dual objective, projecting onto lambda >= 0.
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 70; ++half) {
      std::vector<double> cand(ell);
      for (std::size_t j = 0; j < ell; ++j) cand[j] = std::max(0.0, lambda[j] + step * dir[j]);
      const RealProfile vc = primal_from_dual(lp, cand, p);
      const double gc = dual_value(lp, cand, p, vc);
      if (gc < g - 1e-16 * std::abs(g)) {
        lambda = std::move(cand);
        v = vc;
        g = gc;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // The dual value stops discriminating at machine precision before the
      // slackness residual does; accept Newton steps that shrink the residual.
      auto residual_of = [&](const std::vector<double>& lam, const RealProfile& vv) {
        const std::vector<double> gr = dual_gradient(lp, p, vv);
        double rr = 0.0;
        for (std::size_t j = 0; j < ell; ++j) {
          const double r = (lam[j] <= 0.0) ? std::min(gr[j], 0.0) : gr[j];
          rr = std::max(rr, std::abs(r));
          rr = std::max(rr, std::abs(lam[j] * gr[j]));
        }
        return rr;
      };
      double step2 = 1.0;
      bool moved = false;
      for (int half = 0; half < 70; ++half) {
        std::vector<double> cand(ell);
        for (std::size_t j = 0; j < ell; ++j) cand[j] = std::max(0.0, lambda[j] + step2 * dir[j]);
        const RealProfile vc = primal_from_dual(lp, cand, p);
        if (residual_of(cand, vc) < residual * 0.999) {
          lambda = std::move(cand);
          v = vc;
          g = dual_value(lp, lambda, p, v);
          moved = true;
          break;
        }
        step2 *= 0.5;
      }
      if (!moved) {
        if (ell == 1) return bisect_scalar_dual(lp, p, options.tol);
        return {lambda, SolveStatus::converged, it};
      }
    }
  }
  return {lambda, SolveStatus::iteration_limit, it};
}

MaxEntSolution finish_linear(const LinearProblem& lp, const EdgePartition& part,
                             const DualResult& dual) {
  const auto& p = part.part_sizes();
  MaxEntSolution sol;
  sol.status = dual.status;
  sol.iterations = dual.iterations;
  sol.duals = dual.lambda;
  sol.m_star = primal_from_dual(lp, dual.lambda, p);
  sol.a_star.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) sol.a_star[i] = sol.m_star[i] / static_cast<double>(p[i]);
  sol.q_star = sol.a_star;
  sol.objective = p_entropy(sol.m_star, part);

  // KKT residual: stationarity holds by construction of the primal recovery;
  // report primal feasibility, dual sign, and complementary slackness.
  double kkt = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double u = 0.0;
    for (std::size_t j = 0; j < lp.a.size(); ++j) u += dual.lambda[j] * lp.a[j][i];
    const double a = sol.a_star[i];
    if (a > 0.0 && a < 1.0) kkt = std::max(kkt, std::abs(std::log((1.0 - a) / a) - u));
  }
  for (std::size_t j = 0; j < lp.b.size(); ++j) {
    double av = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) av += lp.a[j][i] * sol.m_star[i];
    kkt = std::max(kkt, std::max(0.0, av - lp.b[j]));
    kkt = std::max(kkt, std::abs(dual.lambda[j] * (lp.b[j] - av)));
    kkt = std::max(kkt, std::max(0.0, -dual.lambda[j]));
  }
  sol.kkt_residual = kkt;
  return sol;
}

MaxEntSolution solve_linear(const LinearProblem& lp, const EdgePartition& part,
                            const SolveOptions& options) {
  const auto& p = part.part_sizes();
  if (lp.a.front().size() != p.size()) throw invalid_input("maximize_entropy: constraint dimension mismatch");

  // Unconstrained optimum feasible: all duals zero.
  bool inactive = true;
  for (std::size_t j = 0; j < lp.b.size() && inactive; ++j) {
    double av = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) av += lp.a[j][i] * static_cast<double>(p[i]) / 2.0;
    if (av > lp.b[j]) inactive = false;
  }
  if (inactive)
    return finish_linear(lp, part, {std::vector<double>(lp.b.size(), 0.0), SolveStatus::converged, 0});

  if (!linear_feasible(lp, p)) {
    MaxEntSolution sol;
    sol.status = SolveStatus::infeasible;
    sol.objective = std::numeric_limits<double>::quiet_NaN();
    sol.kkt_residual = std::numeric_limits<double>::quiet_NaN();
    return sol;
  }
  return finish_linear(lp, part, newton_dual(lp, p, options));
}

// ---- projected gradient with alternating-projection feasibility -----------

struct Projector {
  std::function<RealProfile(const RealProfile&)> apply;
};

void flatten_projectors(const ConstraintSpec& spec, const EdgePartition& part,
                        std::vector<Projector>& out) {
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Budget>) {
          std::vector<double> a(c.costs);
          const double b = c.budget;
          double norm2 = 0.0;
          for (double x : a) norm2 += x * x;
          out.push_back({[a, b, norm2](const RealProfile& y) {
            double lhs = -b;
            for (std::size_t i = 0; i < y.size(); ++i) lhs += a[i] * y[i];
            if (lhs <= 0.0 || norm2 == 0.0) return y;
            RealProfile z = y;
            for (std::size_t i = 0; i < y.size(); ++i) z[i] -= lhs / norm2 * a[i];
            return z;
          }});
        } else if constexpr (std::is_same_v<T, LinearSystem>) {
          for (std::size_t j = 0; j < c.a.size(); ++j) {
            std::vector<double> a(c.a[j]);
            const double b = c.b[j];
            double norm2 = 0.0;
            for (double x : a) norm2 += x * x;
            out.push_back({[a, b, norm2](const RealProfile& y) {
              double lhs = -b;
              for (std::size_t i = 0; i < y.size(); ++i) lhs += a[i] * y[i];
              if (lhs <= 0.0 || norm2 == 0.0) return y;
              RealProfile z = y;
              for (std::size_t i = 0; i < y.size(); ++i) z[i] -= lhs / norm2 * a[i];
              return z;
            }});
          }
        } else if constexpr (std::is_same_v<T, Box>) {
          const Profile lo = c.lo, hi = c.hi;
          out.push_back({[lo, hi](const RealProfile& y) {
            RealProfile z = y;
            for (std::size_t i = 0; i < y.size(); ++i)
              z[i] = std::clamp(z[i], static_cast<double>(lo[i]), static_cast<double>(hi[i]));
            return z;
          }});
        } else if constexpr (std::is_same_v<T, Spectral>) {
          const Spectral sp = c;
          const int n = part.n();
          out.push_back({[sp, n](const RealProfile& y) {
            // Polyak subgradient steps onto the closure {sigma <= threshold}.
            RealProfile x = y;
            for (int iter = 0; iter < 300; ++iter) {
              const auto t = branching_matrix(sp, x, n);
              if (t.empty() || t.front().empty()) return x;
              const std::size_t rows = t.size(), cols = t.front().size();
              // Top singular pair via power iteration on the Gram matrix.
              RandomStream start(0x5EEDu);
              std::vector<double> w(cols);
              double nrm = 0.0;
              for (double& wi : w) {
                wi = 0.5 + start.next_unit();
                nrm += wi * wi;
              }
              nrm = std::sqrt(nrm);
              for (double& wi : w) wi /= nrm;
              double sigma = 0.0;
              std::vector<double> tw(rows, 0.0);
              for (int pit = 0; pit < 2000; ++pit) {
                std::fill(tw.begin(), tw.end(), 0.0);
                for (std::size_t r = 0; r < rows; ++r)
                  for (std::size_t cc = 0; cc < cols; ++cc) tw[r] += t[r][cc] * w[cc];
                std::vector<double> y2(cols, 0.0);
                for (std::size_t r = 0; r < rows; ++r)
                  for (std::size_t cc = 0; cc < cols; ++cc) y2[cc] += t[r][cc] * tw[r];
                double y2n = 0.0;
                for (double v : y2) y2n += v * v;
                y2n = std::sqrt(y2n);
                if (y2n == 0.0) {
                  sigma = 0.0;
                  break;
                }
                const double next = std::sqrt(y2n);
                for (std::size_t cc = 0; cc < cols; ++cc) w[cc] = y2[cc] / y2n;
                if (pit > 2 && std::abs(next - sigma) <= 1e-13 * std::max(1.0, next)) {
                  sigma = next;
                  break;
                }
                sigma = next;
              }
              const double viol = sigma - sp.threshold;
              if (viol <= 1e-13) return x;
              // u = T w / sigma; subgradient of sigma wrt profile coordinates.
              std::fill(tw.begin(), tw.end(), 0.0);
              for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t cc = 0; cc < cols; ++cc) tw[r] += t[r][cc] * w[cc];
              std::vector<double> u(rows);
              for (std::size_t r = 0; r < rows; ++r) u[r] = tw[r] / sigma;

              const int ell = static_cast<int>(sp.rho.size());
              std::vector<int> index(static_cast<std::size_t>(ell), -1);
              int pos = 0;
              for (int gidx = 0; gidx < ell; ++gidx)
                if (gidx != sp.connector) index[static_cast<std::size_t>(gidx)] = pos++;
              const double n2 = static_cast<double>(n) * n;
              std::vector<double> s(x.size(), 0.0);
              double snorm2 = 0.0;
              for (std::size_t cpart = 0; cpart < x.size(); ++cpart) {
                const auto [g1, g2] = sp.blocks[cpart];
                if (g1 == sp.connector || g2 == sp.connector) continue;
                const int i1 = index[static_cast<std::size_t>(g1)];
                const int i2 = index[static_cast<std::size_t>(g2)];
                double grad = u[static_cast<std::size_t>(i1)] * w[static_cast<std::size_t>(i2)] /
                              (n2 * sp.rho[static_cast<std::size_t>(g1)]);
                if (g1 != g2)
                  grad += u[static_cast<std::size_t>(i2)] * w[static_cast<std::size_t>(i1)] /
                          (n2 * sp.rho[static_cast<std::size_t>(g2)]);
                s[cpart] = grad;
                snorm2 += grad * grad;
              }
              if (snorm2 == 0.0) return x;
              for (std::size_t i = 0; i < x.size(); ++i) x[i] -= viol / snorm2 * s[i];
            }
            return x;
          }});
        } else {  // Intersection
          for (const auto& member : c.members) flatten_projectors(member, part, out);
        }
      },
      spec.node());
}

RealProfile project_feasible(const RealProfile& y, const std::vector<Projector>& sets,
                             const std::vector<std::int64_t>& p) {
  const std::size_t k = p.size();
  auto clamp_box = [&](RealProfile v) {
    for (std::size_t i = 0; i < k; ++i) v[i] = std::clamp(v[i], 0.0, static_cast<double>(p[i]));
    return v;
  };
  if (sets.empty()) return clamp_box(y);

  // Dykstra over the box and the spec's member sets.
  const std::size_t nsets = sets.size() + 1;
  std::vector<RealProfile> increment(nsets, RealProfile(k, 0.0));
  RealProfile x = y;
  double ynorm = 1.0;
  for (double v : y) ynorm += std::abs(v);
  for (int cycle = 0; cycle < 2000; ++cycle) {
    double moved = 0.0;
    for (std::size_t s = 0; s < nsets; ++s) {
      RealProfile w(k);
      for (std::size_t i = 0; i < k; ++i) w[i] = x[i] + increment[s][i];
      RealProfile next = (s == 0) ? clamp_box(w) : sets[s - 1].apply(w);
      for (std::size_t i = 0; i < k; ++i) {
        increment[s][i] = w[i] - next[i];
        moved += std::abs(next[i] - x[i]);
      }
      x = std::move(next);
    }
    if (moved <= 1e-13 * ynorm) break;
  }
  return x;
}

MaxEntSolution solve_projected_gradient(const EdgePartition& part, const ConstraintSpec& spec,
                                        const SolveOptions& options) {
  const auto& p = part.part_sizes();
  const std::size_t k = p.size();
  std::vector<Projector> sets;
  flatten_projectors(spec, part, sets);

  RealProfile x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = static_cast<double>(p[i]) / 2.0;
  x = project_feasible(x, sets, p);
  if (violation(spec, x, part) > 1e-7) {
    MaxEntSolution sol;
    sol.status = SolveStatus::infeasible;
    sol.objective = std::numeric_limits<double>::quiet_NaN();
    sol.kkt_residual = std::numeric_limits<double>::quiet_NaN();
    return sol;
  }

  auto gradient = [&](const RealProfile& v) {
    RealProfile g(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double pi = static_cast<double>(p[i]);
      const double eps = 1e-9 * pi;
      const double vi = std::clamp(v[i], eps, pi - eps);
      g[i] = std::log((pi - vi) / vi);
    }
    return g;
  };

  double fx = p_entropy(x, part);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const RealProfile g = gradient(x);
    // Unit-step probe doubles as the projected-gradient residual.
    RealProfile probe(k);
    for (std::size_t i = 0; i < k; ++i) probe[i] = x[i] + g[i];
    RealProfile y = project_feasible(probe, sets, p);
    residual = 0.0;
    for (std::size_t i = 0; i < k; ++i) residual = std::max(residual, std::abs(y[i] - x[i]));
    if (residual <= options.tol) break;

    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      const double fy = p_entropy(y, part);
      if (fy > fx + 1e-16 * std::abs(fx)) {
        x = y;
        fx = fy;
        accepted = true;
        break;
      }
      alpha *= 0.5;
      for (std::size_t i = 0; i < k; ++i) probe[i] = x[i] + alpha * g[i];
      y = project_feasible(probe, sets, p);
    }
    if (!accepted) break;  // numerical optimum under the projection accuracy
  }

  MaxEntSolution sol;
  sol.status = residual <= std::max(options.tol, 1e-7) ? SolveStatus::converged
                                                       : SolveStatus::iteration_limit;
  sol.iterations = it;
  sol.m_star = x;
  sol.a_star.resize(k);
  for (std::size_t i = 0; i < k; ++i) sol.a_star[i] = x[i] / static_cast<double>(p[i]);
  sol.q_star = sol.a_star;
  sol.objective = p_entropy(x, part);
  sol.kkt_residual = residual;
  return sol;
}

}  // namespace

MaxEntSolution maximize_entropy(const EdgePartition& part, const ConstraintSpec& spec,
                                const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw invalid_input("maximize_entropy: tol must be positive");
  const auto& p = part.part_sizes();

  if (const auto* budget = spec.get_if<Budget>()) {
    if (budget->costs.size() != p.size()) throw invalid_input("maximize_entropy: budget dimension mismatch");
    LinearProblem lp{{budget->costs}, {budget->budget}};
    return solve_linear(lp, part, options);
  }
  if (const auto* linear = spec.get_if<LinearSystem>()) {
    return solve_linear(LinearProblem{linear->a, linear->b}, part, options);
  }
  if (const auto* box = spec.get_if<Box>()) {
    if (box->lo.size() != p.size()) throw invalid_input("maximize_entropy: box dimension mismatch");
    MaxEntSolution sol;
    sol.m_star.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (box->hi[i] > p[i]) throw invalid_input("maximize_entropy: box upper bound exceeds p_i");
      sol.m_star[i] = std::clamp(static_cast<double>(p[i]) / 2.0, static_cast<double>(box->lo[i]),
                                 static_cast<double>(box->hi[i]));
    }
    sol.a_star.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) sol.a_star[i] = sol.m_star[i] / static_cast<double>(p[i]);
    sol.q_star = sol.a_star;
    sol.objective = p_entropy(sol.m_star, part);
    sol.status = SolveStatus::converged;
    sol.kkt_residual = 0.0;
    return sol;
  }
  return solve_projected_gradient(part, spec, options);
}

std::vector<double> product_matrix(const MaxEntSolution& sol, const EdgePartition& part) {
  if (sol.status != SolveStatus::converged)
    throw invalid_state("product_matrix: solution is not converged");
  if (static_cast<int>(sol.q_star.size()) != part.k())
    throw invalid_input("product_matrix: solution/partition dimension mismatch");
  const int n = part.n();
  std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
  for (std::int64_t e = 0; e < part.num_edges(); ++e) {
    const auto [u, v] = edge_endpoints(n, e);
    const double val = sol.q_star[static_cast<std::size_t>(part.part_of(e))];
    q[static_cast<std::size_t>(u) * n + v] = val;
    q[static_cast<std::size_t>(v) * n + u] = val;
  }
  return q;
}

}  // namespace symgraph
