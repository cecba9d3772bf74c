#include "symgraph/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "symgraph/errors.hpp"
#include "symgraph/random.hpp"

namespace symgraph {

ConstraintSpec::ConstraintSpec(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

ConstraintSpec ConstraintSpec::linear(std::vector<std::vector<double>> a, std::vector<double> b) {
  if (a.empty() || a.size() != b.size()) throw invalid_input("linear: need one row per bound");
  const std::size_t k = a.front().size();
  if (k == 0) throw invalid_input("linear: empty rows");
  for (const auto& row : a)
    if (row.size() != k) throw invalid_input("linear: ragged matrix");
  return ConstraintSpec(LinearSystem{std::move(a), std::move(b)});
}

ConstraintSpec ConstraintSpec::budget(std::vector<double> costs, double budget) {
  if (costs.empty()) throw invalid_input("budget: empty cost vector");
  for (double c : costs)
    if (!(c >= 0.0)) throw invalid_input("budget: costs must be nonnegative");
  return ConstraintSpec(Budget{std::move(costs), budget});
}

ConstraintSpec ConstraintSpec::box(Profile lo, Profile hi) {
  if (lo.empty() || lo.size() != hi.size()) throw invalid_input("box: bounds must have equal length");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (lo[i] < 0 || lo[i] > hi[i]) throw invalid_input("box: need 0 <= lo_i <= hi_i");
  return ConstraintSpec(Box{std::move(lo), std::move(hi)});
}

ConstraintSpec ConstraintSpec::spectral(std::vector<double> rho, int connector,
                                        std::vector<std::pair<int, int>> blocks, double threshold) {
  const int ell = static_cast<int>(rho.size());
  if (ell < 2) throw invalid_input("spectral: need at least two groups");
  double sum = 0.0;
  for (double r : rho) {
    if (!(r > 0.0)) throw invalid_input("spectral: group fractions must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw invalid_input("spectral: group fractions must sum to 1");
  if (connector < 0 || connector >= ell) throw invalid_input("spectral: connector out of range");
  if (!(threshold > 0.0)) throw invalid_input("spectral: threshold must be positive");
  const std::size_t expect = static_cast<std::size_t>(ell) * (ell + 1) / 2;
  if (blocks.size() != expect)
    throw invalid_input("spectral: partition must be the group-pair partition (k = ell(ell+1)/2)");
  std::set<std::pair<int, int>> seen;
  for (auto& [g1, g2] : blocks) {
    if (g1 > g2) std::swap(g1, g2);
    if (g1 < 0 || g2 >= ell) throw invalid_input("spectral: block group out of range");
    if (!seen.emplace(g1, g2).second) throw invalid_input("spectral: duplicate group pair");
  }
  return ConstraintSpec(Spectral{std::move(rho), connector, threshold, std::move(blocks)});
}

ConstraintSpec ConstraintSpec::intersection(std::vector<ConstraintSpec> members) {
  if (members.empty()) throw invalid_input("intersection: empty member list");
  return ConstraintSpec(Intersection{std::move(members)});
}

std::vector<std::vector<double>> branching_matrix(const std::vector<std::vector<double>>& block_counts,
                                                  const std::vector<double>& rho, int connector, int n) {
  const int ell = static_cast<int>(rho.size());
  if (connector < 0 || connector >= ell) throw invalid_input("branching_matrix: connector out of range");
  if (static_cast<int>(block_counts.size()) != ell) throw invalid_input("branching_matrix: counts must be ell x ell");
  for (const auto& row : block_counts)
    if (static_cast<int>(row.size()) != ell) throw invalid_input("branching_matrix: counts must be ell x ell");
  for (double r : rho)
    if (!(r > 0.0)) throw invalid_input("branching_matrix: group fractions must be positive");

  std::vector<int> keep;
  for (int g = 0; g < ell; ++g)
    if (g != connector) keep.push_back(g);
  const double n2 = static_cast<double>(n) * n;
  std::vector<std::vector<double>> t(keep.size(), std::vector<double>(keep.size(), 0.0));
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      t[i][j] = block_counts[static_cast<std::size_t>(keep[i])][static_cast<std::size_t>(keep[j])] /
                (n2 * rho[static_cast<std::size_t>(keep[i])]);
  return t;
}

std::vector<std::vector<double>> branching_matrix(const Spectral& spec, const RealProfile& m, int n) {
  const int ell = static_cast<int>(spec.rho.size());
  if (m.size() != spec.blocks.size()) throw invalid_input("branching_matrix: profile/block dimension mismatch");
  std::vector<std::vector<double>> counts(static_cast<std::size_t>(ell),
                                          std::vector<double>(static_cast<std::size_t>(ell), 0.0));
  for (std::size_t c = 0; c < m.size(); ++c) {
    const auto [g1, g2] = spec.blocks[c];
    counts[static_cast<std::size_t>(g1)][static_cast<std::size_t>(g2)] = m[c];
    counts[static_cast<std::size_t>(g2)][static_cast<std::size_t>(g1)] = m[c];
  }
  return branching_matrix(counts, spec.rho, spec.connector, n);
}

double spectral_norm(const std::vector<std::vector<double>>& t) {
  if (t.empty()) return 0.0;
  const std::size_t rows = t.size();
  const std::size_t cols = t.front().size();
  for (const auto& row : t)
    if (row.size() != cols) throw invalid_input("spectral_norm: ragged matrix");
  if (cols == 0) return 0.0;
  for (const auto& row : t)
    for (double x : row)
      if (!std::isfinite(x)) throw invalid_input("spectral_norm: entries must be finite");

  // Gram iteration: y = T^T (T x).
  auto apply = [&](const std::vector<double>& x) {
    std::vector<double> tx(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) tx[i] += t[i][j] * x[j];
    std::vector<double> y(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) y[j] += t[i][j] * tx[i];
    return y;
  };

  // Deterministic start vector from a fixed stream.
  RandomStream start(0x5EEDu);
  std::vector<double> x(cols);
  double norm = 0.0;
  for (double& xi : x) {
    xi = 0.5 + start.next_unit();
    norm += xi * xi;
  }
  norm = std::sqrt(norm);
  for (double& xi : x) xi /= norm;

  double sigma2 = 0.0;
  for (int iter = 0; iter < 100000; ++iter) {
    std::vector<double> y = apply(x);
    double rayleigh = 0.0, ynorm = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      rayleigh += x[j] * y[j];
      ynorm += y[j] * y[j];
    }
    ynorm = std::sqrt(ynorm);
    if (ynorm == 0.0) return 0.0;
    for (std::size_t j = 0; j < cols; ++j) x[j] = y[j] / ynorm;
    if (iter > 0 && std::abs(rayleigh - sigma2) <= 1e-10 * std::max(1.0, std::abs(rayleigh))) {
      sigma2 = rayleigh;
      break;
    }
    sigma2 = rayleigh;
  }
  return std::sqrt(std::max(0.0, sigma2));
}

namespace {

template <typename Vec>
void check_dims(const Vec& m, const EdgePartition& part) {
  if (static_cast<int>(m.size()) != part.k()) throw invalid_input("contains: profile dimension mismatch");
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double v = static_cast<double>(m[i]);
    if (v < 0.0 || v > static_cast<double>(part.part_sizes()[i]))
      throw invalid_input("contains: profile outside [0, p_i]");
  }
}

double violation_node(const ConstraintSpec::Node& node, const RealProfile& m, const EdgePartition& part);

double violation_impl(const ConstraintSpec& spec, const RealProfile& m, const EdgePartition& part) {
  return violation_node(spec.node(), m, part);
}

double violation_node(const ConstraintSpec::Node& node, const RealProfile& m, const EdgePartition& part) {
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LinearSystem>) {
          if (c.a.front().size() != m.size()) throw invalid_input("contains: linear system dimension mismatch");
          double worst = -std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < c.a.size(); ++j) {
            double lhs = 0.0;
            for (std::size_t i = 0; i < m.size(); ++i) lhs += c.a[j][i] * m[i];
            worst = std::max(worst, lhs - c.b[j]);
          }
          return worst;
        } else if constexpr (std::is_same_v<T, Budget>) {
          if (c.costs.size() != m.size()) throw invalid_input("contains: budget dimension mismatch");
          double lhs = 0.0;
          for (std::size_t i = 0; i < m.size(); ++i) lhs += c.costs[i] * m[i];
          return lhs - c.budget;
        } else if constexpr (std::is_same_v<T, Box>) {
          if (c.lo.size() != m.size()) throw invalid_input("contains: box dimension mismatch");
          for (std::size_t i = 0; i < m.size(); ++i)
            if (c.hi[i] > part.part_sizes()[i]) throw invalid_input("contains: box upper bound exceeds p_i");
          double worst = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < m.size(); ++i) {
            worst = std::max(worst, static_cast<double>(c.lo[i]) - m[i]);
            worst = std::max(worst, m[i] - static_cast<double>(c.hi[i]));
          }
          return worst;
        } else if constexpr (std::is_same_v<T, Spectral>) {
          // Strict condition: feasible iff this is < 0.
          return spectral_norm(branching_matrix(c, m, part.n())) - c.threshold;
        } else {
          double worst = -std::numeric_limits<double>::infinity();
          for (const auto& member : c.members)
            worst = std::max(worst, violation_impl(member, m, part));
          return worst;
        }
      },
      node);
}

bool contains_node(const ConstraintSpec::Node& node, const RealProfile& m, const EdgePartition& part) {
  return std::visit(
      [&](const auto& c) -> bool {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Spectral>) {
          return violation_node(node, m, part) < 0.0;
        } else if constexpr (std::is_same_v<T, Intersection>) {
          for (const auto& member : c.members)
            if (!contains_node(member.node(), m, part)) return false;
          return true;
        } else {
          return violation_node(node, m, part) <= 0.0;
        }
      },
      node);
}

}  // namespace

bool contains(const ConstraintSpec& spec, const Profile& m, const EdgePartition& part) {
  check_dims(m, part);
  RealProfile real(m.begin(), m.end());
  return contains_node(spec.node(), real, part);
}

bool contains(const ConstraintSpec& spec, const RealProfile& m, const EdgePartition& part) {
  check_dims(m, part);
  return contains_node(spec.node(), m, part);
}

double violation(const ConstraintSpec& spec, const RealProfile& m, const EdgePartition& part) {
  if (static_cast<int>(m.size()) != part.k()) throw invalid_input("violation: profile dimension mismatch");
  return violation_node(spec.node(), m, part);
}

namespace {

// --- integer hull membership, k == 2 -------------------------------------

using Point2 = std::pair<std::int64_t, std::int64_t>;

__int128 cross(const Point2& o, const Point2& a, const Point2& b) {
  return static_cast<__int128>(a.first - o.first) * (b.second - o.second) -
         static_cast<__int128>(a.second - o.second) * (b.first - o.first);
}

std::vector<Point2> hull2(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> h(2 * pts.size());
  std::size_t m = 0;
  for (const auto& p : pts) {
    while (m >= 2 && cross(h[m - 2], h[m - 1], p) <= 0) --m;
    h[m++] = p;
  }
  const std::size_t lower = m + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (m >= lower && cross(h[m - 2], h[m - 1], *it) <= 0) --m;
    h[m++] = *it;
  }
  h.resize(m - 1);
  return h;
}

bool inside_hull2(const std::vector<Point2>& hull, const Point2& q) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return hull[0] == q;
  if (hull.size() == 2) {
    // On segment: collinear and within the bounding box.
    if (cross(hull[0], hull[1], q) != 0) return false;
    return std::min(hull[0].first, hull[1].first) <= q.first &&
           q.first <= std::max(hull[0].first, hull[1].first) &&
           std::min(hull[0].second, hull[1].second) <= q.second &&
           q.second <= std::max(hull[0].second, hull[1].second);
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, q) < 0) return false;  // hull is counterclockwise
  }
  return true;
}

// --- hull membership, k >= 3: away-step Frank-Wolfe ----------------------

// Decides whether w lies in the convex hull of F by minimizing ||x - w||^2 over
// the hull. The Frank-Wolfe dual gap certifies a lower bound on the optimum, so
// "outside" verdicts are sound down to the documented tolerance; with integer
// data at desk scale the separation margin is far above it.
bool hull_member_fw(const std::vector<Profile>& feasible, const Profile& w) {
  const std::size_t k = w.size();
  const std::size_t nf = feasible.size();
  std::vector<double> x(k), target(k);
  for (std::size_t i = 0; i < k; ++i) target[i] = static_cast<double>(w[i]);

  auto dist2 = [&](const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d = y[i] - target[i];
      s += d * d;
    }
    return s;
  };

  // Start from the vertex closest to w.
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < nf; ++v) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d = static_cast<double>(feasible[v][i]) - target[i];
      s += d * d;
    }
    if (s < best_d) {
      best_d = s;
      best = v;
    }
  }
  std::map<std::size_t, double> weight{{best, 1.0}};
  for (std::size_t i = 0; i < k; ++i) x[i] = static_cast<double>(feasible[best][i]);

  constexpr double kInsideTol = 1e-10;
  constexpr double kOutsideTol = 1e-8;
  for (int iter = 0; iter < 200000; ++iter) {
    const double f = dist2(x);
    if (f <= kInsideTol) return true;
    std::vector<double> grad(k);
    for (std::size_t i = 0; i < k; ++i) grad[i] = 2.0 * (x[i] - target[i]);

    // Frank-Wolfe vertex (min grad.v) over all of F.
    std::size_t fw = 0;
    double fw_val = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < nf; ++v) {
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += grad[i] * static_cast<double>(feasible[v][i]);
      if (dot < fw_val) {
        fw_val = dot;
        fw = v;
      }
    }
    double gx = 0.0;
    for (std::size_t i = 0; i < k; ++i) gx += grad[i] * x[i];
    const double gap = gx - fw_val;
    if (f - gap >= kOutsideTol) return false;

    // Away vertex (max grad.v) over the active set.
    std::size_t away = weight.begin()->first;
    double away_val = -std::numeric_limits<double>::infinity();
    for (const auto& [v, a] : weight) {
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += grad[i] * static_cast<double>(feasible[v][i]);
      if (dot > away_val) {
        away_val = dot;
        away = v;
      }
    }

    const bool fw_step = (gx - fw_val) >= (away_val - gx);
    std::vector<double> dir(k);
    double gmax;
    if (fw_step) {
      for (std::size_t i = 0; i < k; ++i) dir[i] = static_cast<double>(feasible[fw][i]) - x[i];
      gmax = 1.0;
    } else {
      for (std::size_t i = 0; i < k; ++i) dir[i] = x[i] - static_cast<double>(feasible[away][i]);
      const double aw = weight[away];
      if (aw >= 1.0) {
        // Single active vertex and it is the away vertex: no room to move.
        return f <= kInsideTol;
      }
      gmax = aw / (1.0 - aw);
    }
    double gd = 0.0, dd = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      gd += grad[i] * dir[i];
      dd += dir[i] * dir[i];
    }
    if (dd <= 0.0) return f <= kInsideTol;
    const double gamma = std::clamp(-gd / (2.0 * dd), 0.0, gmax);
    if (gamma <= 0.0) return f <= kInsideTol;
    for (std::size_t i = 0; i < k; ++i) x[i] += gamma * dir[i];
    if (fw_step) {
      for (auto& [v, a] : weight) a *= (1.0 - gamma);
      weight[fw] += gamma;
    } else {
      for (auto& [v, a] : weight) a *= (1.0 + gamma);
      weight[away] -= gamma;
    }
    for (auto it = weight.begin(); it != weight.end();)
      it = (it->second <= 1e-14) ? weight.erase(it) : std::next(it);
  }
  throw invalid_state("profile_set_convex: hull membership did not converge");
}

}  // namespace

bool profile_set_convex(const std::vector<Profile>& feasible) {
  if (feasible.empty()) return true;
  const std::size_t k = feasible.front().size();
  for (const auto& v : feasible)
    if (v.size() != k) throw invalid_input("profile_set_convex: ragged profiles");

  Profile lo = feasible.front(), hi = feasible.front();
  for (const auto& v : feasible)
    for (std::size_t i = 0; i < k; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }

  std::set<Profile> members(feasible.begin(), feasible.end());

  // Enumerate the bounding-box lattice; only non-members need a hull test.
  std::int64_t cells = 1;
  for (std::size_t i = 0; i < k; ++i) {
    cells *= hi[i] - lo[i] + 1;
    if (cells > 20'000'000)
      throw capacity_error("profile_set_convex: bounding box exceeds 2e7 lattice points");
  }

  std::vector<Point2> pts2;
  std::vector<Point2> hull;
  if (k == 2) {
    for (const auto& v : feasible) pts2.emplace_back(v[0], v[1]);
    hull = hull2(pts2);
  }

  Profile w = lo;
  for (;;) {
    if (!members.count(w)) {
      bool inside;
      if (k == 1) {
        inside = true;  // between lo and hi on a line
      } else if (k == 2) {
        inside = inside_hull2(hull, {w[0], w[1]});
      } else {
        inside = hull_member_fw(feasible, w);
      }
      if (inside) return false;
    }
    std::size_t pos = 0;
    while (pos < k && w[pos] == hi[pos]) {
      w[pos] = lo[pos];
      ++pos;
    }
    if (pos == k) break;
    w[pos] += 1;
  }
  return true;
}

bool FeasibleRegion::contains(const Profile& m) const {
  return symgraph::contains(spec, m, partition);
}

std::vector<Profile> FeasibleRegion::enumerate_profiles(std::int64_t cap) const {
  std::int64_t cells = 1;
  for (std::int64_t p : partition.part_sizes()) {
    if (cells > cap / (p + 1) + 1) cells = cap + 1;
    else cells *= p + 1;
    if (cells > cap)
      throw capacity_error("FeasibleRegion: profile space exceeds cap of " + std::to_string(cap));
  }
  std::vector<Profile> feasible;
  Profile v(static_cast<std::size_t>(partition.k()), 0);
  for (;;) {
    if (symgraph::contains(spec, v, partition)) feasible.push_back(v);
    std::size_t pos = 0;
    while (pos < v.size() && v[pos] == partition.part_sizes()[pos]) {
      v[pos] = 0;
      ++pos;
    }
    if (pos == v.size()) break;
    v[pos] += 1;
  }
  return feasible;
}

bool FeasibleRegion::empty(std::int64_t cap) const { return enumerate_profiles(cap).empty(); }

bool verify_convexity(const ConstraintSpec& spec, const EdgePartition& part, std::int64_t cap) {
  return profile_set_convex(FeasibleRegion{spec, part}.enumerate_profiles(cap));
}

}  // namespace symgraph
