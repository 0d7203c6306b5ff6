#include "dynclust/reference.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace dynclust {

namespace {

void check_budget(std::size_t n, std::size_t k, const OracleBudget& budget) {
  if (n > budget.max_points || k > budget.max_k) {
    throw Error(ErrorCode::kCapacityExceeded, "exhaustive solver limited to n <= " + std::to_string(budget.max_points) +
                                                  ", k <= " + std::to_string(budget.max_k));
  }
}

// Calls fn on every size-m index subset of [0, n).
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t m, Fn&& fn) {
  if (m > n) return;
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    std::size_t i = m;
    while (i > 0 && idx[i - 1] == n - m + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::vector<PointIndex> greedy_lfmis(std::vector<RankedVertex> vertices, const EdgePredicate& edge, std::size_t cap) {
  std::sort(vertices.begin(), vertices.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  std::vector<PointIndex> out;
  for (const auto& [r, v] : vertices) {
    if (cap && out.size() == cap) break;
    bool free = std::none_of(out.begin(), out.end(), [&](PointIndex u) { return edge(u, v); });
    if (free) out.push_back(v);
  }
  return out;
}

std::vector<PointIndex> lfmis_by_definition(const std::vector<RankedVertex>& vertices, const EdgePredicate& edge) {
  std::unordered_map<PointIndex, Rank> rank;
  for (const auto& [r, v] : vertices) rank[v] = r;
  std::unordered_map<PointIndex, bool> memo;
  std::function<bool(PointIndex)> member = [&](PointIndex v) -> bool {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    bool in = true;
    for (const auto& [ru, u] : vertices) {
      if (ru < rank[v] && edge(u, v) && member(u)) {
        in = false;
        break;
      }
    }
    memo[v] = in;
    return in;
  };
  std::vector<RankedVertex> members;
  for (const auto& rv : vertices) {
    if (member(rv.v)) members.push_back(rv);
  }
  std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  std::vector<PointIndex> out;
  for (const auto& rv : members) out.push_back(rv.v);
  return out;
}

PointIndex eliminator(PointIndex v, const EdgePredicate& edge, const std::vector<PointIndex>& lfmis) {
  // lfmis is rank ordered, so the first hit is the smallest.
  for (PointIndex u : lfmis) {
    if (u == v || edge(u, v)) return u;
  }
  return kNoPoint;
}

double kcenter_cost(const std::vector<PointIndex>& points, const std::vector<PointIndex>& centers,
                    const DistanceFn& dist) {
  double worst = 0.0;
  for (PointIndex p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (PointIndex c : centers) best = std::min(best, dist(p, c));
    worst = std::max(worst, best);
  }
  return points.empty() ? 0.0 : worst;
}

KCenterOptimum exact_kcenter(const std::vector<PointIndex>& points, std::size_t k, const DistanceFn& dist,
                             OracleBudget budget) {
  std::size_t n = points.size();
  KCenterOptimum best;
  if (n <= k) {
    best.centers = points;
    return best;
  }
  check_budget(n, k, budget);
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = dist(points[i], points[j]);
  best.cost = std::numeric_limits<double>::infinity();
  for_each_subset(n, k, [&](const std::vector<std::size_t>& idx) {
    double worst = 0.0;
    for (std::size_t p = 0; p < n && worst < best.cost; ++p) {
      double near = std::numeric_limits<double>::infinity();
      for (std::size_t c : idx) near = std::min(near, d[p][c]);
      worst = std::max(worst, near);
    }
    if (worst < best.cost) {
      best.cost = worst;
      best.centers.clear();
      for (std::size_t c : idx) best.centers.push_back(points[c]);
    }
  });
  return best;
}

SumRadiiOptimum exact_sum_radii(const std::vector<PointIndex>& points, std::size_t k, const DistanceFn& dist,
                                OracleBudget budget) {
  std::size_t n = points.size();
  SumRadiiOptimum best;
  if (n <= k) {
    for (PointIndex p : points) best.balls.push_back({p, 0.0});
    return best;
  }
  check_budget(n, k, budget);
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = dist(points[i], points[j]);
  // Candidate radii per center: its distances to every point, ascending.
  std::vector<std::vector<double>> cand(n);
  for (std::size_t i = 0; i < n; ++i) {
    cand[i] = d[i];
    std::sort(cand[i].begin(), cand[i].end());
    cand[i].erase(std::unique(cand[i].begin(), cand[i].end()), cand[i].end());
  }
  best.cost = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= k; ++m) {
    for_each_subset(n, m, [&](const std::vector<std::size_t>& centers) {
      std::vector<double> radii(m, 0.0);
      std::vector<std::size_t> pick(m - 1, 0);
      for (;;) {
        double partial = 0.0;
        for (std::size_t j = 0; j + 1 < m; ++j) {
          radii[j] = cand[centers[j]][pick[j]];
          partial += radii[j];
        }
        if (partial < best.cost) {
          double last = 0.0;
          std::size_t c = centers[m - 1];
          for (std::size_t p = 0; p < n; ++p) {
            bool covered = false;
            for (std::size_t j = 0; j + 1 < m && !covered; ++j) covered = d[centers[j]][p] <= radii[j];
            if (!covered) last = std::max(last, d[c][p]);
          }
          radii[m - 1] = last;
          if (partial + last < best.cost) {
            best.cost = partial + last;
            best.balls.clear();
            for (std::size_t j = 0; j < m; ++j) best.balls.push_back({points[centers[j]], radii[j]});
          }
        }
        // Odometer over the first m-1 radius choices.
        std::size_t j = 0;
        while (j + 1 < m && ++pick[j] == cand[centers[j]].size()) pick[j++] = 0;
        if (j + 1 >= m) break;
      }
    });
  }
  return best;
}

}  // namespace dynclust
