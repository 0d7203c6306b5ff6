#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dynclust/lfmis.hpp"

namespace dynclust {

using DistanceFn = std::function<double(PointIndex, PointIndex)>;

// Size caps for the exhaustive solvers. Exceeding one throws CapacityExceeded.
struct OracleBudget {
  std::size_t max_points = 14;
  std::size_t max_k = 3;
};

struct RankedVertex {
  Rank rank;
  PointIndex v;
};

// Greedy scan in rank order. cap = 0 returns the whole set.
std::vector<PointIndex> greedy_lfmis(std::vector<RankedVertex> vertices, const EdgePredicate& edge,
                                     std::size_t cap = 0);

// Second construction straight from the definition: v is in the set iff no
// lower-ranked neighbour is. Memoised recursion, result in rank order.
std::vector<PointIndex> lfmis_by_definition(const std::vector<RankedVertex>& vertices, const EdgePredicate& edge);

// Smallest-rank member of (N(v) + v) within the full LFMIS.
PointIndex eliminator(PointIndex v, const EdgePredicate& edge, const std::vector<PointIndex>& lfmis);

double kcenter_cost(const std::vector<PointIndex>& points, const std::vector<PointIndex>& centers,
                    const DistanceFn& dist);

struct KCenterOptimum {
  double cost = 0.0;
  std::vector<PointIndex> centers;
};

// Exhaustive discrete k-center over all center subsets.
KCenterOptimum exact_kcenter(const std::vector<PointIndex>& points, std::size_t k, const DistanceFn& dist,
                             OracleBudget budget = {});

struct Ball {
  PointIndex center;
  double radius;
};

struct SumRadiiOptimum {
  double cost = 0.0;
  std::vector<Ball> balls;
};

// Exhaustive sum-of-radii: every center subset of size <= k, every radius
// vector drawn from pairwise distances; the last radius is the smallest that
// covers what the others leave.
SumRadiiOptimum exact_sum_radii(const std::vector<PointIndex>& points, std::size_t k, const DistanceFn& dist,
                                OracleBudget budget = {12, 3});

}  // namespace dynclust
