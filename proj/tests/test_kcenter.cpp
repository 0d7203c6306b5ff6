#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dynclust/errors.hpp"
#include "dynclust/kcenter.hpp"
#include "dynclust/reference.hpp"
#include "support.hpp"

using namespace dynclust;

namespace {

std::shared_ptr<LpMetric> line(std::initializer_list<double> xs) {
  auto m = std::make_shared<LpMetric>(1, 1.0);
  for (double x : xs) m->add_point(std::span<const double>(&x, 1));
  return m;
}

KCenterConfig config(std::size_t k, double eps, double r_min, double r_max, std::uint64_t seed = 1) {
  KCenterConfig cfg;
  cfg.k = k;
  cfg.eps = eps;
  cfg.r_min = r_min;
  cfg.r_max = r_max;
  cfg.seed = seed;
  return cfg;
}

std::vector<PointIndex> sorted(std::vector<PointIndex> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(KCenter, FourPointLine) {
  auto m = line({0, 1, 100, 101});
  DistanceOracle d(m);
  KCenterEngine eng(d, config(2, 0.5, 1, 128));
  for (PointIndex p = 0; p < 4; ++p) eng.insert(p);
  auto sol = eng.solution();
  EXPECT_LE(sol.cost_estimate, 2.5);
  EXPECT_GE(sol.cost_estimate, 1.0);
  EXPECT_EQ(sorted(eng.enumerate_cluster(0)), (std::vector<PointIndex>{0, 1}));
  EXPECT_EQ(sorted(eng.enumerate_cluster(3)), (std::vector<PointIndex>{2, 3}));
  EXPECT_EQ(eng.membership(0), eng.membership(1));
  EXPECT_NE(eng.membership(0), eng.membership(2));
}

TEST(KCenter, FewerPointsThanK) {
  auto m = line({5});
  DistanceOracle d(m);
  KCenterEngine eng(d, config(3, 0.5, 1, 8));
  eng.insert(0);
  auto sol = eng.solution();
  EXPECT_EQ(sol.cost_estimate, 0.0);
  EXPECT_EQ(sol.centers, std::vector<PointIndex>{0});
  EXPECT_EQ(eng.membership(0), 0u);
  EXPECT_EQ(eng.enumerate_cluster(0), std::vector<PointIndex>{0});
}

TEST(KCenter, TwoPointsSmallestCoveringScale) {
  auto m = line({0, 7.3});
  DistanceOracle d(m);
  KCenterEngine eng(d, config(1, 0.5, 1, 16));
  eng.insert(0);
  eng.insert(1);
  auto sol = eng.solution();
  EXPECT_GE(sol.cost_estimate, 7.3);
  EXPECT_LE(sol.cost_estimate, 1.25 * 7.3 + 1e-12);
  ASSERT_TRUE(sol.scale.has_value());
  if (*sol.scale > 0) EXPECT_LT(eng.ladder()[*sol.scale - 1], 7.3);
}

TEST(KCenter, UnknownPointQueries) {
  auto m = line({0, 1, 2});
  DistanceOracle d(m);
  KCenterEngine eng(d, config(1, 0.5, 1, 4));
  eng.insert(0);
  EXPECT_THROW(eng.membership(1), Error);
  EXPECT_THROW(eng.enumerate_cluster(2), Error);
  EXPECT_THROW(eng.erase(2), Error);
  EXPECT_THROW(eng.insert(0), Error);
}

TEST(KCenter, MembershipFollowsWinningScale) {
  auto m = line({0, 1, 10, 11, 30});
  DistanceOracle d(m);
  KCenterEngine eng(d, config(2, 0.5, 1, 64));
  for (PointIndex p = 0; p < 5; ++p) eng.insert(p);
  auto wide = eng.solution().cost_estimate;
  eng.erase(4);
  auto narrow = eng.solution();
  EXPECT_LT(narrow.cost_estimate, wide);
  for (auto [p, c] : narrow.assignment) {
    EXPECT_EQ(eng.membership(p), c);
    EXPECT_LE(m->distance(p, c), narrow.cost_estimate);
  }
}

// Brute-force comparison under churn on small pools.
TEST(KCenter, ApproximationAgainstExact) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    std::mt19937_64 rng(seed);
    auto pool = support::plane_pool(12, rng, 100.0, true);
    auto b = support::pool_bounds(pool);
    for (std::size_t k = 1; k <= 3; ++k) {
      KCenterEngine eng(*pool.oracle, config(k, 0.5, b.r_min, b.r_max, seed));
      std::vector<PointIndex> active;
      for (auto step : support::churn(pool.size, 60, rng)) {
        if (step.insert) {
          eng.insert(step.p);
          active.push_back(step.p);
        } else {
          eng.erase(step.p);
          active.erase(std::find(active.begin(), active.end(), step.p));
        }
        auto sol = eng.solution();
        ASSERT_LE(sol.centers.size(), k);
        double opt = exact_kcenter(active, k, pool.raw()).cost;
        ASSERT_LE(sol.cost_estimate, 2.5 * opt + 1e-9) << "seed " << seed << " k " << k;
        ASSERT_EQ(sol.assignment.size(), active.size());
        for (auto [p, c] : sol.assignment) ASSERT_LE(pool.metric->distance(p, c), sol.cost_estimate + 1e-9);
        auto w = eng.lower_bound_witness();
        if (!w.empty()) {
          ASSERT_EQ(w.size(), k + 1);
          double below = eng.ladder()[*sol.scale - 1];
          for (std::size_t i = 0; i < w.size(); ++i)
            for (std::size_t j = i + 1; j < w.size(); ++j) ASSERT_GT(pool.metric->distance(w[i], w[j]), below);
        }
      }
    }
  }
}

TEST(KCenter, ForcedRestartsStayCanonical) {
  std::mt19937_64 rng(8);
  auto pool = support::plane_pool(80, rng);
  auto b = support::pool_bounds(pool);
  auto cfg = config(3, 0.5, b.r_min, b.r_max, 4);
  cfg.restart_estimate = 0.5;
  KCenterEngine eng(*pool.oracle, cfg);
  std::vector<PointIndex> active;
  for (auto step : support::churn(pool.size, 200, rng)) {
    if (step.insert) {
      eng.insert(step.p);
      active.push_back(step.p);
    } else {
      eng.erase(step.p);
      active.erase(std::find(active.begin(), active.end(), step.p));
    }
  }
  EXPECT_GT(eng.restarts(), 0u);
  for (std::size_t s = 0; s < eng.ladder().size(); ++s) {
    const auto& inst = eng.instance(s);
    double r = eng.ladder()[s];
    auto m = pool.metric;
    EdgePredicate edge = [m, r](PointIndex a, PointIndex c) { return a != c && m->distance(a, c) <= r; };
    std::vector<RankedVertex> vs;
    for (PointIndex v : active) vs.push_back({inst.rank(v), v});
    ASSERT_EQ(inst.alg(), greedy_lfmis(vs, edge, inst.k() + 1)) << "scale " << s;
  }
}

TEST(KCenter, ThreadCountDoesNotChangeAnswers) {
  std::mt19937_64 rng(12);
  auto pool = support::plane_pool(150, rng);
  auto b = support::pool_bounds(pool);
  auto steps = support::churn(pool.size, 300, rng);
  std::vector<std::vector<double>> runs;
  for (std::size_t threads : {1u, 4u}) {
    auto cfg = config(4, 0.3, b.r_min, b.r_max, 99);
    cfg.threads = threads;
    KCenterEngine eng(*pool.oracle, cfg);
    std::vector<double> costs;
    for (auto step : steps) {
      step.insert ? eng.insert(step.p) : eng.erase(step.p);
      costs.push_back(eng.solution().cost_estimate);
    }
    runs.push_back(costs);
  }
  EXPECT_EQ(runs[0], runs[1]);
}

TEST(KCenter, EmptyAfterDrain) {
  std::mt19937_64 rng(2);
  auto pool = support::plane_pool(30, rng);
  auto b = support::pool_bounds(pool);
  KCenterEngine eng(*pool.oracle, config(2, 0.5, b.r_min, b.r_max));
  for (auto step : support::fill_and_drain(pool.size, rng)) step.insert ? eng.insert(step.p) : eng.erase(step.p);
  auto sol = eng.solution();
  EXPECT_TRUE(sol.centers.empty());
  EXPECT_EQ(sol.cost_estimate, 0.0);
}
