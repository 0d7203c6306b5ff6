#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dynclust/errors.hpp"
#include "dynclust/reference.hpp"
#include "dynclust/sum_of_radii.hpp"
#include "support.hpp"

using namespace dynclust;

namespace {

std::shared_ptr<LpMetric> line(std::initializer_list<double> xs) {
  auto m = std::make_shared<LpMetric>(1, 1.0);
  for (double x : xs) m->add_point(std::span<const double>(&x, 1));
  return m;
}

DistanceFn raw(const std::shared_ptr<LpMetric>& m) {
  return [m](PointIndex a, PointIndex b) { return m->distance(a, b); };
}

bool covers(const std::vector<Ball>& balls, PointIndex p, const DistanceFn& d) {
  return std::any_of(balls.begin(), balls.end(), [&](const Ball& b) { return d(p, b.center) <= b.radius + 1e-9; });
}

}  // namespace

TEST(PrimalDual, SingletonRaisesToHalfTight) {
  auto m = line({0});
  DistanceOracle d(m);
  PdInstance inst(d, 1, 0.5, 8.0, 1);
  inst.insert(0);
  double z = inst.z();
  EXPECT_DOUBLE_EQ(z, 4.0);
  ASSERT_EQ(inst.iterations().size(), 1u);
  const auto& it = inst.iterations()[0];
  EXPECT_EQ(it.y_units, 3u);
  EXPECT_EQ(it.half_index, 0u);
  EXPECT_DOUBLE_EQ(it.primal_radius, 2 * z);
  EXPECT_EQ(inst.uncovered(), 0u);

  auto sbar = inst.s_bar();
  ASSERT_EQ(sbar.size(), 1u);
  EXPECT_DOUBLE_EQ(sbar[0].radius, 6 * z);
  auto c = inst.costs();
  EXPECT_DOUBLE_EQ(c.sbar_lp, 7 * z);
  EXPECT_DOUBLE_EQ(c.dual, 1.5 * z);
  EXPECT_LE(c.sbar_lp, 6 * c.dual);
}

TEST(PrimalDual, TwoFarPointsTwoIterations) {
  auto m = line({0, 1000});
  DistanceOracle d(m);
  PdInstance inst(d, 1, 0.5, 10.0, 3);
  inst.insert(0);
  inst.insert(1);
  ASSERT_EQ(inst.iterations().size(), 2u);
  for (const auto& it : inst.iterations()) {
    EXPECT_EQ(it.y_units, 3u);
    EXPECT_DOUBLE_EQ(it.primal_radius, 2 * inst.z());
  }
  EXPECT_EQ(inst.dual_violations(), 0u);
}

TEST(PrimalDual, EmptySetSolvesTrivially) {
  auto m = line({0});
  DistanceOracle d(m);
  PdInstance inst(d, 2, 0.5, 4.0, 1);
  EXPECT_TRUE(inst.iterations().empty());
  EXPECT_FALSE(inst.too_small());
  EXPECT_TRUE(inst.s_tilde().empty());
}

TEST(PrimalDual, GuessTooSmallReported) {
  // k = 1, eps = 1: the cap is 2^2 + 2 = 6 iterations, each covering one point.
  auto m = line({0, 100, 200, 300, 400, 500, 600, 700});
  DistanceOracle d(m);
  PdInstance inst(d, 1, 1.0, 1.0, 1);
  for (PointIndex p = 0; p < 8; ++p) inst.insert(p);
  EXPECT_TRUE(inst.too_small());
  EXPECT_LE(inst.iterations().size(), inst.iteration_cap());
  try {
    inst.s_tilde();
    FAIL() << "expected GuessTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGuessTooSmall);
  }
}

TEST(Prune, OverlapAndDisjoint) {
  auto m = line({0, 1, 50});
  auto d = raw(m);
  PdIteration a{0, 3, 0, 2.0}, b{1, 3, 0, 2.0}, c{2, 3, 0, 2.0};
  auto one = prune({a, b}, d);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].radius, 6.0);
  auto two = prune({a, c}, d);
  EXPECT_EQ(two.size(), 2u);
}

TEST(Prune, LargestRadiusFirst) {
  auto m = line({0, 3});
  auto d = raw(m);
  PdIteration small{0, 3, 0, 1.0}, big{1, 5, 1, 4.0};
  auto out = prune({small, big}, d);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].center, 1u);
  EXPECT_DOUBLE_EQ(out[0].radius, 12.0);
}

TEST(Offline, Examples) {
  auto m = line({0, 1, 10});
  auto d = raw(m);
  auto few = offline_solve({0, 1}, 2, d);
  double sum = 0;
  for (const auto& b : few) sum += b.radius;
  EXPECT_EQ(sum, 0.0);

  auto two = offline_solve({0, 1, 2}, 2, d);
  sum = 0;
  for (const auto& b : two) sum += b.radius;
  EXPECT_DOUBLE_EQ(sum, 1.0);
  for (PointIndex p : {0u, 1u, 2u}) EXPECT_TRUE(covers(two, p, d));

  auto one = offline_solve({0, 1, 2}, 1, d);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].radius, 9.0);

  auto greedy = offline_solve({0, 1, 2}, 2, d, OfflineSolver::kGreedy);
  EXPECT_LE(greedy.size(), 2u);
  for (PointIndex p : {0u, 1u, 2u}) EXPECT_TRUE(covers(greedy, p, d));
}

TEST(Combine, Examples) {
  auto m = line({0, 1, 10});
  auto d = raw(m);
  std::vector<Ball> single{{0, 6.0}};
  auto same = combine(single, {{0, 0.0}}, d);
  ASSERT_EQ(same.size(), 1u);
  EXPECT_DOUBLE_EQ(same[0].radius, 6.0);

  std::vector<Ball> sbar{{0, 1.0}, {1, 1.0}, {2, 0.0}};
  auto shat = offline_solve({0, 1, 2}, 2, d);
  auto tilde = combine(sbar, shat, d);
  ASSERT_EQ(tilde.size(), 2u);
  double sum = 0;
  for (const auto& b : tilde) sum += b.radius;
  EXPECT_DOUBLE_EQ(sum, 2.0);
  for (const auto& b : sbar) {
    // Every point of every s_bar ball stays covered.
    for (PointIndex p : {0u, 1u, 2u})
      if (d(p, b.center) <= b.radius) EXPECT_TRUE(covers(tilde, p, d));
  }
}

TEST(Diameters, SmallCases) {
  auto m = line({0, 1, 10, 4});
  auto d = raw(m);
  auto one = realized_diameters({{2, 0.0}}, {2}, d);
  EXPECT_EQ(one, std::vector<double>{0.0});
  auto pair = realized_diameters({{0, 1.0}}, {0, 1}, d);
  EXPECT_LE(pair[0], 2.0);
  EXPECT_DOUBLE_EQ(pair[0], 1.0);
  auto three = realized_diameters({{3, 6.0}}, {0, 1, 2, 3}, d);
  EXPECT_DOUBLE_EQ(three[0], 10.0);
}

TEST(Dynamic, CoveredInsertAndNonCenterDeleteDoNotRerun) {
  auto m = line({0, 0.5, 100, 0.25});
  DistanceOracle d(m);
  PdInstance inst(d, 2, 0.5, 8.0, 1);
  inst.insert(0);
  inst.insert(2);
  inst.s_tilde();
  auto before = inst.iterations().size();
  inst.insert(1);
  EXPECT_EQ(inst.iterations().size(), before);
  EXPECT_FALSE(inst.dirty());
  inst.erase(1);
  EXPECT_EQ(inst.iterations().size(), before);
  EXPECT_EQ(inst.reruns(), 0u);
  EXPECT_EQ(inst.audit(), "");
}

TEST(Dynamic, CenterDeleteReruns) {
  auto m = line({0, 0.5, 100});
  DistanceOracle d(m);
  PdInstance inst(d, 2, 0.5, 8.0, 1);
  inst.insert(0);
  inst.insert(1);
  inst.insert(2);
  PointIndex c = inst.iterations()[0].center;
  inst.erase(c);
  EXPECT_EQ(inst.reruns(), 1u);
  for (const auto& it : inst.iterations()) EXPECT_NE(it.center, c);
  EXPECT_EQ(inst.uncovered(), 0u);
  EXPECT_EQ(inst.audit(), "");
  EXPECT_EQ(inst.dual_violations(), 0u);
}

TEST(Dynamic, Errors) {
  auto m = line({0, 1});
  DistanceOracle d(m);
  PdInstance inst(d, 1, 0.5, 4.0, 1);
  inst.insert(0);
  EXPECT_THROW(inst.insert(0), Error);
  EXPECT_THROW(inst.erase(1), Error);
}

// Dual feasibility, cover bookkeeping, iteration cap and s_tilde coverage
// after every update.
TEST(SumRadiiProperty, InvariantsUnderChurn) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    std::mt19937_64 rng(seed);
    auto pool = support::plane_pool(60, rng);
    for (double opt_prime : {20.0, 60.0, 150.0}) {
      PdInstance inst(*pool.oracle, 3, 0.5, opt_prime, seed);
      std::vector<PointIndex> active;
      for (auto step : support::churn(pool.size, 150, rng)) {
        if (step.insert) {
          inst.insert(step.p);
          active.push_back(step.p);
        } else {
          inst.erase(step.p);
          active.erase(std::find(active.begin(), active.end(), step.p));
        }
        ASSERT_EQ(inst.dual_violations(), 0u);
        ASSERT_EQ(inst.audit(), "");
        ASSERT_LE(inst.iterations().size(), inst.iteration_cap());
        for (const auto& it : inst.iterations()) ASSERT_GE(it.y_units, 0u);
        if (inst.too_small()) continue;
        const auto& tilde = inst.s_tilde();
        ASSERT_LE(tilde.size(), 3u);
        for (PointIndex p : active) ASSERT_TRUE(covers(tilde, p, pool.raw()));
      }
    }
  }
}

namespace {

struct ChainStats {
  std::size_t checked = 0;
  std::size_t over = 0;
  double worst = 0;
};

// LP cost of the pruned pairs over the dual sum, across churned instances.
ChainStats cost_chain(double factor) {
  ChainStats st;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    auto pool = support::plane_pool(50, rng);
    PdInstance inst(*pool.oracle, 2, 0.5, 80.0, seed);
    for (auto step : support::churn(pool.size, 120, rng)) {
      step.insert ? inst.insert(step.p) : inst.erase(step.p);
      if (inst.too_small() || inst.iterations().empty()) continue;
      auto c = inst.costs();
      ++st.checked;
      st.worst = std::max(st.worst, c.sbar_lp / c.dual);
      if (c.sbar_lp > factor * c.dual + 1e-9) ++st.over;
    }
  }
  return st;
}

}  // namespace

// Pruned radius is six half-tight radii; half-tightness on disjoint balls
// gives sum (r_j + z) <= 2 sum y, hence at most 12 sum y.
TEST(SumRadiiProperty, PrunedCostWithinTwelveDual) {
  auto st = cost_chain(12.0);
  ASSERT_GT(st.checked, 0u);
  EXPECT_EQ(st.over, 0u) << "worst sbar_lp / dual = " << st.worst;
}

// The tighter six-fold chain does not follow from the radius rule above and
// is reported as it stands.
TEST(SumRadiiProperty, PrunedCostWithinSixDual) {
  auto st = cost_chain(6.0);
  ASSERT_GT(st.checked, 0u);
  EXPECT_EQ(st.over, 0u) << "worst sbar_lp / dual = " << st.worst << " over " << st.checked << " states";
}

TEST(SumRadiiEngine, AgainstExactOptimum) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    std::mt19937_64 rng(seed);
    auto pool = support::plane_pool(10, rng, 100.0, true);
    auto b = support::pool_bounds(pool);
    SumRadiiConfig cfg;
    cfg.k = 2;
    cfg.eps = 0.5;
    cfg.r_min = b.r_min;
    cfg.r_max = b.r_max;
    cfg.seed = seed;
    SumRadiiEngine eng(*pool.oracle, cfg);
    std::vector<PointIndex> active;
    for (auto step : support::churn(pool.size, 40, rng)) {
      if (step.insert) {
        eng.insert(step.p);
        active.push_back(step.p);
      } else {
        eng.erase(step.p);
        active.erase(std::find(active.begin(), active.end(), step.p));
      }
      auto sol = eng.solution();
      double opt = exact_sum_radii(active, 2, pool.raw()).cost;
      ASSERT_LE(sol.cost, 8.5 * 1.5 * opt + 1e-9) << "seed " << seed;
      ASSERT_LE(sol.balls.size(), 2u);
      for (PointIndex p : active) ASSERT_TRUE(covers(sol.balls, p, pool.raw()));
      EXPECT_DOUBLE_EQ(sol.diameter_bound(), 2 * sol.cost);
    }
  }
}

TEST(SumRadiiEngine, FewerThanKIsFree) {
  auto m = line({0, 40});
  DistanceOracle d(m);
  SumRadiiConfig cfg;
  cfg.k = 2;
  cfg.r_min = 1;
  cfg.r_max = 40;
  SumRadiiEngine eng(d, cfg);
  eng.insert(0);
  eng.insert(1);
  EXPECT_EQ(eng.solution().cost, 0.0);
}
