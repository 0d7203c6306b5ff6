#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "dynclust/metric.hpp"
#include "dynclust/reference.hpp"

namespace dynclust::support {

// Points registered up front; the stream decides which are active.
struct Pool {
  std::shared_ptr<Metric> metric;
  std::unique_ptr<DistanceOracle> oracle;
  std::size_t size = 0;

  DistanceFn raw() const {
    auto m = metric;
    return [m](PointIndex a, PointIndex b) { return m->distance(a, b); };
  }
};

inline Pool plane_pool(std::size_t n, std::mt19937_64& rng, double extent = 100.0, bool integral = false) {
  Pool pool;
  pool.metric = std::make_shared<LpMetric>(2, 2.0);
  std::uniform_real_distribution<double> u(0.0, extent);
  for (std::size_t i = 0; i < n; ++i) {
    double xy[2] = {u(rng), u(rng)};
    if (integral) {
      xy[0] = std::floor(xy[0]);
      xy[1] = std::floor(xy[1]);
    }
    pool.metric->add_point(xy);
  }
  pool.oracle = std::make_unique<DistanceOracle>(pool.metric);
  pool.size = n;
  return pool;
}

inline Pool hamming_pool(std::size_t n, std::size_t dim, std::mt19937_64& rng, std::size_t clusters = 3,
                         double flip = 0.1) {
  Pool pool;
  pool.metric = std::make_shared<HammingMetric>(dim);
  std::bernoulli_distribution coin(0.5), noise(flip);
  std::vector<std::vector<double>> seeds(clusters, std::vector<double>(dim));
  for (auto& s : seeds)
    for (auto& b : s) b = coin(rng) ? 1.0 : 0.0;
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v;
    do {
      v = seeds[i % clusters];
      for (auto& b : v)
        if (noise(rng)) b = 1.0 - b;
    } while (!seen.insert(v).second);
    pool.metric->add_point(v);
  }
  pool.oracle = std::make_unique<DistanceOracle>(pool.metric);
  pool.size = n;
  return pool;
}

inline Pool jaccard_pool(std::size_t n, std::mt19937_64& rng, std::size_t clusters = 3, std::size_t universe = 60) {
  Pool pool;
  pool.metric = std::make_shared<JaccardMetric>();
  std::uniform_int_distribution<std::size_t> pick(0, universe - 1);
  std::bernoulli_distribution keep(0.8);
  std::vector<std::vector<double>> seeds(clusters);
  for (auto& s : seeds) {
    for (int j = 0; j < 12; ++j) s.push_back(static_cast<double>(pick(rng)));
  }
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v;
    do {
      v.clear();
      for (double e : seeds[i % clusters])
        if (keep(rng)) v.push_back(e);
      v.push_back(static_cast<double>(pick(rng)));
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    } while (!seen.insert(v).second);
    pool.metric->add_point(v);
  }
  pool.oracle = std::make_unique<DistanceOracle>(pool.metric);
  pool.size = n;
  return pool;
}

struct Step {
  bool insert;
  PointIndex p;
};

// Every pool point inserted once, interleaved with deletions of random
// active points; each deleted point may come back later.
inline std::vector<Step> churn(std::size_t n, std::size_t updates, std::mt19937_64& rng, double p_insert = 0.6) {
  std::vector<Step> out;
  std::vector<PointIndex> active, idle(n);
  for (std::size_t i = 0; i < n; ++i) idle[i] = static_cast<PointIndex>(n - 1 - i);
  std::bernoulli_distribution ins(p_insert);
  while (out.size() < updates) {
    bool do_insert = active.empty() || (!idle.empty() && ins(rng));
    if (do_insert) {
      std::uniform_int_distribution<std::size_t> pick(0, idle.size() - 1);
      std::size_t i = pick(rng);
      PointIndex p = idle[i];
      idle[i] = idle.back();
      idle.pop_back();
      active.push_back(p);
      out.push_back({true, p});
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
      std::size_t i = pick(rng);
      PointIndex p = active[i];
      active[i] = active.back();
      active.pop_back();
      idle.push_back(p);
      out.push_back({false, p});
    }
  }
  return out;
}

// All n inserted, then all deleted in random order.
inline std::vector<Step> fill_and_drain(std::size_t n, std::mt19937_64& rng) {
  std::vector<PointIndex> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<PointIndex>(i);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Step> out;
  for (PointIndex p : order) out.push_back({true, p});
  std::shuffle(order.begin(), order.end(), rng);
  for (PointIndex p : order) out.push_back({false, p});
  return out;
}

inline DistanceBounds pool_bounds(const Pool& pool) { return estimate_bounds(*pool.metric); }

}  // namespace dynclust::support
