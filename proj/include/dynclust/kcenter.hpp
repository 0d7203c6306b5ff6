#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dynclust/lfmis.hpp"
#include "dynclust/metric.hpp"
#include "dynclust/util.hpp"

namespace dynclust {

struct KCenterConfig {
  std::size_t k = 1;
  double eps = 0.5;
  double r_min = 1.0;
  double r_max = 1.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  // Expected elementary operations per update. Zero disables the restart
  // guard; otherwise a scale whose operation count passes 4 * t * estimate
  // is rebuilt with fresh ranks.
  double restart_estimate = 0.0;
  std::size_t max_restarts_per_update = 4;
};

struct KCenterSolution {
  double cost_estimate = 0.0;
  std::optional<std::size_t> scale;  // empty when every point is a center
  std::vector<PointIndex> centers;
  std::vector<std::pair<PointIndex, PointIndex>> assignment;  // point -> center
};

// Builds the neighbourhood index for one scale.
using IndexFactory = std::function<std::unique_ptr<AlgIndex>(std::size_t scale, double radius, std::uint64_t seed)>;

// One LFMIS instance per scale of the ladder; the answer comes from the
// smallest scale whose alg fits in k.
class KCenterEngine {
 public:
  KCenterEngine(const DistanceOracle& oracle, KCenterConfig cfg);
  // cost_factor scales the reported radius (c for an approximate index).
  KCenterEngine(const DistanceOracle& oracle, KCenterConfig cfg, IndexFactory factory, double cost_factor);

  void insert(PointIndex p);
  void erase(PointIndex p);

  // Throws Infeasible if no scale fits and more than k points are active.
  KCenterSolution solution() const;
  std::optional<std::size_t> winning_scale() const;
  PointIndex membership(PointIndex p) const;
  std::vector<PointIndex> enumerate_cluster(PointIndex p) const;
  // The k+1 alg members one scale below the winner, pairwise further apart
  // than that scale. Empty when the winner is the bottom scale.
  std::vector<PointIndex> lower_bound_witness() const;

  // Rebuilds every scale with fresh ranks and indexes, replaying the active set.
  void rebuild_all();

  const ScaleLadder& ladder() const { return ladder_; }
  const LfmisInstance& instance(std::size_t scale) const { return *scales_[scale]; }
  std::size_t k() const { return cfg_.k; }
  std::size_t restarts() const { return restarts_; }
  std::uint64_t updates() const { return updates_; }
  const std::vector<std::uint32_t>& active() const { return active_.items(); }
  bool is_active(PointIndex p) const { return active_.contains(p); }
  double cost_factor() const { return cost_factor_; }

 private:
  std::unique_ptr<LfmisInstance> build(std::size_t scale);
  void enforce_budget();
  void check_active(PointIndex p, bool want) const;

  const DistanceOracle& oracle_;
  KCenterConfig cfg_;
  ScaleLadder ladder_;
  IndexFactory factory_;
  double cost_factor_;
  std::vector<std::unique_ptr<LfmisInstance>> scales_;
  std::vector<std::uint64_t> generation_;
  IndexedSet active_;
  std::uint64_t updates_ = 0;
  std::size_t restarts_ = 0;
};

}  // namespace dynclust
