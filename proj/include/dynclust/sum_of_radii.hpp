#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "dynclust/metric.hpp"
#include "dynclust/reference.hpp"
#include "dynclust/util.hpp"

namespace dynclust {

enum class OfflineSolver { kExact, kGreedy };

// Dual values are kept as integers in units of z/2, so half-tightness and
// feasibility checks are exact.
struct PdIteration {
  PointIndex center = 0;
  std::uint64_t y_units = 0;
  std::size_t half_index = 0;  // radius (half_index + 1) * z
  double primal_radius = 0.0;  // twice the half-tight radius
};

struct PdCosts {
  double sbar_lp = 0.0;  // sum over s_bar of (radius + z)
  double dual = 0.0;     // sum of y
  double stilde = 0.0;
};

struct SumRadiiSolution {
  std::size_t guess = 0;
  double opt_prime = 0.0;
  std::vector<Ball> balls;
  double cost = 0.0;  // sum of radii
  double diameter_bound() const { return 2.0 * cost; }
};

// Sum-of-radii over the given centers only. Exact branch and bound when the
// instance is small, otherwise greedy farthest-first.
std::vector<Ball> offline_solve(const std::vector<PointIndex>& centers, std::size_t k, const DistanceFn& dist,
                                OfflineSolver solver = OfflineSolver::kExact);

// Pruned pairs (center, 3 * primal radius), scanned by non-increasing primal radius.
std::vector<Ball> prune(const std::vector<PdIteration>& iterations, const DistanceFn& dist);

// Grows each offline ball by the largest s_bar radius it absorbs.
std::vector<Ball> combine(const std::vector<Ball>& s_bar, const std::vector<Ball>& s_hat, const DistanceFn& dist);

// Largest pairwise distance inside each ball's cluster, assigning every
// point to the first ball that holds it.
std::vector<double> realized_diameters(const std::vector<Ball>& balls, const std::vector<PointIndex>& points,
                                       const DistanceFn& dist);

// Primal-dual state for one guess OPT'.
class PdInstance {
 public:
  PdInstance(const DistanceOracle& oracle, std::size_t k, double eps, double opt_prime, std::uint64_t seed,
             OfflineSolver solver = OfflineSolver::kExact);

  void insert(PointIndex p);
  void erase(PointIndex p);

  bool too_small() const { return !uncovered_.empty(); }
  bool dirty() const { return dirty_; }
  double opt_prime() const { return opt_; }
  double z() const { return z_; }
  std::size_t radius_count() const { return radii_.size(); }
  std::size_t iteration_cap() const { return cap_; }
  const std::vector<PdIteration>& iterations() const { return iters_; }
  std::size_t uncovered() const { return uncovered_.size(); }
  std::uint64_t reruns() const { return reruns_; }

  // Final pairs; throws GuessTooSmall when the run hit the cap.
  const std::vector<Ball>& s_tilde();
  std::vector<Ball> s_bar() const;

  // Full scan over active points and radii with uncounted distances.
  std::size_t dual_violations() const;
  PdCosts costs();
  // Cover indices against a from-scratch recomputation. Empty when sound.
  std::string audit() const;

 private:
  static constexpr std::size_t kUncovered = static_cast<std::size_t>(-1);

  void run();
  void step();
  void rollback(std::size_t from);
  std::size_t radius_index(double d) const;  // first j with d <= radii_[j], or radii_.size()

  const DistanceOracle& oracle_;
  std::size_t k_;
  double eps_;
  double opt_;
  double z_;
  std::vector<double> radii_;
  std::vector<double> guard_;  // R extended to 2 max R
  std::size_t cap_;
  OfflineSolver solver_;
  std::mt19937_64 rng_;

  std::vector<PdIteration> iters_;
  std::unordered_map<PointIndex, std::size_t> cover_;   // active point -> covering iteration
  std::unordered_map<PointIndex, std::size_t> center_;  // center -> its iteration
  IndexedSet uncovered_;
  bool dirty_ = true;
  std::vector<Ball> s_tilde_;
  std::uint64_t reruns_ = 0;
};

struct SumRadiiConfig {
  std::size_t k = 1;
  double eps = 0.5;
  double r_min = 1.0;
  double r_max = 1.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  OfflineSolver solver = OfflineSolver::kExact;
};

// One PdInstance per guess r_min (1+eps)^i up to k * r_max; reports the
// cheapest final solution among guesses that finished.
class SumRadiiEngine {
 public:
  SumRadiiEngine(const DistanceOracle& oracle, SumRadiiConfig cfg);

  void insert(PointIndex p);
  void erase(PointIndex p);
  SumRadiiSolution solution();

  std::size_t guesses() const { return inst_.size(); }
  PdInstance& instance(std::size_t i) { return inst_[i]; }
  const std::vector<std::uint32_t>& active() const { return active_.items(); }

 private:
  const DistanceOracle& oracle_;
  SumRadiiConfig cfg_;
  std::vector<PdInstance> inst_;
  IndexedSet active_;
};

}  // namespace dynclust
