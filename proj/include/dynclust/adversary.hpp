#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynclust/expr.hpp"
#include "dynclust/metric.hpp"

namespace dynclust {

enum class VertexLabel : std::uint8_t { kOpen, kClosed, kOff };

struct RecordedAnswer {
  PointIndex a = 0;
  PointIndex b = 0;
  std::uint32_t value = 0;
  std::uint64_t t = 0;
};

struct AdversaryUpdate {
  UpdateOp::Kind kind = UpdateOp::Kind::kInsert;
  PointIndex vertex = 0;
  std::uint64_t t = 0;
  bool clean = true;  // no closed vertex after the update
};

// Budget function f(k, n), clamped below at 1.
using BudgetFn = std::function<double(double k, double n)>;

// Metric-adaptive adversary. Points are graph vertices; every answer is the
// unit-length shortest path in the recorded graph plus all open-open edges.
class AdversaryState {
 public:
  AdversaryState(std::size_t k, BudgetFn f, bool enforce_budget = true);

  // Deletes the lowest-id closed vertex if there is one, else inserts a new vertex.
  AdversaryUpdate generate_update();
  // Throws UnknownPoint for vertices never created and BudgetExceeded when
  // the running total passes the sum of f(k, n_i) over updates so far.
  std::uint32_t answer(PointIndex a, PointIndex b);

  double f(double n) const;
  double close_threshold() const { return 100.0 * f(static_cast<double>(t_)); }

  std::uint64_t t() const { return t_; }
  std::size_t vertices() const { return labels_.size(); }
  VertexLabel label(PointIndex v) const { return labels_[v]; }
  const std::vector<PointIndex>& neighbors(PointIndex v) const { return adj_[v]; }
  std::size_t degree(PointIndex v) const { return adj_[v].size(); }
  bool has_edge(PointIndex a, PointIndex b) const;
  std::size_t open_count() const { return open_; }
  std::size_t closed_count() const { return closed_.size(); }
  std::size_t current() const { return open_ + closed_.size(); }
  bool clean() const { return closed_.empty(); }
  std::uint64_t queries() const { return queries_; }
  double budget() const { return budget_; }
  const std::vector<RecordedAnswer>& answers() const { return answers_; }
  const std::vector<std::uint64_t>& clean_ops() const { return clean_ops_; }
  std::size_t semi_open() const { return semi_open_; }
  std::size_t repairs() const { return repairs_; }
  // Updates after which fewer than 92t/100 vertices were open.
  std::size_t open_fraction_violations() const { return open_violations_; }
  // Vertices whose degree passed 100 f + 1.
  std::size_t degree_violations() const { return degree_violations_; }
  // Times the repair edge had no open endpoint of degree at most 50 f.
  std::size_t repair_donor_misses() const { return donor_misses_; }
  std::size_t k() const { return k_; }

 private:
  void add_edge(PointIndex a, PointIndex b);
  void relabel(PointIndex v);
  std::vector<std::uint32_t> bfs(PointIndex src) const;

  std::size_t k_;
  BudgetFn f_;
  bool enforce_;
  std::uint64_t t_ = 0;
  std::vector<VertexLabel> labels_;
  std::vector<std::vector<PointIndex>> adj_;
  std::unordered_set<std::uint64_t> edges_;
  std::vector<bool> semi_;
  std::set<PointIndex> closed_;
  std::size_t open_ = 0;
  std::uint64_t queries_ = 0;
  double budget_ = 0.0;
  std::vector<RecordedAnswer> answers_;
  std::vector<std::uint64_t> clean_ops_;
  std::size_t semi_open_ = 0;
  std::size_t repairs_ = 0;
  std::size_t open_violations_ = 0;
  std::size_t degree_violations_ = 0;
  std::size_t donor_misses_ = 0;
};

// Metric front-end so engines can run against the adversary unchanged.
// Single-threaded: every distance call mutates the adversary.
class AdversaryMetric : public Metric {
 public:
  explicit AdversaryMetric(std::shared_ptr<AdversaryState> state) : state_(std::move(state)) {}
  MetricKind kind() const override { return MetricKind::kAdversary; }
  PointIndex add_point(std::span<const double> payload) override;
  std::size_t size() const override { return state_->vertices(); }
  double distance(PointIndex a, PointIndex b) const override { return state_->answer(a, b); }
  AdversaryState& state() const { return *state_; }

 private:
  std::shared_ptr<AdversaryState> state_;
};

enum class ConsistentKind { kUniform, kStar, kRange, kMulti };

struct ConsistentSpec {
  ConsistentKind kind = ConsistentKind::kUniform;
  PointIndex p_star = 0;            // star and range
  std::uint32_t l1 = 0, l2 = 0;     // range: merge layers <= l1 and >= l2
  std::vector<PointIndex> sources;  // multi
  std::uint32_t ell = 0;            // multi
};

// Shortest-path metric of the recorded graph plus extra unit edges between
// open vertices. Open vertices are grouped (whole clique, BFS layers from
// p*, or the far set of the multi-source variant) and groups are linked
// implicitly, so no clique is ever materialised.
class ConsistentMetric {
 public:
  static constexpr std::uint32_t kFar = static_cast<std::uint32_t>(-1);

  // Throws NotCleanOperation if a closed vertex exists.
  ConsistentMetric(const AdversaryState& state, ConsistentSpec spec);

  std::vector<std::uint32_t> distances_from(const std::vector<PointIndex>& sources) const;
  std::uint32_t distance(PointIndex a, PointIndex b) const;
  bool adjacent(PointIndex a, PointIndex b) const;
  // BFS layer from p* for open vertices (star and range), kFar otherwise.
  std::uint32_t layer(PointIndex v) const { return layer_[v]; }
  std::uint32_t max_layer() const { return max_layer_; }
  std::size_t connectors() const { return connectors_; }

  struct Report {
    std::size_t checked = 0;
    std::size_t failed = 0;
  };
  // Recomputes every recorded answer. Unit answers only need an edge check.
  Report verify(const std::vector<RecordedAnswer>& answers) const;

 private:
  static constexpr std::uint32_t kNoGroup = static_cast<std::uint32_t>(-1);

  bool groups_linked(std::uint32_t g, std::uint32_t h) const;
  std::vector<std::uint32_t> linked_groups(std::uint32_t g) const;

  const AdversaryState& s_;
  ConsistentSpec spec_;
  std::vector<std::vector<PointIndex>> extra_;  // connector edges
  std::unordered_set<std::uint64_t> extra_set_;
  std::vector<std::uint32_t> group_;            // open vertex -> group
  std::vector<std::vector<PointIndex>> members_;
  std::vector<std::uint32_t> layer_;
  std::uint32_t max_layer_ = 0;
  std::size_t connectors_ = 0;
};

// Algorithm interface for the gauntlet.
class GauntletAlgorithm {
 public:
  virtual ~GauntletAlgorithm() = default;
  virtual void insert(PointIndex p) = 0;
  virtual void erase(PointIndex p) = 0;
  virtual std::vector<PointIndex> centers() = 0;
  // The algorithm's own upper bound on its objective.
  virtual double reported_value() = 0;
};

// "diameter": one anchor, each new point queried against it, reports twice
// the largest answer. "all-pairs": queries every new point against every
// active one. "det-tree": the deterministic clustering tree.
std::unique_ptr<GauntletAlgorithm> make_gauntlet_algorithm(const std::string& name, const DistanceOracle& oracle,
                                                           std::size_t k, double eps, std::size_t ops);

struct GauntletConfig {
  std::string algo = "diameter";
  std::size_t k = 1;
  std::string budget = "4";
  std::uint64_t ops = 256;
  double eps = 0.5;
  bool enforce_budget = true;
  bool verify_answers = true;
};

struct CleanReport {
  std::uint64_t t = 0;
  std::size_t n = 0;
  std::size_t open = 0;
  std::size_t off = 0;
  std::uint64_t queries = 0;
  double budget = 0.0;
  std::size_t answers = 0;
  std::size_t uni_failed = 0;
  std::size_t star_failed = 0;
  bool verified = false;
  double reported = 0.0;
  std::vector<PointIndex> centers;
  double cost_uni = 0.0;
  double cost_star = 0.0;
  std::uint32_t gap = 0;  // eccentricity of the first center under M_star
  // Filled on the power-of-two schedule only.
  bool detailed = false;
  double range_ratio = 0.0;
};

struct GauntletResult {
  std::vector<CleanReport> clean;
  std::uint64_t ops_done = 0;
  bool budget_exceeded = false;
  std::string error;
  std::size_t open_fraction_violations = 0;
  std::size_t degree_violations = 0;
  std::size_t missing_clean_windows = 0;
  std::size_t answers_checked = 0;
  std::size_t answers_failed = 0;
  std::uint32_t max_gap = 0;
  std::uint32_t final_gap = 0;
};

GauntletResult run_gauntlet(const GauntletConfig& cfg, const std::function<void(const CleanReport&)>& sink = {});

// Number of t in [1, T/2] with no clean operation in (t, 2t].
std::size_t missing_clean_windows(const std::vector<std::uint64_t>& clean_ops, std::uint64_t total);

struct PlantedInstance {
  std::size_t n = 0;
  std::size_t k = 0;
  double R = 0.0;
  int coin = 0;
  std::size_t planted = 0;
  std::vector<std::size_t> bucket;
  std::vector<std::vector<double>> rows;
  double opt_upper = 0.0;
  double opt_lower = 0.0;
  bool buckets_at_least_two = false;
};

// Random h: [n] -> [k]; distance 1 inside a bucket and R across. With coin 1
// the unit entries in the planted row and column become 2R.
PlantedInstance generate_planted(std::size_t n, std::size_t k, double R, std::uint64_t seed, int coin = -1);

// Exhaustive triangle check over all ordered triples.
std::size_t triangle_violations(const std::vector<std::vector<double>>& rows);

}  // namespace dynclust
