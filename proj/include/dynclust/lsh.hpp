#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dynclust/kcenter.hpp"
#include "dynclust/lfmis.hpp"
#include "dynclust/metric.hpp"

namespace dynclust {

enum class LshFamilyKind { kPStableL2, kPStableL1, kBitSampleHamming, kMinHashJaccard };

const char* lsh_family_name(LshFamilyKind kind);
LshFamilyKind family_for(const Metric& metric);

struct LshParams {
  double p1 = 0;
  double p2 = 0;
  double rho = 0;
  std::size_t t = 1;  // hash functions concatenated per table
  std::size_t s = 1;  // tables
};

// t = ceil(2 log_{1/p2} n), s = ceil(ln(n^2/delta) n^{2 rho} / p1).
LshParams lsh_params(double p1, double p2, std::size_t n, double delta);

// Single-function collision probability of floor((a.x + b)/w) at distance d,
// by quadrature over the stable density.
double pstable_collision(double d, double w, bool gaussian);
// Closed forms of the same integrals, kept for cross-checking.
double pstable_collision_closed(double d, double w, bool gaussian);

// A sampled (H, t, s): s independent tables, each concatenating t draws
// from one LSH family.
class HashFamily {
 public:
  virtual ~HashFamily() = default;
  virtual LshFamilyKind kind() const = 0;
  // Probability that one draw collides on a pair at distance d.
  virtual double collision(double d) const = 0;
  virtual std::uint64_t key(std::size_t table, PointIndex v) const = 0;

  void keys(PointIndex v, std::vector<std::uint64_t>& out) const;
  const LshParams& params() const { return params_; }
  double r() const { return r_; }
  double c() const { return c_; }

 protected:
  LshParams params_;
  double r_ = 0;
  double c_ = 1;
};

// Throws RadiusOutOfRange when (r, c) has no usable p2 for this family, and
// UnsupportedMetric when the metric has no family.
std::unique_ptr<HashFamily> sample_family(const Metric& metric, double r, double c, std::size_t n, double delta,
                                          std::uint64_t seed);

// Bucket contents ordered by rank; every node carries its subtree size.
class RankTree {
 public:
  void insert(Rank r, PointIndex v);
  bool erase(Rank r);
  std::size_t size() const { return root_ < 0 ? 0 : nodes_[root_].count; }
  bool empty() const { return root_ < 0; }
  // In-order walk; fn returns false to stop.
  template <typename Fn>
  void visit(Fn&& fn) const {
    walk(root_, fn);
  }
  // Checks search order, heap order and every subtree counter.
  bool audit() const;

 private:
  struct Node {
    Rank key;
    PointIndex v;
    std::uint64_t prio;
    std::uint32_t count;
    int left;
    int right;
  };

  template <typename Fn>
  bool walk(int n, Fn& fn) const {
    if (n < 0) return true;
    if (!walk(nodes_[n].left, fn)) return false;
    if (!fn(nodes_[n].key, nodes_[n].v)) return false;
    return walk(nodes_[n].right, fn);
  }
  std::uint32_t count(int n) const { return n < 0 ? 0 : nodes_[n].count; }
  void pull(int n) { nodes_[n].count = 1 + count(nodes_[n].left) + count(nodes_[n].right); }
  int merge(int a, int b);
  void split(int n, Rank key, int& lo, int& hi);  // lo < key <= hi
  std::uint32_t audit_node(int n, Rank lo, Rank hi, bool& ok) const;

  std::vector<Node> nodes_;
  std::vector<int> free_;
  int root_ = -1;
};

// AlgIndex answering from hash buckets: u and v are adjacent when they share
// a bucket in some table and d(u, v) <= filter radius.
class LshIndex : public AlgIndex {
 public:
  LshIndex(std::unique_ptr<HashFamily> family, const DistanceOracle& oracle, double filter_radius);

  void add(PointIndex v, Rank r) override;
  void remove(PointIndex v, Rank r) override;
  std::optional<PointIndex> top(PointIndex v) override;
  std::vector<PointIndex> all_from(PointIndex v, Rank from) override;
  std::uint64_t edge_queries() const override { return queries_; }

  // Candidates sharing a bucket with v, deduplicated, in rank order.
  std::vector<std::pair<Rank, PointIndex>> candidates(PointIndex v);
  bool audit() const;
  std::size_t members() const { return members_.size(); }
  const HashFamily& family() const { return *family_; }

 private:
  const std::vector<std::uint64_t>& keys_of(PointIndex v);

  std::unique_ptr<HashFamily> family_;
  const DistanceOracle& oracle_;
  double filter_;
  std::vector<std::unordered_map<std::uint64_t, RankTree>> tables_;
  std::unordered_map<PointIndex, std::pair<Rank, std::vector<std::uint64_t>>> members_;
  PointIndex cached_v_ = kNoPoint;
  std::vector<std::uint64_t> cached_keys_;
  std::uint64_t queries_ = 0;
};

struct LshKCenterConfig {
  KCenterConfig base;
  double c = 2.0;
  double delta = 0.1;
};

// k-center over the approximate threshold graphs. Hashes and ranks are
// redrawn whenever the active set outgrows the current size bound and at
// greedy checkpoints spaced half the active size apart.
class LshKCenterEngine {
 public:
  LshKCenterEngine(const DistanceOracle& oracle, LshKCenterConfig cfg);

  void insert(PointIndex p);
  void erase(PointIndex p);
  KCenterSolution solution() const { return engine_->solution(); }
  PointIndex membership(PointIndex p) const { return engine_->membership(p); }
  std::vector<PointIndex> enumerate_cluster(PointIndex p) const { return engine_->enumerate_cluster(p); }

  const KCenterEngine& engine() const { return *engine_; }
  std::size_t epochs() const { return epochs_; }
  std::size_t size_bound() const { return bound_; }
  // Scales that fell back to exact scanning because no family fits.
  std::size_t exact_scales() const { return exact_scales_.load(); }

 private:
  std::unique_ptr<AlgIndex> make_index(double radius, std::uint64_t seed);
  void after_update();
  void new_epoch();

  const DistanceOracle& oracle_;
  LshKCenterConfig cfg_;
  std::unique_ptr<KCenterEngine> engine_;
  std::size_t bound_ = 2;
  std::size_t scale_count_ = 1;
  std::uint64_t t_ = 0;
  std::uint64_t checkpoint_t_ = 0;
  std::size_t checkpoint_n_ = 0;
  std::size_t epochs_ = 1;
  std::atomic<std::size_t> exact_scales_{0};
};

}  // namespace dynclust
