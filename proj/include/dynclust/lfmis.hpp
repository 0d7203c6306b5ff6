#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <unordered_set>
#include <vector>

#include "dynclust/metric.hpp"

namespace dynclust {

using Rank = std::uint64_t;
using EdgePredicate = std::function<bool(PointIndex, PointIndex)>;

inline constexpr PointIndex kNoPoint = static_cast<PointIndex>(-1);

// Neighbourhood queries against the current alg members. The exact variant
// scans members in rank order; the LSH variant answers from hash buckets.
class AlgIndex {
 public:
  virtual ~AlgIndex() = default;
  virtual void add(PointIndex v, Rank r) = 0;
  virtual void remove(PointIndex v, Rank r) = 0;
  // Smallest-rank member adjacent to v.
  virtual std::optional<PointIndex> top(PointIndex v) = 0;
  // All members adjacent to v with rank >= from, in rank order. Callers pass
  // the rank of a neighbour already returned by top(), so nothing below it
  // is adjacent.
  virtual std::vector<PointIndex> all_from(PointIndex v, Rank from) = 0;
  virtual std::uint64_t edge_queries() const = 0;
};

class ScanIndex : public AlgIndex {
 public:
  explicit ScanIndex(EdgePredicate edge) : edge_(std::move(edge)) {}

  void add(PointIndex v, Rank r) override { members_.emplace(r, v); }
  void remove(PointIndex, Rank r) override { members_.erase(r); }
  std::optional<PointIndex> top(PointIndex v) override;
  std::vector<PointIndex> all_from(PointIndex v, Rank from) override;
  std::uint64_t edge_queries() const override { return queries_; }

 private:
  EdgePredicate edge_;
  std::map<Rank, PointIndex> members_;
  std::uint64_t queries_ = 0;
};

struct LfmisCounters {
  std::uint64_t queue_insertions = 0;
  std::uint64_t queue_pops = 0;
  std::uint64_t leader_changes = 0;      // followers detached from a leader
  std::uint64_t overflow_evictions = 0;  // alg max pushed out at size k+2
  std::uint64_t insert_calls = 0;
};

// Top-(k+1) lexicographically first maximal independent set under random
// ranks, with leader/follower bookkeeping and a rank-ordered pending queue.
class LfmisInstance {
 public:
  enum class Role : std::uint8_t { kAbsent, kAlg, kQueued, kFollower };

  LfmisInstance(std::size_t k, std::uint64_t seed, std::unique_ptr<AlgIndex> index);

  void insert(PointIndex v);
  void erase(PointIndex v);

  std::size_t k() const { return k_; }
  std::size_t alg_size() const { return alg_.size(); }
  std::size_t queue_size() const { return queue_.size(); }
  std::vector<PointIndex> alg() const;    // rank order
  std::vector<PointIndex> queue() const;  // rank order
  std::optional<Rank> max_alg_rank() const;

  Role role(PointIndex v) const { return v < nodes_.size() ? nodes_[v].role : Role::kAbsent; }
  bool contains(PointIndex v) const { return role(v) != Role::kAbsent; }
  Rank rank(PointIndex v) const;
  std::optional<PointIndex> leader(PointIndex v) const;
  const std::vector<PointIndex>& followers(PointIndex v) const;
  // v itself when it is in alg, its leader when that leader is in alg.
  std::optional<PointIndex> center_of(PointIndex v) const;

  const LfmisCounters& counters() const { return counters_; }
  std::uint64_t edge_queries() const { return index_->edge_queries(); }
  // Elementary operations: queue pushes and pops plus edge queries.
  std::uint64_t ops() const { return counters_.queue_insertions + counters_.queue_pops + edge_queries(); }

 private:
  struct Node {
    Rank rank = 0;
    Role role = Role::kAbsent;
    PointIndex leader = kNoPoint;
    std::uint32_t slot = 0;  // position inside the leader's follower list
    std::vector<PointIndex> followers;
  };

  Node& node(PointIndex v);
  Rank draw_rank();
  void insert_step(PointIndex v);
  void drain();
  void enqueue(PointIndex v);
  void release_followers(PointIndex v);
  void attach(PointIndex follower, PointIndex leader);
  void detach(PointIndex follower);
  void add_to_alg(PointIndex v);
  void remove_from_alg(PointIndex v);

  std::size_t k_;
  std::mt19937_64 rng_;
  std::unique_ptr<AlgIndex> index_;
  std::vector<Node> nodes_;
  std::unordered_set<Rank> used_ranks_;
  std::map<Rank, PointIndex> alg_;
  std::set<std::pair<Rank, PointIndex>> queue_;
  LfmisCounters counters_;
};

}  // namespace dynclust
