#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynclust/lfmis.hpp"
#include "dynclust/metric.hpp"

namespace dynclust {

// One complete B-ary clustering tree for a fixed guess OPT'. Leaves hold at
// most B*k points; every inner node holds the centers of its children. A node
// keeps up to k centers, blocking edges between centers and the points within
// OPT' of them, and a witness flag set when an unblocked point is left over
// with all k center slots taken.
class ClusteringTree {
 public:
  ClusteringTree(const DistanceOracle& oracle, std::size_t k, std::size_t branching, double opt_prime);

  void insert(PointIndex p);
  void erase(PointIndex p);

  std::vector<PointIndex> root_centers() const;
  bool has_witness() const;
  std::size_t witness_nodes() const;
  std::size_t levels() const { return levels_.size(); }
  std::size_t leaves() const { return levels_.front().size(); }
  std::size_t size() const { return leaf_of_.size(); }
  double opt_prime() const { return opt_; }

  // Each witness node as k+1 points pairwise further apart than OPT'.
  std::vector<std::vector<PointIndex>> witness_certificates() const;
  // Full structural check with uncounted distances. Empty string when sound.
  std::string audit() const;
  // Order-sensitive fingerprint of the whole structure.
  std::string dump() const;

 private:
  struct Entry {
    bool center = false;
    std::set<PointIndex> nbrs;  // blocked points for a center, blockers otherwise
  };
  struct Node {
    std::map<PointIndex, Entry> entries;
    std::set<PointIndex> unblocked;  // non-centers without a blocking edge
    std::size_t centers = 0;
    bool witness = false;
  };

  Node& at(std::size_t level, std::size_t i) { return levels_[level][i]; }
  bool insert_into_node(Node& n, PointIndex p);
  bool try_make_center(Node& n, PointIndex p);
  void make_center(Node& n, PointIndex p);
  std::vector<PointIndex> delete_from_node(Node& n, PointIndex p);
  std::vector<PointIndex> settle(Node& n, const std::set<PointIndex>& first);

  void insert_at_leaf(std::size_t leaf, PointIndex p);
  void delete_at_leaf(std::size_t leaf, PointIndex p);
  void add_leaf();
  void drop_last_leaf();

  const DistanceOracle& oracle_;
  std::size_t k_;
  std::size_t b_;
  double opt_;
  std::vector<std::vector<Node>> levels_;  // levels_[0] are the leaves
  std::unordered_map<PointIndex, std::size_t> leaf_of_;
};

struct TreeConfig {
  std::size_t k = 1;
  double eps = 0.5;
  double r_min = 1.0;
  double r_max = 1.0;
  std::size_t branching = 0;  // 0 picks max(2, ceil(log2(n_hint + r_max / r_min)))
  std::size_t n_hint = 1024;
};

std::size_t default_branching(std::size_t n_hint, double aspect_ratio);

struct TreeSolution {
  std::size_t guess = 0;
  double opt_prime = 0.0;
  double cost_bound = 0.0;  // levels * OPT'
  std::vector<PointIndex> centers;
};

// One tree per guess OPT' = r_min (1+eps)^i; the answer comes from the
// smallest guess whose tree has no witness anywhere.
class DetTreeEngine {
 public:
  DetTreeEngine(const DistanceOracle& oracle, TreeConfig cfg);

  void insert(PointIndex p);
  void erase(PointIndex p);
  TreeSolution solution() const;
  // Nearest root center of p, found by scanning the centers.
  PointIndex assign(PointIndex p) const;

  std::size_t branching() const { return b_; }
  std::size_t guesses() const { return trees_.size(); }
  const ClusteringTree& tree(std::size_t i) const { return trees_[i]; }
  std::size_t witness_flags() const;
  const std::set<PointIndex>& active() const { return active_; }

 private:
  const DistanceOracle& oracle_;
  TreeConfig cfg_;
  std::size_t b_;
  ScaleLadder ladder_;
  std::vector<ClusteringTree> trees_;
  std::set<PointIndex> active_;
};

}  // namespace dynclust
