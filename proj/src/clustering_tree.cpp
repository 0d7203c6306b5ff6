#include "dynclust/clustering_tree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynclust {

ClusteringTree::ClusteringTree(const DistanceOracle& oracle, std::size_t k, std::size_t branching, double opt_prime)
    : oracle_(oracle), k_(k), b_(branching), opt_(opt_prime) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (branching < 2) throw Error(ErrorCode::kInvalidArgument, "branching factor must be at least 2");
  levels_.emplace_back();
  levels_[0].emplace_back();
}

void ClusteringTree::make_center(Node& n, PointIndex p) {
  Entry& e = n.entries.at(p);
  e.center = true;
  n.unblocked.erase(p);
  ++n.centers;
  for (auto& [q, eq] : n.entries) {
    if (q == p || eq.center) continue;
    if (oracle_(p, q) <= opt_) {
      e.nbrs.insert(q);
      eq.nbrs.insert(p);
      n.unblocked.erase(q);
    }
  }
  n.witness = !n.unblocked.empty();
}

bool ClusteringTree::try_make_center(Node& n, PointIndex p) {
  Entry& e = n.entries.at(p);
  if (e.center || !e.nbrs.empty()) return false;
  if (n.centers < k_) {
    make_center(n, p);
    return true;
  }
  n.unblocked.insert(p);
  n.witness = true;
  return false;
}

bool ClusteringTree::insert_into_node(Node& n, PointIndex p) {
  Entry fresh;
  for (auto& [c, ec] : n.entries) {
    if (!ec.center) continue;
    if (oracle_(c, p) <= opt_) {
      fresh.nbrs.insert(c);
      ec.nbrs.insert(p);
    }
  }
  n.entries.emplace(p, std::move(fresh));
  return try_make_center(n, p);
}

std::vector<PointIndex> ClusteringTree::settle(Node& n, const std::set<PointIndex>& first) {
  std::vector<PointIndex> promoted;
  for (PointIndex q : first) {
    if (n.centers >= k_) break;
    auto it = n.entries.find(q);
    if (it == n.entries.end() || it->second.center || !it->second.nbrs.empty()) continue;
    make_center(n, q);
    promoted.push_back(q);
  }
  // Points left unblocked by an earlier delete also get a slot. Without this
  // the witness flag can outlive its witness.
  while (n.centers < k_ && !n.unblocked.empty()) {
    PointIndex q = *n.unblocked.begin();
    make_center(n, q);
    promoted.push_back(q);
  }
  n.witness = !n.unblocked.empty();
  std::sort(promoted.begin(), promoted.end());
  return promoted;
}

std::vector<PointIndex> ClusteringTree::delete_from_node(Node& n, PointIndex p) {
  auto it = n.entries.find(p);
  if (it == n.entries.end()) return {};
  Entry e = std::move(it->second);
  n.entries.erase(it);
  n.unblocked.erase(p);
  if (!e.center) {
    for (PointIndex c : e.nbrs) n.entries.at(c).nbrs.erase(p);
    n.witness = !n.unblocked.empty();
    return {};
  }
  --n.centers;
  for (PointIndex q : e.nbrs) {
    Entry& eq = n.entries.at(q);
    eq.nbrs.erase(p);
    if (eq.nbrs.empty()) n.unblocked.insert(q);
  }
  return settle(n, e.nbrs);
}

void ClusteringTree::insert_at_leaf(std::size_t leaf, PointIndex p) {
  leaf_of_[p] = leaf;
  std::size_t level = 0;
  std::size_t idx = leaf;
  for (;;) {
    bool became = insert_into_node(at(level, idx), p);
    if (!became || level + 1 == levels_.size()) break;
    ++level;
    idx /= b_;
  }
}

void ClusteringTree::delete_at_leaf(std::size_t leaf, PointIndex p) {
  std::size_t level = 0;
  std::size_t idx = leaf;
  std::vector<PointIndex> cen;
  for (;;) {
    auto promoted = delete_from_node(at(level, idx), p);
    cen.insert(cen.end(), promoted.begin(), promoted.end());
    if (level + 1 == levels_.size()) break;
    std::sort(cen.begin(), cen.end());
    std::vector<PointIndex> next;
    Node& parent = at(level + 1, idx / b_);
    for (PointIndex v : cen) {
      if (insert_into_node(parent, v)) next.push_back(v);
    }
    cen = std::move(next);
    ++level;
    idx /= b_;
  }
  leaf_of_.erase(p);
}

void ClusteringTree::add_leaf() {
  levels_[0].emplace_back();
  for (std::size_t j = 1;; ++j) {
    std::size_t below = levels_[j - 1].size();
    if (j == levels_.size()) {
      if (below == 1) break;
      // Grow a new root above the old one; it starts with the old root's centers.
      levels_.emplace_back();
      levels_[j].emplace_back();
      std::vector<PointIndex> carried;
      for (const auto& [q, e] : levels_[j - 1][0].entries) {
        if (e.center) carried.push_back(q);
      }
      for (PointIndex q : carried) insert_into_node(levels_[j][0], q);
    }
    std::size_t need = (below + b_ - 1) / b_;
    while (levels_[j].size() < need) levels_[j].emplace_back();
  }
}

void ClusteringTree::drop_last_leaf() {
  levels_[0].pop_back();
  for (std::size_t j = 1; j < levels_.size(); ++j) {
    std::size_t need = (levels_[j - 1].size() + b_ - 1) / b_;
    while (levels_[j].size() > need) levels_[j].pop_back();
  }
  // A root with a single child holds exactly that child's centers.
  while (levels_.size() > 1 && levels_[levels_.size() - 2].size() == 1) levels_.pop_back();
}

void ClusteringTree::insert(PointIndex p) {
  if (leaf_of_.count(p)) throw Error(ErrorCode::kDuplicateInsert, "point " + std::to_string(p));
  if (levels_[0].back().entries.size() >= b_ * k_) add_leaf();
  insert_at_leaf(levels_[0].size() - 1, p);
}

void ClusteringTree::erase(PointIndex p) {
  auto it = leaf_of_.find(p);
  if (it == leaf_of_.end()) throw Error(ErrorCode::kDeleteOfInactive, "point " + std::to_string(p));
  std::size_t leaf = it->second;
  std::size_t last = levels_[0].size() - 1;
  delete_at_leaf(leaf, p);
  if (leaf != last) {
    // Refill from the right-most leaf: fewest blocking edges, then smallest id.
    const Node& donor_leaf = levels_[0][last];
    PointIndex donor = kNoPoint;
    std::size_t best = static_cast<std::size_t>(-1);
    for (const auto& [q, e] : donor_leaf.entries) {
      if (e.nbrs.size() < best) best = e.nbrs.size(), donor = q;
    }
    delete_at_leaf(last, donor);
    insert_at_leaf(leaf, donor);
  }
  if (levels_[0].size() > 1 && levels_[0].back().entries.empty()) drop_last_leaf();
}

std::vector<PointIndex> ClusteringTree::root_centers() const {
  std::vector<PointIndex> out;
  for (const auto& [q, e] : levels_.back()[0].entries) {
    if (e.center) out.push_back(q);
  }
  return out;
}

std::size_t ClusteringTree::witness_nodes() const {
  std::size_t count = 0;
  for (const auto& level : levels_)
    for (const auto& n : level) count += n.witness ? 1 : 0;
  return count;
}

bool ClusteringTree::has_witness() const { return witness_nodes() > 0; }

std::vector<std::vector<PointIndex>> ClusteringTree::witness_certificates() const {
  std::vector<std::vector<PointIndex>> out;
  for (const auto& level : levels_) {
    for (const auto& n : level) {
      if (!n.witness) continue;
      std::vector<PointIndex> cert;
      for (const auto& [q, e] : n.entries) {
        if (e.center) cert.push_back(q);
      }
      if (!n.unblocked.empty()) cert.push_back(*n.unblocked.begin());
      out.push_back(std::move(cert));
    }
  }
  return out;
}

std::string ClusteringTree::audit() const {
  const Metric& m = oracle_.metric();
  std::ostringstream err;
  std::size_t total = 0;
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    if (j > 0) {
      std::size_t need = (levels_[j - 1].size() + b_ - 1) / b_;
      if (levels_[j].size() != need) err << "level " << j << " has " << levels_[j].size() << " nodes\n";
    }
    for (std::size_t i = 0; i < levels_[j].size(); ++i) {
      const Node& n = levels_[j][i];
      if (n.entries.size() > b_ * k_) err << "node " << j << "/" << i << " over capacity\n";
      std::size_t centers = 0;
      std::set<PointIndex> unblocked;
      for (const auto& [q, e] : n.entries) {
        if (e.center) {
          ++centers;
          for (const auto& [r, er] : n.entries) {
            if (r == q) continue;
            bool close = m.distance(q, r) <= opt_;
            if (er.center) {
              if (close) err << "centers " << q << "," << r << " within OPT'\n";
              continue;
            }
            if (close != (e.nbrs.count(r) > 0) || close != (er.nbrs.count(q) > 0)) {
              err << "blocking edge " << q << "-" << r << " wrong\n";
            }
          }
        } else if (e.nbrs.empty()) {
          unblocked.insert(q);
        }
      }
      if (centers != n.centers || centers > k_) err << "node " << j << "/" << i << " center count\n";
      if (unblocked != n.unblocked) err << "node " << j << "/" << i << " unblocked set\n";
      if (n.witness != !unblocked.empty()) err << "node " << j << "/" << i << " witness flag\n";
      if (!unblocked.empty() && centers != k_) err << "node " << j << "/" << i << " unblocked with a free slot\n";
      if (j == 0) {
        total += n.entries.size();
        if (i + 1 < levels_[0].size() && n.entries.size() != b_ * k_) err << "leaf " << i << " not full\n";
        for (const auto& [q, e] : n.entries) {
          auto it = leaf_of_.find(q);
          if (it == leaf_of_.end() || it->second != i) err << "leaf map for " << q << "\n";
        }
      } else {
        std::set<PointIndex> expect;
        for (std::size_t c = i * b_; c < std::min((i + 1) * b_, levels_[j - 1].size()); ++c) {
          for (const auto& [q, e] : levels_[j - 1][c].entries) {
            if (e.center) expect.insert(q);
          }
        }
        std::set<PointIndex> have;
        for (const auto& [q, e] : n.entries) have.insert(q);
        if (have != expect) err << "node " << j << "/" << i << " does not hold its children's centers\n";
      }
    }
  }
  if (levels_.back().size() != 1) err << "top level is not a single root\n";
  if (levels_.size() > 1 && levels_[levels_.size() - 2].size() < 2) err << "root with one child\n";
  if (total != leaf_of_.size()) err << "leaf population mismatch\n";
  return err.str();
}

std::string ClusteringTree::dump() const {
  std::ostringstream out;
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    for (std::size_t i = 0; i < levels_[j].size(); ++i) {
      const Node& n = levels_[j][i];
      out << j << '/' << i << (n.witness ? " W" : "") << ':';
      for (const auto& [q, e] : n.entries) {
        out << ' ' << q << (e.center ? "*" : "") << '[';
        for (PointIndex r : e.nbrs) out << r << ',';
        out << ']';
      }
      out << '\n';
    }
  }
  return out.str();
}

std::size_t default_branching(std::size_t n_hint, double aspect_ratio) {
  double v = std::ceil(std::log2(static_cast<double>(n_hint) + std::max(1.0, aspect_ratio)));
  return std::max<std::size_t>(2, static_cast<std::size_t>(v));
}

DetTreeEngine::DetTreeEngine(const DistanceOracle& oracle, TreeConfig cfg)
    : oracle_(oracle),
      cfg_(cfg),
      b_(cfg.branching ? cfg.branching : default_branching(cfg.n_hint, cfg.r_max / cfg.r_min)),
      ladder_(cfg.r_min, cfg.r_max, 1.0 + cfg.eps) {
  trees_.reserve(ladder_.size());
  for (double g : ladder_.scales()) trees_.emplace_back(oracle, cfg.k, b_, g);
}

void DetTreeEngine::insert(PointIndex p) {
  if (!active_.insert(p).second) throw Error(ErrorCode::kDuplicateInsert, "point " + std::to_string(p));
  for (auto& t : trees_) t.insert(p);
}

void DetTreeEngine::erase(PointIndex p) {
  if (!active_.erase(p)) throw Error(ErrorCode::kDeleteOfInactive, "point " + std::to_string(p));
  for (auto& t : trees_) t.erase(p);
}

TreeSolution DetTreeEngine::solution() const {
  TreeSolution sol;
  if (active_.empty()) return sol;
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    if (trees_[i].has_witness()) continue;
    sol.guess = i;
    sol.opt_prime = ladder_[i];
    sol.cost_bound = static_cast<double>(trees_[i].levels()) * ladder_[i];
    sol.centers = trees_[i].root_centers();
    // Every active point is a root center.
    if (sol.centers.size() == active_.size()) sol.cost_bound = 0.0;
    return sol;
  }
  throw Error(ErrorCode::kInfeasible, "every guess has a witness; raise r_max");
}

PointIndex DetTreeEngine::assign(PointIndex p) const {
  auto centers = solution().centers;
  PointIndex best = kNoPoint;
  double bd = 0;
  for (PointIndex c : centers) {
    double d = oracle_(p, c);
    if (best == kNoPoint || d < bd) best = c, bd = d;
  }
  return best;
}

std::size_t DetTreeEngine::witness_flags() const {
  std::size_t n = 0;
  for (const auto& t : trees_) n += t.has_witness() ? 1 : 0;
  return n;
}

}  // namespace dynclust
