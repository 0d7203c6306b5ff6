#include "dynclust/lfmis.hpp"

namespace dynclust {

std::optional<PointIndex> ScanIndex::top(PointIndex v) {
  for (const auto& [r, u] : members_) {
    ++queries_;
    if (edge_(v, u)) return u;
  }
  return std::nullopt;
}

std::vector<PointIndex> ScanIndex::all_from(PointIndex v, Rank from) {
  std::vector<PointIndex> out;
  auto it = members_.find(from);
  if (it != members_.end()) {
    // Already known to be adjacent.
    out.push_back(it->second);
    ++it;
  } else {
    it = members_.lower_bound(from);
  }
  for (; it != members_.end(); ++it) {
    ++queries_;
    if (edge_(v, it->second)) out.push_back(it->second);
  }
  return out;
}

LfmisInstance::LfmisInstance(std::size_t k, std::uint64_t seed, std::unique_ptr<AlgIndex> index)
    : k_(k), rng_(seed), index_(std::move(index)) {}

LfmisInstance::Node& LfmisInstance::node(PointIndex v) {
  if (v >= nodes_.size()) nodes_.resize(static_cast<std::size_t>(v) + 1);
  return nodes_[v];
}

Rank LfmisInstance::draw_rank() {
  for (;;) {
    Rank r = rng_();
    if (used_ranks_.insert(r).second) return r;
  }
}

Rank LfmisInstance::rank(PointIndex v) const {
  if (!contains(v)) throw Error(ErrorCode::kUnknownPoint, "rank of absent vertex");
  return nodes_[v].rank;
}

std::optional<PointIndex> LfmisInstance::leader(PointIndex v) const {
  if (!contains(v) || nodes_[v].leader == kNoPoint) return std::nullopt;
  return nodes_[v].leader;
}

const std::vector<PointIndex>& LfmisInstance::followers(PointIndex v) const {
  static const std::vector<PointIndex> kEmpty;
  return contains(v) ? nodes_[v].followers : kEmpty;
}

std::optional<PointIndex> LfmisInstance::center_of(PointIndex v) const {
  switch (role(v)) {
    case Role::kAlg: return v;
    case Role::kFollower: {
      PointIndex l = nodes_[v].leader;
      if (role(l) == Role::kAlg) return l;
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

std::vector<PointIndex> LfmisInstance::alg() const {
  std::vector<PointIndex> out;
  out.reserve(alg_.size());
  for (const auto& [r, v] : alg_) out.push_back(v);
  return out;
}

std::vector<PointIndex> LfmisInstance::queue() const {
  std::vector<PointIndex> out;
  out.reserve(queue_.size());
  for (const auto& [r, v] : queue_) out.push_back(v);
  return out;
}

std::optional<Rank> LfmisInstance::max_alg_rank() const {
  if (alg_.empty()) return std::nullopt;
  return alg_.rbegin()->first;
}

void LfmisInstance::enqueue(PointIndex v) {
  Node& n = nodes_[v];
  n.role = Role::kQueued;
  n.leader = kNoPoint;
  queue_.emplace(n.rank, v);
  ++counters_.queue_insertions;
}

void LfmisInstance::release_followers(PointIndex v) {
  std::vector<PointIndex> fs;
  fs.swap(nodes_[v].followers);
  for (PointIndex f : fs) {
    ++counters_.leader_changes;
    enqueue(f);
  }
}

void LfmisInstance::attach(PointIndex follower, PointIndex leader) {
  Node& f = nodes_[follower];
  Node& l = nodes_[leader];
  f.role = Role::kFollower;
  f.leader = leader;
  f.slot = static_cast<std::uint32_t>(l.followers.size());
  l.followers.push_back(follower);
}

void LfmisInstance::detach(PointIndex follower) {
  Node& f = nodes_[follower];
  auto& list = nodes_[f.leader].followers;
  PointIndex moved = list.back();
  list[f.slot] = moved;
  nodes_[moved].slot = f.slot;
  list.pop_back();
  f.leader = kNoPoint;
}

void LfmisInstance::add_to_alg(PointIndex v) {
  Node& n = nodes_[v];
  n.role = Role::kAlg;
  n.leader = kNoPoint;
  alg_.emplace(n.rank, v);
  index_->add(v, n.rank);
}

void LfmisInstance::remove_from_alg(PointIndex v) {
  Rank r = nodes_[v].rank;
  alg_.erase(r);
  index_->remove(v, r);
}

void LfmisInstance::insert(PointIndex v) {
  if (contains(v)) throw Error(ErrorCode::kDuplicateInsert, "vertex " + std::to_string(v));
  Node& n = node(v);
  n = Node{};
  n.rank = draw_rank();
  insert_step(v);
  drain();
}

void LfmisInstance::erase(PointIndex v) {
  if (!contains(v)) throw Error(ErrorCode::kDeleteOfInactive, "vertex " + std::to_string(v));
  Node& n = nodes_[v];
  switch (n.role) {
    case Role::kFollower:
      detach(v);
      break;
    case Role::kQueued:
      release_followers(v);
      queue_.erase({n.rank, v});
      break;
    case Role::kAlg:
      release_followers(v);
      remove_from_alg(v);
      break;
    case Role::kAbsent:
      break;
  }
  used_ranks_.erase(n.rank);
  nodes_[v] = Node{};
  drain();
}

void LfmisInstance::insert_step(PointIndex v) {
  ++counters_.insert_calls;
  Rank rv = nodes_[v].rank;
  if (alg_.size() == k_ + 1 && rv > alg_.rbegin()->first) {
    enqueue(v);
    return;
  }
  std::optional<PointIndex> first = index_->top(v);
  if (!first) {
    add_to_alg(v);
    if (alg_.size() == k_ + 2) {
      PointIndex evicted = alg_.rbegin()->second;
      remove_from_alg(evicted);
      ++counters_.overflow_evictions;
      enqueue(evicted);
    }
    return;
  }
  Rank ru = nodes_[*first].rank;
  if (ru < rv) {
    release_followers(v);
    attach(v, *first);
    return;
  }
  std::vector<PointIndex> dominated = index_->all_from(v, ru);
  for (PointIndex u : dominated) {
    release_followers(u);
    remove_from_alg(u);
    attach(u, v);
  }
  add_to_alg(v);
}

void LfmisInstance::drain() {
  while (!queue_.empty() && (alg_.size() <= k_ || queue_.begin()->first < alg_.rbegin()->first)) {
    PointIndex v = queue_.begin()->second;
    queue_.erase(queue_.begin());
    ++counters_.queue_pops;
    insert_step(v);
  }
}

}  // namespace dynclust
