#include "dynclust/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>

#include "dynclust/clustering_tree.hpp"

namespace dynclust {

namespace {

constexpr std::uint32_t kInf = static_cast<std::uint32_t>(-1);

std::uint64_t edge_key(PointIndex a, PointIndex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

AdversaryState::AdversaryState(std::size_t k, BudgetFn f, bool enforce_budget)
    : k_(k), f_(std::move(f)), enforce_(enforce_budget) {}

double AdversaryState::f(double n) const { return std::max(1.0, f_(static_cast<double>(k_), n)); }

bool AdversaryState::has_edge(PointIndex a, PointIndex b) const { return edges_.count(edge_key(a, b)) > 0; }

AdversaryUpdate AdversaryState::generate_update() {
  ++t_;
  AdversaryUpdate upd;
  upd.t = t_;
  if (!closed_.empty()) {
    PointIndex x = *closed_.begin();
    closed_.erase(closed_.begin());
    labels_[x] = VertexLabel::kOff;
    upd.kind = UpdateOp::Kind::kDelete;
    upd.vertex = x;
  } else {
    auto x = static_cast<PointIndex>(labels_.size());
    labels_.push_back(VertexLabel::kOpen);
    adj_.emplace_back();
    semi_.push_back(false);
    ++open_;
    upd.kind = UpdateOp::Kind::kInsert;
    upd.vertex = x;
  }
  budget_ += f(static_cast<double>(current()));
  if (100.0 * static_cast<double>(open_) < 92.0 * static_cast<double>(t_)) ++open_violations_;
  upd.clean = closed_.empty();
  if (upd.clean) clean_ops_.push_back(t_);
  return upd;
}

void AdversaryState::add_edge(PointIndex a, PointIndex b) {
  adj_[a].push_back(b);
  adj_[b].push_back(a);
  edges_.insert(edge_key(a, b));
}

void AdversaryState::relabel(PointIndex v) {
  double deg = static_cast<double>(adj_[v].size());
  double fv = f(static_cast<double>(t_));
  if (deg > 100.0 * fv + 1.0) ++degree_violations_;
  if (labels_[v] != VertexLabel::kOpen) return;
  if (deg > 50.0 * fv && !semi_[v]) {
    semi_[v] = true;
    ++semi_open_;
  }
  if (deg >= 100.0 * fv) {
    labels_[v] = VertexLabel::kClosed;
    --open_;
    closed_.insert(v);
  }
}

std::vector<std::uint32_t> AdversaryState::bfs(PointIndex src) const {
  std::vector<std::uint32_t> dist(labels_.size(), kInf);
  std::deque<PointIndex> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    PointIndex v = q.front();
    q.pop_front();
    for (PointIndex w : adj_[v]) {
      if (dist[w] == kInf) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
    }
  }
  return dist;
}

std::uint32_t AdversaryState::answer(PointIndex a, PointIndex b) {
  if (a >= labels_.size() || b >= labels_.size()) {
    throw Error(ErrorCode::kUnknownPoint, "vertex " + std::to_string(std::max(a, b)));
  }
  ++queries_;
  if (enforce_ && static_cast<double>(queries_) > budget_ + 1e-9) {
    throw Error(ErrorCode::kBudgetExceeded,
                std::to_string(queries_) + " queries against a budget of " + std::to_string(budget_));
  }
  std::uint32_t value = 0;
  PointIndex eu = 0, ev = 0;
  bool fresh = false;
  if (a == b) {
    value = 0;
  } else if (labels_[a] == VertexLabel::kOpen && labels_[b] == VertexLabel::kOpen) {
    value = 1;
    fresh = !has_edge(a, b);
    eu = a, ev = b;
  } else {
    auto da = bfs(a);
    auto db = bfs(b);
    value = da[b];
    // Two nearest open vertices to b, so a clique hop u-v can take v != u.
    PointIndex v1 = kNoPoint, v2 = kNoPoint;
    for (PointIndex v = 0; v < labels_.size(); ++v) {
      if (labels_[v] != VertexLabel::kOpen || db[v] == kInf) continue;
      if (v1 == kNoPoint || db[v] < db[v1]) v2 = v1, v1 = v;
      else if (v2 == kNoPoint || db[v] < db[v2]) v2 = v;
    }
    for (PointIndex u = 0; u < labels_.size(); ++u) {
      if (labels_[u] != VertexLabel::kOpen || da[u] == kInf) continue;
      PointIndex v = u == v1 ? v2 : v1;
      if (v == kNoPoint) continue;
      std::uint64_t cand = static_cast<std::uint64_t>(da[u]) + 1 + db[v];
      if (cand < value) {
        value = static_cast<std::uint32_t>(cand);
        eu = u, ev = v;
        fresh = true;
      }
    }
    if (value == kInf) throw Error(ErrorCode::kInfeasible, "adversary graph lost an open vertex");
  }
  answers_.push_back({a, b, value, t_});
  if (!fresh) return value;

  add_edge(eu, ev);
  relabel(eu);
  relabel(ev);

  // The component of the new edge must keep an open vertex.
  std::vector<PointIndex> comp{eu};
  std::vector<bool> seen(labels_.size(), false);
  seen[eu] = true;
  bool has_open = false;
  for (std::size_t i = 0; i < comp.size() && !has_open; ++i) {
    if (labels_[comp[i]] == VertexLabel::kOpen) has_open = true;
    for (PointIndex w : adj_[comp[i]]) {
      if (!seen[w]) seen[w] = true, comp.push_back(w);
    }
  }
  if (has_open) return value;
  PointIndex cu = *std::min_element(comp.begin(), comp.end(), [&](PointIndex x, PointIndex y) {
    return std::pair(adj_[x].size(), x) < std::pair(adj_[y].size(), y);
  });
  PointIndex donor = kNoPoint;
  for (PointIndex v = 0; v < labels_.size(); ++v) {
    if (labels_[v] != VertexLabel::kOpen) continue;
    if (donor == kNoPoint || adj_[v].size() < adj_[donor].size()) donor = v;
  }
  if (donor == kNoPoint) throw Error(ErrorCode::kInfeasible, "no open vertex left for a repair edge");
  if (static_cast<double>(adj_[donor].size()) > 50.0 * f(static_cast<double>(t_))) ++donor_misses_;
  add_edge(cu, donor);
  ++repairs_;
  relabel(cu);
  relabel(donor);
  return value;
}

PointIndex AdversaryMetric::add_point(std::span<const double>) {
  throw Error(ErrorCode::kInvalidArgument, "the adversary creates its own points");
}

ConsistentMetric::ConsistentMetric(const AdversaryState& state, ConsistentSpec spec) : s_(state), spec_(std::move(spec)) {
  if (!s_.clean()) throw Error(ErrorCode::kNotCleanOperation, "closed vertices present at t=" + std::to_string(s_.t()));
  std::size_t V = s_.vertices();
  group_.assign(V, kNoGroup);
  layer_.assign(V, kFar);
  extra_.assign(V, {});
  auto open = [&](PointIndex v) { return s_.label(v) == VertexLabel::kOpen; };

  switch (spec_.kind) {
    case ConsistentKind::kUniform: {
      members_.emplace_back();
      for (PointIndex v = 0; v < V; ++v) {
        if (open(v)) group_[v] = 0, members_[0].push_back(v);
      }
      return;
    }
    case ConsistentKind::kMulti: {
      std::vector<std::uint32_t> d(V, kInf);
      std::deque<PointIndex> q;
      for (PointIndex p : spec_.sources) {
        if (p >= V) throw Error(ErrorCode::kUnknownPoint, "vertex " + std::to_string(p));
        if (d[p] == kInf) d[p] = 0, q.push_back(p);
      }
      while (!q.empty()) {
        PointIndex v = q.front();
        q.pop_front();
        for (PointIndex w : s_.neighbors(v)) {
          if (d[w] == kInf) d[w] = d[v] + 1, q.push_back(w);
        }
      }
      members_.emplace_back();
      for (PointIndex v = 0; v < V; ++v) {
        if (open(v) && d[v] >= spec_.ell) group_[v] = 0, members_[0].push_back(v);
      }
      return;
    }
    case ConsistentKind::kStar:
    case ConsistentKind::kRange:
      break;
  }

  PointIndex root = spec_.p_star;
  if (root >= V || !open(root)) throw Error(ErrorCode::kInvalidArgument, "p* must be an open vertex");
  // Chain the components of the open-induced subgraph, p*'s component first.
  std::vector<std::uint32_t> comp(V, kInf);
  std::vector<PointIndex> reps;
  auto flood = [&](PointIndex start) {
    auto id = static_cast<std::uint32_t>(reps.size());
    reps.push_back(start);
    std::vector<PointIndex> stack{start};
    comp[start] = id;
    while (!stack.empty()) {
      PointIndex v = stack.back();
      stack.pop_back();
      for (PointIndex w : s_.neighbors(v)) {
        if (open(w) && comp[w] == kInf) comp[w] = id, stack.push_back(w);
      }
    }
  };
  flood(root);
  for (PointIndex v = 0; v < V; ++v) {
    if (open(v) && comp[v] == kInf) flood(v);
  }
  for (std::size_t i = 0; i + 1 < reps.size(); ++i) {
    extra_[reps[i]].push_back(reps[i + 1]);
    extra_[reps[i + 1]].push_back(reps[i]);
    extra_set_.insert(edge_key(reps[i], reps[i + 1]));
    ++connectors_;
  }

  std::vector<std::uint32_t> d(V, kInf);
  std::deque<PointIndex> q{root};
  d[root] = 0;
  while (!q.empty()) {
    PointIndex v = q.front();
    q.pop_front();
    auto relax = [&](PointIndex w) {
      if (d[w] == kInf) d[w] = d[v] + 1, q.push_back(w);
    };
    for (PointIndex w : s_.neighbors(v)) relax(w);
    for (PointIndex w : extra_[v]) relax(w);
  }
  for (PointIndex v = 0; v < V; ++v) {
    if (!open(v) || d[v] == kInf) continue;
    layer_[v] = d[v];
    max_layer_ = std::max(max_layer_, d[v]);
  }
  members_.assign(max_layer_ + 1, {});
  for (PointIndex v = 0; v < V; ++v) {
    if (layer_[v] != kFar) group_[v] = layer_[v], members_[layer_[v]].push_back(v);
  }
}

bool ConsistentMetric::groups_linked(std::uint32_t g, std::uint32_t h) const {
  switch (spec_.kind) {
    case ConsistentKind::kUniform:
    case ConsistentKind::kMulti:
      return true;
    case ConsistentKind::kStar:
      return (g > h ? g - h : h - g) <= 1;
    case ConsistentKind::kRange:
      return (g > h ? g - h : h - g) <= 1 || (g <= spec_.l1 && h <= spec_.l1) || (g >= spec_.l2 && h >= spec_.l2);
  }
  return false;
}

std::vector<std::uint32_t> ConsistentMetric::linked_groups(std::uint32_t g) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t h = 0; h < members_.size(); ++h) {
    if (groups_linked(g, h)) out.push_back(h);
  }
  return out;
}

std::vector<std::uint32_t> ConsistentMetric::distances_from(const std::vector<PointIndex>& sources) const {
  std::size_t V = s_.vertices();
  std::vector<std::uint32_t> dist(V, kInf);
  std::vector<bool> expanded(members_.size(), false), filled(members_.size(), false);
  std::deque<PointIndex> q;
  for (PointIndex p : sources) {
    if (dist[p] == kInf) dist[p] = 0, q.push_back(p);
  }
  while (!q.empty()) {
    PointIndex v = q.front();
    q.pop_front();
    std::uint32_t nd = dist[v] + 1;
    for (PointIndex w : s_.neighbors(v)) {
      if (dist[w] == kInf) dist[w] = nd, q.push_back(w);
    }
    for (PointIndex w : extra_[v]) {
      if (dist[w] == kInf) dist[w] = nd, q.push_back(w);
    }
    std::uint32_t g = group_[v];
    if (g == kNoGroup || expanded[g]) continue;
    // Pops come in distance order, so the first member of g to pop fixes
    // every vertex of a linked group at one step further.
    expanded[g] = true;
    for (std::uint32_t h : linked_groups(g)) {
      if (filled[h]) continue;
      filled[h] = true;
      for (PointIndex w : members_[h]) {
        if (dist[w] == kInf) dist[w] = nd, q.push_back(w);
      }
    }
  }
  return dist;
}

std::uint32_t ConsistentMetric::distance(PointIndex a, PointIndex b) const { return distances_from({a})[b]; }

bool ConsistentMetric::adjacent(PointIndex a, PointIndex b) const {
  if (a == b) return false;
  if (s_.has_edge(a, b) || extra_set_.count(edge_key(a, b))) return true;
  return group_[a] != kNoGroup && group_[b] != kNoGroup && groups_linked(group_[a], group_[b]);
}

ConsistentMetric::Report ConsistentMetric::verify(const std::vector<RecordedAnswer>& answers) const {
  Report rep;
  std::map<PointIndex, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto& r = answers[i];
    ++rep.checked;
    if (r.value == 0) {
      if (r.a != r.b) ++rep.failed;
    } else if (r.value == 1) {
      if (!adjacent(r.a, r.b)) ++rep.failed;
    } else {
      by_source[r.a].push_back(i);
    }
  }
  for (const auto& [src, idx] : by_source) {
    auto dist = distances_from({src});
    for (std::size_t i : idx) {
      if (dist[answers[i].b] != answers[i].value) ++rep.failed;
    }
  }
  return rep;
}

namespace {

class DiameterReporter : public GauntletAlgorithm {
 public:
  explicit DiameterReporter(const DistanceOracle& oracle) : oracle_(oracle) {}

  void insert(PointIndex p) override {
    active_.insert(p);
    if (anchor_ == kNoPoint) {
      anchor_ = p;
      answer_[p] = 0;
    } else {
      answer_[p] = static_cast<std::uint32_t>(oracle_(anchor_, p));
    }
  }

  void erase(PointIndex p) override {
    active_.erase(p);
    answer_.erase(p);
    // The newest point takes over and inherits the old answers without
    // re-querying them; its own answer was measured against the old anchor.
    if (p == anchor_) anchor_ = active_.empty() ? kNoPoint : *active_.rbegin();
  }

  std::vector<PointIndex> centers() override {
    if (anchor_ == kNoPoint) return {};
    return {anchor_};
  }

  double reported_value() override {
    std::uint32_t best = 0;
    for (const auto& [p, d] : answer_) best = std::max(best, d);
    return 2.0 * best;
  }

 private:
  const DistanceOracle& oracle_;
  std::set<PointIndex> active_;
  std::map<PointIndex, std::uint32_t> answer_;
  PointIndex anchor_ = kNoPoint;
};

class AllPairs : public GauntletAlgorithm {
 public:
  explicit AllPairs(const DistanceOracle& oracle) : oracle_(oracle) {}

  void insert(PointIndex p) override {
    auto& mine = known_[p];
    for (PointIndex q : active_) {
      double d = oracle_(p, q);
      mine.emplace_back(q, d);
      known_[q].emplace_back(p, d);
      values_.insert(d);
    }
    active_.insert(p);
  }

  void erase(PointIndex p) override {
    active_.erase(p);
    for (auto [q, d] : known_[p]) {
      values_.erase(values_.find(d));
      auto& other = known_[q];
      other.erase(std::find_if(other.begin(), other.end(), [&](const auto& e) { return e.first == p; }));
    }
    known_.erase(p);
  }

  std::vector<PointIndex> centers() override {
    if (active_.empty()) return {};
    return {*active_.begin()};
  }

  double reported_value() override { return values_.empty() ? 0.0 : *values_.rbegin(); }

 private:
  const DistanceOracle& oracle_;
  std::set<PointIndex> active_;
  std::map<PointIndex, std::vector<std::pair<PointIndex, double>>> known_;
  std::multiset<double> values_;
};

class TreeAlgorithm : public GauntletAlgorithm {
 public:
  TreeAlgorithm(const DistanceOracle& oracle, std::size_t k, double eps, std::size_t ops)
      : engine_(oracle, TreeConfig{k, eps, 1.0, static_cast<double>(std::max<std::size_t>(2, ops)), 0, ops}) {}

  void insert(PointIndex p) override { engine_.insert(p); }
  void erase(PointIndex p) override { engine_.erase(p); }
  std::vector<PointIndex> centers() override { return engine_.solution().centers; }
  double reported_value() override { return engine_.solution().cost_bound; }

 private:
  DetTreeEngine engine_;
};

double kcenter_cost_of(const std::vector<std::uint32_t>& dist, const AdversaryState& s) {
  std::uint32_t worst = 0;
  for (PointIndex v = 0; v < s.vertices(); ++v) {
    if (s.label(v) == VertexLabel::kOpen) worst = std::max(worst, dist[v]);
  }
  return worst == kInf ? std::numeric_limits<double>::infinity() : static_cast<double>(worst);
}

// Farthest-first k centers under m; an upper bound on its k-center optimum.
double greedy_upper_bound(const ConsistentMetric& m, const AdversaryState& s, std::size_t k) {
  PointIndex first = kNoPoint;
  for (PointIndex v = 0; v < s.vertices() && first == kNoPoint; ++v) {
    if (s.label(v) == VertexLabel::kOpen) first = v;
  }
  if (first == kNoPoint) return 0.0;
  std::vector<PointIndex> chosen{first};
  auto dist = m.distances_from(chosen);
  while (chosen.size() < k) {
    PointIndex far = first;
    for (PointIndex v = 0; v < s.vertices(); ++v) {
      if (s.label(v) == VertexLabel::kOpen && dist[v] > dist[far]) far = v;
    }
    if (dist[far] == 0) break;
    chosen.push_back(far);
    dist = m.distances_from(chosen);
  }
  return kcenter_cost_of(dist, s);
}

bool power_of_two(std::uint64_t x) { return x && !(x & (x - 1)); }

}  // namespace

std::unique_ptr<GauntletAlgorithm> make_gauntlet_algorithm(const std::string& name, const DistanceOracle& oracle,
                                                           std::size_t k, double eps, std::size_t ops) {
  if (name == "diameter") return std::make_unique<DiameterReporter>(oracle);
  if (name == "all-pairs") return std::make_unique<AllPairs>(oracle);
  if (name == "det-tree") return std::make_unique<TreeAlgorithm>(oracle, k, eps, ops);
  throw Error(ErrorCode::kInvalidArgument, "unknown gauntlet algorithm '" + name + "'");
}

std::size_t missing_clean_windows(const std::vector<std::uint64_t>& clean_ops, std::uint64_t total) {
  std::size_t missing = 0;
  for (std::uint64_t t = 1; 2 * t <= total; ++t) {
    auto it = std::upper_bound(clean_ops.begin(), clean_ops.end(), t);
    if (it == clean_ops.end() || *it > 2 * t) ++missing;
  }
  return missing;
}

GauntletResult run_gauntlet(const GauntletConfig& cfg, const std::function<void(const CleanReport&)>& sink) {
  BudgetExpr expr = BudgetExpr::parse(cfg.budget);
  auto state = std::make_shared<AdversaryState>(cfg.k, [expr](double k, double n) { return expr(k, n); },
                                                cfg.enforce_budget);
  auto metric = std::make_shared<AdversaryMetric>(state);
  DistanceOracle oracle(metric);
  auto algo = make_gauntlet_algorithm(cfg.algo, oracle, cfg.k, cfg.eps, cfg.ops);

  GauntletResult res;
  for (std::uint64_t op = 1; op <= cfg.ops; ++op) {
    AdversaryUpdate upd = state->generate_update();
    CleanReport rep;
    if (upd.clean && cfg.verify_answers) {
      // Every answer given before this operation, against two consistent metrics.
      auto uni = ConsistentMetric(*state, ConsistentSpec{}).verify(state->answers());
      PointIndex p_star = upd.vertex;
      if (state->label(p_star) != VertexLabel::kOpen) {
        for (PointIndex v = 0; v < state->vertices(); ++v) {
          if (state->label(v) == VertexLabel::kOpen) {
            p_star = v;
            break;
          }
        }
      }
      ConsistentSpec star_spec;
      star_spec.kind = ConsistentKind::kStar;
      star_spec.p_star = p_star;
      auto star = ConsistentMetric(*state, star_spec).verify(state->answers());
      rep.verified = true;
      rep.answers = uni.checked;
      rep.uni_failed = uni.failed;
      rep.star_failed = star.failed;
      res.answers_checked += uni.checked;
      res.answers_failed += uni.failed + star.failed;
    }
    std::vector<PointIndex> centers;
    try {
      if (upd.kind == UpdateOp::Kind::kInsert) algo->insert(upd.vertex);
      else algo->erase(upd.vertex);
      if (upd.clean) {
        centers = algo->centers();
        rep.reported = algo->reported_value();
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBudgetExceeded) throw;
      res.budget_exceeded = true;
      res.error = e.what();
      res.ops_done = op;
      break;
    }
    res.ops_done = op;
    if (!upd.clean) continue;

    rep.t = upd.t;
    rep.n = state->current();
    rep.open = state->open_count();
    rep.off = state->vertices() - state->current();
    rep.queries = state->queries();
    rep.budget = state->budget();
    rep.centers = centers;
    // The solution is scored only if its own queries left the graph clean.
    if (state->clean() && !centers.empty()) {
      std::size_t non_centers = 0;
      for (PointIndex v = 0; v < state->vertices(); ++v) {
        if (state->label(v) == VertexLabel::kOpen &&
            std::find(centers.begin(), centers.end(), v) == centers.end())
          ++non_centers;
      }
      rep.cost_uni = non_centers ? 1.0 : 0.0;
      ConsistentSpec star_spec;
      star_spec.kind = ConsistentKind::kStar;
      star_spec.p_star = centers.front();
      ConsistentMetric star(*state, star_spec);
      rep.gap = star.max_layer();
      rep.cost_star = kcenter_cost_of(star.distances_from(centers), *state);
      if (power_of_two(upd.t) || op == cfg.ops) {
        rep.detailed = true;
        std::uint32_t width = static_cast<std::uint32_t>(3 * cfg.k - 1);
        for (std::uint32_t l1 = 0; l1 + width <= star.max_layer(); ++l1) {
          ConsistentSpec rs = star_spec;
          rs.kind = ConsistentKind::kRange;
          rs.l1 = l1;
          rs.l2 = l1 + width;
          ConsistentMetric range(*state, rs);
          double alg = kcenter_cost_of(range.distances_from(centers), *state);
          double ub = std::max(1.0, greedy_upper_bound(range, *state, cfg.k));
          rep.range_ratio = std::max(rep.range_ratio, alg / ub);
        }
      }
      res.max_gap = std::max(res.max_gap, rep.gap);
      res.final_gap = rep.gap;
    }
    if (sink) sink(rep);
    res.clean.push_back(std::move(rep));
  }
  res.open_fraction_violations = state->open_fraction_violations();
  res.degree_violations = state->degree_violations();
  res.missing_clean_windows = missing_clean_windows(state->clean_ops(), res.ops_done);
  return res;
}

PlantedInstance generate_planted(std::size_t n, std::size_t k, double R, std::uint64_t seed, int coin) {
  if (k == 0 || n < 2 * k) throw Error(ErrorCode::kInvalidArgument, "planted instances need n >= 2k");
  if (!(R > 1.0)) throw Error(ErrorCode::kInvalidArgument, "R must exceed 1");
  std::mt19937_64 rng(seed);
  PlantedInstance inst;
  inst.n = n;
  inst.k = k;
  inst.R = R;
  std::uniform_int_distribution<std::size_t> pick_bucket(0, k - 1);
  inst.bucket.resize(n);
  for (auto& b : inst.bucket) b = pick_bucket(rng);
  inst.planted = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  int flip = static_cast<int>(rng() & 1);
  inst.coin = coin < 0 ? flip : coin;

  inst.rows.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      if (p != q) inst.rows[p][q] = inst.bucket[p] == inst.bucket[q] ? 1.0 : R;
  if (inst.coin == 1) {
    std::size_t i = inst.planted;
    for (std::size_t j = 0; j < n; ++j) {
      if (inst.rows[i][j] == 1.0) inst.rows[i][j] = inst.rows[j][i] = 2.0 * R;
    }
  }

  std::vector<std::size_t> sizes(k, 0);
  for (auto b : inst.bucket) ++sizes[b];
  inst.buckets_at_least_two = std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s >= 2; });
  // n > k forces two points under one center, and distinct points are >= 1 apart.
  if (inst.coin == 0) {
    inst.opt_upper = 1.0;
    inst.opt_lower = 1.0;
  } else {
    inst.opt_upper = 2.0 * R;
    inst.opt_lower = inst.buckets_at_least_two ? R : 1.0;
  }
  return inst;
}

std::size_t triangle_violations(const std::vector<std::vector<double>>& rows) {
  std::size_t n = rows.size();
  std::size_t bad = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (rows[a][c] > rows[a][b] + rows[b][c] + 1e-9) ++bad;
  return bad;
}

}  // namespace dynclust
