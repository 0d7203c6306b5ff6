#include "dynclust/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dynclust/util.hpp"

namespace dynclust {

const char* lsh_family_name(LshFamilyKind kind) {
  switch (kind) {
    case LshFamilyKind::kPStableL2: return "pstable-l2";
    case LshFamilyKind::kPStableL1: return "pstable-l1";
    case LshFamilyKind::kBitSampleHamming: return "bitsample-hamming";
    case LshFamilyKind::kMinHashJaccard: return "minhash-jaccard";
  }
  return "unknown";
}

LshFamilyKind family_for(const Metric& metric) {
  switch (metric.kind()) {
    case MetricKind::kEuclidean: return LshFamilyKind::kPStableL2;
    case MetricKind::kLp:
      if (static_cast<const LpMetric&>(metric).p() == 1.0) return LshFamilyKind::kPStableL1;
      break;
    case MetricKind::kHamming: return LshFamilyKind::kBitSampleHamming;
    case MetricKind::kJaccard: return LshFamilyKind::kMinHashJaccard;
    default: break;
  }
  throw Error(ErrorCode::kUnsupportedMetric, std::string("no LSH family for ") + metric_name(metric.kind()));
}

LshParams lsh_params(double p1, double p2, std::size_t n, double delta) {
  if (!(p1 > 0 && p1 <= 1) || !(p2 > 0 && p2 < 1) || !(p2 < p1)) {
    throw Error(ErrorCode::kRadiusOutOfRange, "need 0 < p2 < p1 <= 1");
  }
  if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  double nn = static_cast<double>(std::max<std::size_t>(n, 2));
  LshParams out;
  out.p1 = p1;
  out.p2 = p2;
  out.rho = std::log(1.0 / p1) / std::log(1.0 / p2);
  out.t = static_cast<std::size_t>(std::max(1.0, std::ceil(2.0 * std::log(nn) / std::log(1.0 / p2))));
  out.s = static_cast<std::size_t>(
      std::max(1.0, std::ceil(std::log(nn * nn / delta) * std::pow(nn, 2.0 * out.rho) / p1)));
  return out;
}

double pstable_collision(double d, double w, bool gaussian) {
  if (d <= 0) return 1.0;
  // p(d) = int_0^{w/d} f(x) (1 - x d / w) dx, f the density of |X|.
  double upper = w / d;
  auto f = [gaussian](double x) {
    return gaussian ? 2.0 / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * x * x)
                    : 2.0 / (std::numbers::pi * (1.0 + x * x));
  };
  const int kSteps = 4096;  // even, Simpson
  double h = upper / kSteps;
  double acc = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    double x = i * h;
    double g = f(x) * (1.0 - x / upper);
    acc += g * (i == 0 || i == kSteps ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return acc * h / 3.0;
}

double pstable_collision_closed(double d, double w, bool gaussian) {
  if (d <= 0) return 1.0;
  double s = w / d;
  if (gaussian) {
    double tail = 0.5 * std::erfc(s / std::sqrt(2.0));  // Phi(-s)
    return 1.0 - 2.0 * tail - 2.0 / (std::sqrt(2.0 * std::numbers::pi) * s) * (1.0 - std::exp(-0.5 * s * s));
  }
  return 2.0 * std::atan(s) / std::numbers::pi - std::log1p(s * s) / (std::numbers::pi * s);
}

void HashFamily::keys(PointIndex v, std::vector<std::uint64_t>& out) const {
  out.resize(params_.s);
  for (std::size_t j = 0; j < params_.s; ++j) out[j] = key(j, v);
}

namespace {

inline std::uint64_t fold(std::uint64_t h, std::uint64_t x) { return splitmix64(h ^ (x + 0x632be59bd9b4e019ULL)); }

class BitSampleFamily : public HashFamily {
 public:
  BitSampleFamily(const HammingMetric& m, double r, double c, std::size_t n, double delta, std::uint64_t seed)
      : m_(m) {
    double dim = static_cast<double>(m.dim());
    if (!(r > 0) || !(c * r < dim)) throw Error(ErrorCode::kRadiusOutOfRange, "bit sampling needs 0 < c r < dim");
    r_ = r;
    c_ = c;
    params_ = lsh_params(collision(r), collision(c * r), n, delta);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pos(0, m.dim() - 1);
    masks_.assign(params_.s * m.words(), 0);
    for (std::size_t j = 0; j < params_.s; ++j) {
      for (std::size_t i = 0; i < params_.t; ++i) {
        std::size_t b = pos(rng);
        masks_[j * m.words() + b / 64] |= std::uint64_t{1} << (b % 64);
      }
    }
  }
  LshFamilyKind kind() const override { return LshFamilyKind::kBitSampleHamming; }
  double collision(double d) const override { return 1.0 - d / static_cast<double>(m_.dim()); }
  std::uint64_t key(std::size_t table, PointIndex v) const override {
    // Equal on every sampled coordinate iff equal after masking; repeated
    // draws of one coordinate do not change that.
    auto bits = m_.bits(v);
    const std::uint64_t* mask = masks_.data() + table * m_.words();
    std::uint64_t h = table;
    for (std::size_t w = 0; w < bits.size(); ++w) h = fold(h, bits[w] & mask[w]);
    return h;
  }

 private:
  const HammingMetric& m_;
  std::vector<std::uint64_t> masks_;
};

class MinHashFamily : public HashFamily {
 public:
  MinHashFamily(const JaccardMetric& m, double r, double c, std::size_t n, double delta, std::uint64_t seed)
      : m_(m) {
    if (!(r > 0) || r > 1.0 / (2.0 * c)) {
      throw Error(ErrorCode::kRadiusOutOfRange, "minhash needs 0 < r <= 1/(2c)");
    }
    r_ = r;
    c_ = c;
    params_ = lsh_params(collision(r), collision(c * r), n, delta);
    std::mt19937_64 rng(seed);
    salts_.resize(params_.s * params_.t);
    for (auto& s : salts_) s = rng();
  }
  LshFamilyKind kind() const override { return LshFamilyKind::kMinHashJaccard; }
  double collision(double d) const override { return 1.0 - d; }
  std::uint64_t key(std::size_t table, PointIndex v) const override {
    const auto& set = m_.set(v);
    std::uint64_t h = table;
    for (std::size_t i = 0; i < params_.t; ++i) {
      std::uint64_t salt = salts_[table * params_.t + i];
      std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
      std::uint64_t arg = std::numeric_limits<std::uint64_t>::max();
      for (std::uint64_t e : set) {
        std::uint64_t hv = splitmix64(e ^ salt);
        if (hv < best) best = hv, arg = e;
      }
      h = fold(h, arg);
    }
    return h;
  }

 private:
  const JaccardMetric& m_;
  std::vector<std::uint64_t> salts_;
};

class PStableFamily : public HashFamily {
 public:
  PStableFamily(const LpMetric& m, bool gaussian, double r, double c, std::size_t n, double delta,
                std::uint64_t seed)
      : m_(m), gaussian_(gaussian) {
    if (!(r > 0)) throw Error(ErrorCode::kRadiusOutOfRange, "radius must be positive");
    r_ = r;
    c_ = c;
    w_ = 4.0 * r;
    params_ = lsh_params(collision(r), collision(c * r), n, delta);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::cauchy_distribution<double> cauchy;
    std::uniform_real_distribution<double> offset(0.0, w_);
    std::size_t fns = params_.s * params_.t;
    a_.resize(fns * m.dim());
    b_.resize(fns);
    for (std::size_t f = 0; f < fns; ++f) {
      for (std::size_t d = 0; d < m.dim(); ++d) a_[f * m.dim() + d] = gaussian ? normal(rng) : cauchy(rng);
      b_[f] = offset(rng);
    }
  }
  LshFamilyKind kind() const override {
    return gaussian_ ? LshFamilyKind::kPStableL2 : LshFamilyKind::kPStableL1;
  }
  double collision(double d) const override { return pstable_collision(d, w_, gaussian_); }
  std::uint64_t key(std::size_t table, PointIndex v) const override {
    auto x = m_.coords(v);
    std::size_t dim = m_.dim();
    std::uint64_t h = table;
    for (std::size_t i = 0; i < params_.t; ++i) {
      std::size_t f = table * params_.t + i;
      const double* a = a_.data() + f * dim;
      double dot = b_[f];
      for (std::size_t d = 0; d < dim; ++d) dot += a[d] * x[d];
      h = fold(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(dot / w_))));
    }
    return h;
  }

 private:
  const LpMetric& m_;
  bool gaussian_;
  double w_ = 1.0;
  std::vector<double> a_;
  std::vector<double> b_;
};

}  // namespace

std::unique_ptr<HashFamily> sample_family(const Metric& metric, double r, double c, std::size_t n, double delta,
                                          std::uint64_t seed) {
  if (!(c > 1)) throw Error(ErrorCode::kInvalidArgument, "c must exceed 1");
  switch (family_for(metric)) {
    case LshFamilyKind::kPStableL2:
      return std::make_unique<PStableFamily>(static_cast<const LpMetric&>(metric), true, r, c, n, delta, seed);
    case LshFamilyKind::kPStableL1:
      return std::make_unique<PStableFamily>(static_cast<const LpMetric&>(metric), false, r, c, n, delta, seed);
    case LshFamilyKind::kBitSampleHamming:
      return std::make_unique<BitSampleFamily>(static_cast<const HammingMetric&>(metric), r, c, n, delta, seed);
    case LshFamilyKind::kMinHashJaccard:
      return std::make_unique<MinHashFamily>(static_cast<const JaccardMetric&>(metric), r, c, n, delta, seed);
  }
  throw Error(ErrorCode::kUnsupportedMetric, "unknown family");
}

int RankTree::merge(int a, int b) {
  if (a < 0) return b;
  if (b < 0) return a;
  if (nodes_[a].prio > nodes_[b].prio) {
    nodes_[a].right = merge(nodes_[a].right, b);
    pull(a);
    return a;
  }
  nodes_[b].left = merge(a, nodes_[b].left);
  pull(b);
  return b;
}

void RankTree::split(int n, Rank key, int& lo, int& hi) {
  if (n < 0) {
    lo = hi = -1;
    return;
  }
  if (nodes_[n].key < key) {
    split(nodes_[n].right, key, nodes_[n].right, hi);
    lo = n;
  } else {
    split(nodes_[n].left, key, lo, nodes_[n].left);
    hi = n;
  }
  pull(n);
}

void RankTree::insert(Rank r, PointIndex v) {
  int id;
  Node fresh{r, v, splitmix64(r), 1, -1, -1};
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    nodes_[id] = fresh;
  } else {
    id = static_cast<int>(nodes_.size());
    nodes_.push_back(fresh);
  }
  int lo, hi;
  split(root_, r, lo, hi);
  root_ = merge(merge(lo, id), hi);
}

bool RankTree::erase(Rank r) {
  int lo, hi, mid, rest;
  split(root_, r, lo, hi);
  if (r == std::numeric_limits<Rank>::max()) {
    mid = hi;
    rest = -1;
  } else {
    split(hi, r + 1, mid, rest);
  }
  bool found = mid >= 0;
  if (found) free_.push_back(mid);
  root_ = merge(lo, rest);
  return found;
}

std::uint32_t RankTree::audit_node(int n, Rank lo, Rank hi, bool& ok) const {
  if (n < 0) return 0;
  const Node& x = nodes_[n];
  if (x.key < lo || x.key > hi) ok = false;
  for (int ch : {x.left, x.right}) {
    if (ch >= 0 && nodes_[ch].prio > x.prio) ok = false;
  }
  std::uint32_t left = x.key == 0 ? 0 : audit_node(x.left, lo, x.key - 1, ok);
  if (x.key == 0 && x.left >= 0) ok = false;
  std::uint32_t right = x.key == std::numeric_limits<Rank>::max() ? 0 : audit_node(x.right, x.key + 1, hi, ok);
  if (x.key == std::numeric_limits<Rank>::max() && x.right >= 0) ok = false;
  std::uint32_t total = 1 + left + right;
  if (total != x.count) ok = false;
  return total;
}

bool RankTree::audit() const {
  bool ok = true;
  audit_node(root_, 0, std::numeric_limits<Rank>::max(), ok);
  return ok;
}

LshIndex::LshIndex(std::unique_ptr<HashFamily> family, const DistanceOracle& oracle, double filter_radius)
    : family_(std::move(family)), oracle_(oracle), filter_(filter_radius), tables_(family_->params().s) {}

const std::vector<std::uint64_t>& LshIndex::keys_of(PointIndex v) {
  if (auto it = members_.find(v); it != members_.end()) return it->second.second;
  if (cached_v_ != v) {
    family_->keys(v, cached_keys_);
    cached_v_ = v;
  }
  return cached_keys_;
}

void LshIndex::add(PointIndex v, Rank r) {
  std::vector<std::uint64_t> ks;
  if (cached_v_ == v) {
    ks = cached_keys_;
  } else {
    family_->keys(v, ks);
  }
  for (std::size_t j = 0; j < ks.size(); ++j) tables_[j][ks[j]].insert(r, v);
  members_[v] = {r, std::move(ks)};
}

void LshIndex::remove(PointIndex v, Rank r) {
  auto it = members_.find(v);
  if (it == members_.end()) return;
  const auto& ks = it->second.second;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    auto b = tables_[j].find(ks[j]);
    b->second.erase(r);
    if (b->second.empty()) tables_[j].erase(b);
  }
  members_.erase(it);
}

std::vector<std::pair<Rank, PointIndex>> LshIndex::candidates(PointIndex v) {
  const auto& ks = keys_of(v);
  std::vector<std::pair<Rank, PointIndex>> out;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    auto b = tables_[j].find(ks[j]);
    if (b == tables_[j].end()) continue;
    b->second.visit([&](Rank r, PointIndex u) {
      if (u != v) out.emplace_back(r, u);
      return true;
    });
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<PointIndex> LshIndex::top(PointIndex v) {
  for (const auto& [r, u] : candidates(v)) {
    ++queries_;
    if (oracle_(v, u) <= filter_) return u;
  }
  return std::nullopt;
}

std::vector<PointIndex> LshIndex::all_from(PointIndex v, Rank from) {
  std::vector<PointIndex> out;
  for (const auto& [r, u] : candidates(v)) {
    if (r < from) continue;
    if (r == from) {
      out.push_back(u);
      continue;
    }
    ++queries_;
    if (oracle_(v, u) <= filter_) out.push_back(u);
  }
  return out;
}

bool LshIndex::audit() const {
  std::unordered_map<PointIndex, std::size_t> seen;
  for (std::size_t j = 0; j < tables_.size(); ++j) {
    std::unordered_map<PointIndex, std::size_t> here;
    for (const auto& [key, tree] : tables_[j]) {
      if (!tree.audit() || tree.empty()) return false;
      bool ok = true;
      tree.visit([&](Rank r, PointIndex u) {
        auto m = members_.find(u);
        if (m == members_.end() || m->second.first != r || m->second.second[j] != key) ok = false;
        ++here[u];
        return true;
      });
      if (!ok) return false;
    }
    if (here.size() != members_.size()) return false;
    for (const auto& [u, cnt] : here) {
      if (cnt != 1) return false;
    }
  }
  return true;
}

LshKCenterEngine::LshKCenterEngine(const DistanceOracle& oracle, LshKCenterConfig cfg)
    : oracle_(oracle), cfg_(cfg) {
  family_for(oracle.metric());  // rejects metrics without a family up front
  if (!(cfg_.c > 1)) throw Error(ErrorCode::kInvalidArgument, "c must exceed 1");
  scale_count_ = ScaleLadder::for_eps(cfg_.base.eps, cfg_.base.r_min, cfg_.base.r_max).size();
  engine_ = std::make_unique<KCenterEngine>(
      oracle, cfg_.base,
      [this](std::size_t, double radius, std::uint64_t seed) { return make_index(radius, seed); }, cfg_.c);
}

std::unique_ptr<AlgIndex> LshKCenterEngine::make_index(double radius, std::uint64_t seed) {
  // The per-scale failure budget is split evenly over the ladder.
  double delta = cfg_.delta / static_cast<double>(scale_count_);
  try {
    return std::make_unique<LshIndex>(sample_family(oracle_.metric(), radius, cfg_.c, bound_, delta, seed), oracle_,
                                      cfg_.c * radius);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRadiusOutOfRange) throw;
  }
  // No family at this radius: the exact threshold graph is a valid stand-in.
  ++exact_scales_;
  const DistanceOracle& oracle = oracle_;
  return std::make_unique<ScanIndex>([&oracle, radius](PointIndex u, PointIndex v) { return oracle(u, v) <= radius; });
}

void LshKCenterEngine::insert(PointIndex p) {
  engine_->insert(p);
  after_update();
}

void LshKCenterEngine::erase(PointIndex p) {
  engine_->erase(p);
  after_update();
}

void LshKCenterEngine::new_epoch() {
  checkpoint_t_ = t_;
  checkpoint_n_ = engine_->active().size();
  exact_scales_ = 0;
  engine_->rebuild_all();
  ++epochs_;
}

void LshKCenterEngine::after_update() {
  ++t_;
  std::size_t n = engine_->active().size();
  if (n > bound_) {
    while (bound_ < n) bound_ *= 2;
    new_epoch();
    return;
  }
  std::uint64_t gap = std::max<std::uint64_t>(1, (checkpoint_n_ + 1) / 2);
  if (t_ - checkpoint_t_ >= gap) {
    bound_ = 2;
    while (bound_ < n) bound_ *= 2;
    new_epoch();
  }
}

}  // namespace dynclust
