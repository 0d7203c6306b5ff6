#include "dynclust/kcenter.hpp"

namespace dynclust {

namespace {

IndexFactory scan_factory(const DistanceOracle& oracle) {
  return [&oracle](std::size_t, double radius, std::uint64_t) -> std::unique_ptr<AlgIndex> {
    return std::make_unique<ScanIndex>([&oracle, radius](PointIndex u, PointIndex v) { return oracle(u, v) <= radius; });
  };
}

}  // namespace

KCenterEngine::KCenterEngine(const DistanceOracle& oracle, KCenterConfig cfg)
    : KCenterEngine(oracle, cfg, scan_factory(oracle), 1.0) {}

KCenterEngine::KCenterEngine(const DistanceOracle& oracle, KCenterConfig cfg, IndexFactory factory, double cost_factor)
    : oracle_(oracle),
      cfg_(cfg),
      ladder_(ScaleLadder::for_eps(cfg.eps, cfg.r_min, cfg.r_max)),
      factory_(std::move(factory)),
      cost_factor_(cost_factor) {
  if (cfg_.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (!(cfg_.eps > 0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  generation_.assign(ladder_.size(), 0);
  scales_.resize(ladder_.size());
  for (std::size_t i = 0; i < ladder_.size(); ++i) scales_[i] = build(i);
}

std::unique_ptr<LfmisInstance> KCenterEngine::build(std::size_t scale) {
  std::uint64_t seed = mix_seed(mix_seed(cfg_.seed, scale), generation_[scale]++);
  return std::make_unique<LfmisInstance>(cfg_.k, seed, factory_(scale, ladder_[scale], mix_seed(seed, 0x1d)));
}

void KCenterEngine::check_active(PointIndex p, bool want) const {
  if (active_.contains(p) == want) return;
  if (want) throw Error(ErrorCode::kDeleteOfInactive, "point " + std::to_string(p));
  throw Error(ErrorCode::kDuplicateInsert, "point " + std::to_string(p));
}

void KCenterEngine::insert(PointIndex p) {
  check_active(p, false);
  active_.insert(p);
  ++updates_;
  parallel_for(scales_.size(), cfg_.threads, [&](std::size_t i) { scales_[i]->insert(p); });
  enforce_budget();
}

void KCenterEngine::erase(PointIndex p) {
  check_active(p, true);
  active_.erase(p);
  ++updates_;
  parallel_for(scales_.size(), cfg_.threads, [&](std::size_t i) { scales_[i]->erase(p); });
  enforce_budget();
}

void KCenterEngine::enforce_budget() {
  if (cfg_.restart_estimate <= 0) return;
  double budget = 4.0 * static_cast<double>(updates_) * cfg_.restart_estimate;
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    for (std::size_t tries = 0; tries < cfg_.max_restarts_per_update; ++tries) {
      if (static_cast<double>(scales_[i]->ops()) <= budget) break;
      scales_[i] = build(i);
      for (PointIndex p : active_.items()) scales_[i]->insert(p);
      ++restarts_;
    }
  }
}

void KCenterEngine::rebuild_all() {
  parallel_for(scales_.size(), cfg_.threads, [&](std::size_t i) {
    scales_[i] = build(i);
    for (PointIndex p : active_.items()) scales_[i]->insert(p);
  });
}

std::optional<std::size_t> KCenterEngine::winning_scale() const {
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (scales_[i]->alg_size() <= cfg_.k) return i;
  }
  return std::nullopt;
}

KCenterSolution KCenterEngine::solution() const {
  KCenterSolution sol;
  if (active_.size() <= cfg_.k) {
    for (PointIndex p : active_.items()) {
      sol.centers.push_back(p);
      sol.assignment.emplace_back(p, p);
    }
    return sol;
  }
  auto w = winning_scale();
  if (!w) throw Error(ErrorCode::kInfeasible, "no scale holds a k-bounded independent set; raise r_max");
  const LfmisInstance& inst = *scales_[*w];
  sol.scale = w;
  sol.cost_estimate = cost_factor_ * ladder_[*w];
  sol.centers = inst.alg();
  sol.assignment.reserve(active_.size());
  for (PointIndex p : active_.items()) sol.assignment.emplace_back(p, *inst.center_of(p));
  return sol;
}

PointIndex KCenterEngine::membership(PointIndex p) const {
  if (!active_.contains(p)) throw Error(ErrorCode::kUnknownPoint, "point " + std::to_string(p) + " is not active");
  if (active_.size() <= cfg_.k) return p;
  auto w = winning_scale();
  if (!w) throw Error(ErrorCode::kInfeasible, "no feasible scale");
  return *scales_[*w]->center_of(p);
}

std::vector<PointIndex> KCenterEngine::enumerate_cluster(PointIndex p) const {
  PointIndex c = membership(p);
  if (active_.size() <= cfg_.k) return {c};
  const LfmisInstance& inst = *scales_[*winning_scale()];
  std::vector<PointIndex> out{c};
  const auto& fs = inst.followers(c);
  out.insert(out.end(), fs.begin(), fs.end());
  return out;
}

std::vector<PointIndex> KCenterEngine::lower_bound_witness() const {
  if (active_.size() <= cfg_.k) return {};
  auto w = winning_scale();
  if (!w || *w == 0) return {};
  return scales_[*w - 1]->alg();
}

}  // namespace dynclust
