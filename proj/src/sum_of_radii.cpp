#include "dynclust/sum_of_radii.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dynclust {

namespace {

// Branch and bound over balls that cover the lowest uncovered point.
class ExactCover {
 public:
  ExactCover(const std::vector<std::vector<double>>& d, std::size_t k) : d_(d), m_(d.size()), k_(k) {
    radii_.resize(m_);
    masks_.resize(m_);
    for (std::size_t c = 0; c < m_; ++c) {
      std::vector<double> r = d_[c];
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      radii_[c] = r;
      for (double rho : r) {
        std::uint64_t mask = 0;
        for (std::size_t x = 0; x < m_; ++x) {
          if (d_[c][x] <= rho) mask |= std::uint64_t{1} << x;
        }
        masks_[c].push_back(mask);
      }
    }
    full_ = m_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m_) - 1;
  }

  std::vector<Ball> solve(const std::vector<PointIndex>& ids) {
    best_ = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, double>> path;
    search(0, 0.0, path);
    std::vector<Ball> out;
    for (auto [c, r] : best_path_) out.push_back({ids[c], r});
    return out;
  }

 private:
  void search(std::uint64_t covered, double cost, std::vector<std::pair<std::size_t, double>>& path) {
    if (covered == full_) {
      if (cost < best_) best_ = cost, best_path_ = path;
      return;
    }
    if (path.size() == k_) return;
    std::size_t u = static_cast<std::size_t>(__builtin_ctzll(~covered & full_));
    if (path.size() + 1 == k_) {
      for (std::size_t c = 0; c < m_; ++c) {
        double rho = 0.0;
        for (std::size_t x = 0; x < m_; ++x) {
          if (!(covered >> x & 1)) rho = std::max(rho, d_[c][x]);
        }
        if (cost + rho < best_) {
          path.emplace_back(c, rho);
          best_ = cost + rho;
          best_path_ = path;
          path.pop_back();
        }
      }
      return;
    }
    for (std::size_t c = 0; c < m_; ++c) {
      const auto& r = radii_[c];
      std::size_t j = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), d_[c][u]) - r.begin());
      for (; j < r.size(); ++j) {
        if (cost + r[j] >= best_) break;
        path.emplace_back(c, r[j]);
        search(covered | masks_[c][j], cost + r[j], path);
        path.pop_back();
      }
    }
  }

  const std::vector<std::vector<double>>& d_;
  std::size_t m_;
  std::size_t k_;
  std::vector<std::vector<double>> radii_;
  std::vector<std::vector<std::uint64_t>> masks_;
  std::uint64_t full_ = 0;
  double best_ = 0.0;
  std::vector<std::pair<std::size_t, double>> best_path_;
};

std::vector<Ball> greedy_cover(const std::vector<std::vector<double>>& d, const std::vector<PointIndex>& ids,
                               std::size_t k) {
  std::size_t m = ids.size();
  std::vector<std::size_t> chosen{0};
  std::vector<double> near = d[0];
  while (chosen.size() < k) {
    std::size_t far = static_cast<std::size_t>(std::max_element(near.begin(), near.end()) - near.begin());
    if (near[far] == 0.0) break;
    chosen.push_back(far);
    for (std::size_t x = 0; x < m; ++x) near[x] = std::min(near[x], d[far][x]);
  }
  std::vector<double> radius(chosen.size(), 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < chosen.size(); ++c) {
      if (d[chosen[c]][x] < d[chosen[best]][x]) best = c;
    }
    radius[best] = std::max(radius[best], d[chosen[best]][x]);
  }
  std::vector<Ball> out;
  for (std::size_t c = 0; c < chosen.size(); ++c) out.push_back({ids[chosen[c]], radius[c]});
  return out;
}

}  // namespace

std::vector<Ball> offline_solve(const std::vector<PointIndex>& centers, std::size_t k, const DistanceFn& dist,
                                OfflineSolver solver) {
  if (k == 0) throw Error(ErrorCode::kInfeasible, "k must be positive");
  std::vector<Ball> out;
  if (centers.size() <= k) {
    for (PointIndex c : centers) out.push_back({c, 0.0});
    return out;
  }
  std::size_t m = centers.size();
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) d[a][b] = d[b][a] = dist(centers[a], centers[b]);
  double work = std::pow(static_cast<double>(m * m), static_cast<double>(k - 1));
  if (solver == OfflineSolver::kExact && m <= 24 && work <= 5e7) return ExactCover(d, k).solve(centers);
  return greedy_cover(d, centers, k);
}

std::vector<Ball> prune(const std::vector<PdIteration>& iterations, const DistanceFn& dist) {
  std::vector<std::size_t> order(iterations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return iterations[a].primal_radius > iterations[b].primal_radius;
  });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const auto& it = iterations[i];
    bool clash = false;
    for (std::size_t j : kept) {
      if (dist(it.center, iterations[j].center) <= it.primal_radius + iterations[j].primal_radius) {
        clash = true;
        break;
      }
    }
    if (!clash) kept.push_back(i);
  }
  std::vector<Ball> out;
  for (std::size_t i : kept) out.push_back({iterations[i].center, 3.0 * iterations[i].primal_radius});
  return out;
}

std::vector<Ball> combine(const std::vector<Ball>& s_bar, const std::vector<Ball>& s_hat, const DistanceFn& dist) {
  std::vector<bool> taken(s_bar.size(), false);
  std::vector<Ball> out;
  for (const Ball& h : s_hat) {
    double grow = -1.0;
    for (std::size_t i = 0; i < s_bar.size(); ++i) {
      if (taken[i]) continue;
      if (s_bar[i].center == h.center || dist(h.center, s_bar[i].center) <= h.radius) {
        taken[i] = true;
        grow = std::max(grow, s_bar[i].radius);
      }
    }
    if (grow >= 0.0) out.push_back({h.center, h.radius + grow});
  }
  return out;
}

std::vector<double> realized_diameters(const std::vector<Ball>& balls, const std::vector<PointIndex>& points,
                                       const DistanceFn& dist) {
  std::vector<std::vector<PointIndex>> members(balls.size());
  for (PointIndex p : points) {
    for (std::size_t b = 0; b < balls.size(); ++b) {
      if (dist(p, balls[b].center) <= balls[b].radius) {
        members[b].push_back(p);
        break;
      }
    }
  }
  std::vector<double> out(balls.size(), 0.0);
  for (std::size_t b = 0; b < balls.size(); ++b) {
    for (std::size_t i = 0; i < members[b].size(); ++i)
      for (std::size_t j = i + 1; j < members[b].size(); ++j)
        out[b] = std::max(out[b], dist(members[b][i], members[b][j]));
  }
  return out;
}

PdInstance::PdInstance(const DistanceOracle& oracle, std::size_t k, double eps, double opt_prime,
                       std::uint64_t seed, OfflineSolver solver)
    : oracle_(oracle), k_(k), eps_(eps), opt_(opt_prime), solver_(solver), rng_(seed) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  if (!(opt_prime > 0.0)) throw Error(ErrorCode::kInvalidArgument, "guess must be positive");
  z_ = eps * opt_prime / static_cast<double>(k);
  auto count = static_cast<std::size_t>(std::ceil(static_cast<double>(k) / eps - 1e-9));
  for (std::size_t j = 1; j <= std::max<std::size_t>(1, count); ++j) radii_.push_back(static_cast<double>(j) * z_);
  guard_ = radii_;
  for (std::size_t j = radii_.size() + 1; j <= 2 * radii_.size(); ++j) guard_.push_back(static_cast<double>(j) * z_);
  auto side = static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(k) / eps - 1e-9));
  cap_ = side * side + side;
}

std::size_t PdInstance::radius_index(double d) const {
  return static_cast<std::size_t>(std::lower_bound(radii_.begin(), radii_.end(), d) - radii_.begin());
}

void PdInstance::step() {
  std::uniform_int_distribution<std::size_t> pick(0, uncovered_.size() - 1);
  PointIndex p = uncovered_.items()[pick(rng_)];

  // Masses are taken out to twice the largest radius: raising y_p is also
  // capped by (p, 2r) for every r in R, otherwise a constraint (q, r) with
  // r above half the ladder can overflow.
  std::size_t J = radii_.size();
  std::size_t G = guard_.size();
  std::vector<std::int64_t> mass(G, 0);
  for (const auto& it : iters_) {
    double d = oracle_(p, it.center);
    auto j = static_cast<std::size_t>(std::lower_bound(guard_.begin(), guard_.end(), d) - guard_.begin());
    if (j < G) mass[j] += static_cast<std::int64_t>(it.y_units);
  }
  for (std::size_t j = 1; j < G; ++j) mass[j] += mass[j - 1];

  // Half-tight capacity of radius (j+1)z is (j+1)z/2 + z, i.e. j+3 units of z/2.
  std::int64_t slack = std::numeric_limits<std::int64_t>::max();
  for (std::size_t j = 0; j < G; ++j) slack = std::min(slack, static_cast<std::int64_t>(j + 3) - mass[j]);
  std::int64_t delta = std::max<std::int64_t>(0, slack);
  // When only a guard radius binds, no radius of R is half-tight; the ball
  // then takes the largest radius of R.
  std::size_t half = J - 1;
  for (std::size_t j = 0; j < J; ++j) {
    if (mass[j] + delta >= static_cast<std::int64_t>(j + 3)) half = j;
  }

  PdIteration it;
  it.center = p;
  it.y_units = static_cast<std::uint64_t>(delta);
  it.half_index = half;
  it.primal_radius = 2.0 * radii_[half];
  std::size_t index = iters_.size();
  iters_.push_back(it);
  center_[p] = index;

  std::vector<PointIndex> hit;
  for (PointIndex u : uncovered_.items()) {
    if (u == p || oracle_(p, u) <= it.primal_radius) hit.push_back(u);
  }
  for (PointIndex u : hit) {
    uncovered_.erase(u);
    cover_[u] = index;
  }
}

void PdInstance::run() {
  while (!uncovered_.empty() && iters_.size() < cap_) {
    step();
    dirty_ = true;
  }
}

void PdInstance::rollback(std::size_t from) {
  for (std::size_t i = from; i < iters_.size(); ++i) center_.erase(iters_[i].center);
  iters_.resize(from);
  for (auto& [q, c] : cover_) {
    if (c != kUncovered && c >= from) {
      c = kUncovered;
      uncovered_.insert(q);
    }
  }
  dirty_ = true;
}

void PdInstance::insert(PointIndex p) {
  if (cover_.count(p)) throw Error(ErrorCode::kDuplicateInsert, "point " + std::to_string(p));
  for (std::size_t i = 0; i < iters_.size(); ++i) {
    if (oracle_(p, iters_[i].center) <= iters_[i].primal_radius) {
      cover_[p] = i;
      return;
    }
  }
  cover_[p] = kUncovered;
  uncovered_.insert(p);
  run();
}

void PdInstance::erase(PointIndex p) {
  if (!cover_.count(p)) throw Error(ErrorCode::kDeleteOfInactive, "point " + std::to_string(p));
  auto c = center_.find(p);
  if (c != center_.end()) {
    std::size_t from = c->second;
    rollback(from);
    cover_.erase(p);
    uncovered_.erase(p);
    ++reruns_;
    run();
    return;
  }
  cover_.erase(p);
  uncovered_.erase(p);
}

std::vector<Ball> PdInstance::s_bar() const {
  return prune(iters_, [this](PointIndex a, PointIndex b) { return oracle_(a, b); });
}

const std::vector<Ball>& PdInstance::s_tilde() {
  if (too_small()) throw Error(ErrorCode::kGuessTooSmall, "guess " + std::to_string(opt_) + " hit the iteration cap");
  if (dirty_) {
    DistanceFn dist = [this](PointIndex a, PointIndex b) { return oracle_(a, b); };
    std::vector<Ball> sbar = prune(iters_, dist);
    std::vector<PointIndex> centers;
    for (const Ball& b : sbar) centers.push_back(b.center);
    std::vector<Ball> shat = offline_solve(centers, k_, dist, solver_);
    s_tilde_ = combine(sbar, shat, dist);
    dirty_ = false;
  }
  return s_tilde_;
}

std::size_t PdInstance::dual_violations() const {
  const Metric& m = oracle_.metric();
  std::size_t bad = 0;
  std::size_t J = radii_.size();
  for (const auto& [p, c] : cover_) {
    std::vector<std::int64_t> mass(J, 0);
    for (const auto& it : iters_) {
      std::size_t j = radius_index(m.distance(p, it.center));
      if (j < J) mass[j] += static_cast<std::int64_t>(it.y_units);
    }
    for (std::size_t j = 0; j < J; ++j) {
      if (j > 0) mass[j] += mass[j - 1];
      // r + z = (j+2) z = 2(j+2) units.
      if (mass[j] > static_cast<std::int64_t>(2 * (j + 2))) ++bad;
    }
  }
  return bad;
}

PdCosts PdInstance::costs() {
  PdCosts out;
  for (const auto& it : iters_) out.dual += static_cast<double>(it.y_units) * z_ / 2.0;
  for (const Ball& b : s_bar()) out.sbar_lp += b.radius + z_;
  if (!too_small()) {
    for (const Ball& b : s_tilde()) out.stilde += b.radius;
  }
  return out;
}

std::string PdInstance::audit() const {
  const Metric& m = oracle_.metric();
  std::ostringstream err;
  for (const auto& [p, c] : cover_) {
    std::size_t want = kUncovered;
    for (std::size_t i = 0; i < iters_.size(); ++i) {
      if (p == iters_[i].center || m.distance(p, iters_[i].center) <= iters_[i].primal_radius) {
        want = i;
        break;
      }
    }
    if (want != c) err << "cover index of " << p << "\n";
    if ((c == kUncovered) != uncovered_.contains(p)) err << "uncovered set disagrees on " << p << "\n";
  }
  if (uncovered_.size() > cover_.size()) err << "uncovered set holds inactive points\n";
  for (std::size_t i = 0; i < iters_.size(); ++i) {
    auto it = center_.find(iters_[i].center);
    if (it == center_.end() || it->second != i) err << "center map at iteration " << i << "\n";
    if (!cover_.count(iters_[i].center)) err << "inactive center at iteration " << i << "\n";
  }
  if (center_.size() != iters_.size()) err << "center map size\n";
  if (!uncovered_.empty() && iters_.size() < cap_) err << "stopped early with uncovered points\n";
  if (iters_.size() > cap_) err << "iteration cap exceeded\n";
  return err.str();
}

SumRadiiEngine::SumRadiiEngine(const DistanceOracle& oracle, SumRadiiConfig cfg) : oracle_(oracle), cfg_(cfg) {
  if (!(cfg.r_min > 0.0) || cfg.r_max < cfg.r_min) throw Error(ErrorCode::kInvalidArgument, "bad distance bounds");
  double top = static_cast<double>(cfg.k) * cfg.r_max;
  std::vector<double> guesses;
  for (double g = cfg.r_min;; g *= 1.0 + cfg.eps) {
    guesses.push_back(g);
    if (g >= top) break;
  }
  inst_.reserve(guesses.size());
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    inst_.emplace_back(oracle, cfg.k, cfg.eps, guesses[i], mix_seed(cfg.seed, i), cfg.solver);
  }
}

void SumRadiiEngine::insert(PointIndex p) {
  if (active_.contains(p)) throw Error(ErrorCode::kDuplicateInsert, "point " + std::to_string(p));
  active_.insert(p);
  parallel_for(inst_.size(), cfg_.threads, [&](std::size_t i) { inst_[i].insert(p); });
}

void SumRadiiEngine::erase(PointIndex p) {
  if (!active_.contains(p)) throw Error(ErrorCode::kDeleteOfInactive, "point " + std::to_string(p));
  active_.erase(p);
  parallel_for(inst_.size(), cfg_.threads, [&](std::size_t i) { inst_[i].erase(p); });
}

SumRadiiSolution SumRadiiEngine::solution() {
  SumRadiiSolution best;
  if (active_.empty()) return best;
  if (active_.size() <= cfg_.k) {
    // Every point its own cluster.
    for (PointIndex p : active_.items()) best.balls.push_back({p, 0.0});
    return best;
  }
  std::vector<double> cost(inst_.size(), std::numeric_limits<double>::infinity());
  parallel_for(inst_.size(), cfg_.threads, [&](std::size_t i) {
    if (inst_[i].too_small()) return;
    double c = 0.0;
    for (const Ball& b : inst_[i].s_tilde()) c += b.radius;
    cost[i] = c;
  });
  std::size_t arg = static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  if (std::isinf(cost[arg])) throw Error(ErrorCode::kInfeasible, "no guess finished within its iteration cap");
  best.guess = arg;
  best.opt_prime = inst_[arg].opt_prime();
  best.balls = inst_[arg].s_tilde();
  best.cost = cost[arg];
  return best;
}

}  // namespace dynclust
