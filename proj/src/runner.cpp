#include "dynclust/runner.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

#include <json.hpp>

#include "dynclust/clustering_tree.hpp"
#include "dynclust/kcenter.hpp"
#include "dynclust/lsh.hpp"
#include "dynclust/sum_of_radii.hpp"

namespace dynclust {

Algo parse_algo(const std::string& name) {
  if (name == "lfmis-kcenter") return Algo::kLfmisKCenter;
  if (name == "lsh-kcenter") return Algo::kLshKCenter;
  if (name == "det-tree") return Algo::kDetTree;
  if (name == "sum-radii") return Algo::kSumRadii;
  if (name == "sum-diam") return Algo::kSumDiam;
  if (name == "gauntlet") return Algo::kGauntlet;
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm '" + name + "'");
}

const char* algo_name(Algo algo) {
  switch (algo) {
    case Algo::kLfmisKCenter: return "lfmis-kcenter";
    case Algo::kLshKCenter: return "lsh-kcenter";
    case Algo::kDetTree: return "det-tree";
    case Algo::kSumRadii: return "sum-radii";
    case Algo::kSumDiam: return "sum-diam";
    case Algo::kGauntlet: return "gauntlet";
  }
  return "?";
}

void validate(const RunConfig& cfg) {
  auto reject = [&](const char* flag) {
    throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " does not apply to " + algo_name(cfg.algo));
  };
  if (cfg.k == 0) throw Error(ErrorCode::kInvalidArgument, "--k must be positive");
  if (!(cfg.eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--eps must be positive");
  if ((cfg.c || cfg.delta) && cfg.algo != Algo::kLshKCenter) reject(cfg.c ? "--c" : "--delta");
  if (cfg.B && cfg.algo != Algo::kDetTree) reject("--B");
  if (cfg.c && !(*cfg.c > 1.0)) throw Error(ErrorCode::kInvalidArgument, "--c must exceed 1");
  if (cfg.delta && !(*cfg.delta > 0.0 && *cfg.delta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "--delta must lie in (0, 1)");
  }
  if (cfg.B && *cfg.B < 2) throw Error(ErrorCode::kInvalidArgument, "--B must be at least 2");
  if (cfg.solver != "exact" && cfg.solver != "greedy") throw Error(ErrorCode::kInvalidArgument, "--solver exact|greedy");
  if (cfg.algo == Algo::kGauntlet) throw Error(ErrorCode::kInvalidArgument, "gauntlet runs through its own subcommand");
}

namespace {

struct Report {
  double cost_estimate = 0.0;
  std::vector<PointIndex> centers;
  std::vector<std::pair<PointIndex, PointIndex>> assignment;
  std::vector<Ball> balls;
  std::size_t restarts = 0;
  std::size_t witness_flags = 0;
};

class Adapter {
 public:
  virtual ~Adapter() = default;
  virtual void insert(PointIndex p) = 0;
  virtual void erase(PointIndex p) = 0;
  virtual Report report() = 0;
  virtual std::uint64_t queue_insertions() const { return 0; }
};

std::uint64_t sum_queue_insertions(const KCenterEngine& e) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < e.ladder().size(); ++i) total += e.instance(i).counters().queue_insertions;
  return total;
}

class LfmisAdapter : public Adapter {
 public:
  LfmisAdapter(const DistanceOracle& oracle, KCenterConfig cfg) : engine_(oracle, cfg) {}
  void insert(PointIndex p) override { engine_.insert(p); }
  void erase(PointIndex p) override { engine_.erase(p); }
  Report report() override {
    auto sol = engine_.solution();
    return {sol.cost_estimate, sol.centers, sol.assignment, {}, engine_.restarts(), 0};
  }
  std::uint64_t queue_insertions() const override { return sum_queue_insertions(engine_); }

 private:
  KCenterEngine engine_;
};

class LshAdapter : public Adapter {
 public:
  LshAdapter(const DistanceOracle& oracle, LshKCenterConfig cfg) : engine_(oracle, cfg) {}
  void insert(PointIndex p) override { engine_.insert(p); }
  void erase(PointIndex p) override { engine_.erase(p); }
  Report report() override {
    auto sol = engine_.solution();
    return {sol.cost_estimate, sol.centers, sol.assignment, {}, engine_.engine().restarts(), 0};
  }
  std::uint64_t queue_insertions() const override { return sum_queue_insertions(engine_.engine()); }

 private:
  LshKCenterEngine engine_;
};

class TreeAdapter : public Adapter {
 public:
  TreeAdapter(const DistanceOracle& oracle, TreeConfig cfg) : engine_(oracle, cfg) {}
  void insert(PointIndex p) override { engine_.insert(p); }
  void erase(PointIndex p) override { engine_.erase(p); }
  Report report() override {
    auto sol = engine_.solution();
    Report r;
    r.cost_estimate = sol.cost_bound;
    r.centers = sol.centers;
    r.witness_flags = engine_.witness_flags();
    return r;
  }

 private:
  DetTreeEngine engine_;
};

class RadiiAdapter : public Adapter {
 public:
  RadiiAdapter(const DistanceOracle& oracle, SumRadiiConfig cfg, bool diameters)
      : engine_(oracle, cfg), diameters_(diameters) {}
  void insert(PointIndex p) override { engine_.insert(p); }
  void erase(PointIndex p) override { engine_.erase(p); }
  Report report() override {
    auto sol = engine_.solution();
    Report r;
    r.cost_estimate = diameters_ ? sol.diameter_bound() : sol.cost;
    r.balls = sol.balls;
    for (const Ball& b : sol.balls) r.centers.push_back(b.center);
    return r;
  }

 private:
  SumRadiiEngine engine_;
  bool diameters_;
};

std::unique_ptr<Adapter> make_adapter(const RunConfig& cfg, const DistanceOracle& oracle, DistanceBounds bounds,
                                      std::size_t n_hint) {
  switch (cfg.algo) {
    case Algo::kLfmisKCenter:
    case Algo::kLshKCenter: {
      KCenterConfig kc;
      kc.k = cfg.k;
      kc.eps = cfg.eps;
      kc.r_min = bounds.r_min;
      kc.r_max = bounds.r_max;
      kc.seed = cfg.seed;
      kc.threads = cfg.threads;
      if (cfg.algo == Algo::kLfmisKCenter) return std::make_unique<LfmisAdapter>(oracle, kc);
      LshKCenterConfig lc;
      lc.base = kc;
      lc.c = cfg.c.value_or(2.0);
      lc.delta = cfg.delta.value_or(0.1);
      return std::make_unique<LshAdapter>(oracle, lc);
    }
    case Algo::kDetTree: {
      TreeConfig tc;
      tc.k = cfg.k;
      tc.eps = cfg.eps;
      tc.r_min = bounds.r_min;
      tc.r_max = bounds.r_max;
      tc.branching = cfg.B.value_or(0);
      tc.n_hint = std::max<std::size_t>(1, n_hint);
      return std::make_unique<TreeAdapter>(oracle, tc);
    }
    case Algo::kSumRadii:
    case Algo::kSumDiam: {
      SumRadiiConfig sc;
      sc.k = cfg.k;
      sc.eps = cfg.eps;
      sc.r_min = bounds.r_min;
      sc.r_max = bounds.r_max;
      sc.seed = cfg.seed;
      sc.threads = cfg.threads;
      sc.solver = cfg.solver == "greedy" ? OfflineSolver::kGreedy : OfflineSolver::kExact;
      return std::make_unique<RadiiAdapter>(oracle, sc, cfg.algo == Algo::kSumDiam);
    }
    case Algo::kGauntlet:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument, "no stream engine for this algorithm");
}

struct Verdict {
  double realized = 0.0;
  std::string problem;
};

bool within(double realized, double bound) { return realized <= bound + 1e-9 * std::max(1.0, std::abs(bound)); }

// Independent recomputation over the raw metric; never touches the counter.
Verdict verify(Algo algo, std::size_t k, const Report& r, const std::vector<PointIndex>& active, const Metric& m,
               const std::vector<bool>& is_active) {
  Verdict v;
  for (PointIndex c : r.centers) {
    if (c >= is_active.size() || !is_active[c]) return {0.0, "center is not active"};
  }
  if (active.empty()) return v;
  if (r.centers.size() > k) return {0.0, "more than k centers"};
  switch (algo) {
    case Algo::kLfmisKCenter:
    case Algo::kLshKCenter: {
      std::vector<int> seen(is_active.size(), 0);
      for (auto [p, c] : r.assignment) {
        if (p >= is_active.size() || !is_active[p]) return {0.0, "assignment names an inactive point"};
        if (std::find(r.centers.begin(), r.centers.end(), c) == r.centers.end()) {
          return {0.0, "assignment to a non-center"};
        }
        ++seen[p];
        v.realized = std::max(v.realized, m.distance(p, c));
      }
      for (PointIndex p : active) {
        if (seen[p] != 1) return {v.realized, "point assigned " + std::to_string(seen[p]) + " times"};
      }
      break;
    }
    case Algo::kDetTree: {
      for (PointIndex p : active) {
        double best = std::numeric_limits<double>::infinity();
        for (PointIndex c : r.centers) best = std::min(best, m.distance(p, c));
        v.realized = std::max(v.realized, best);
      }
      break;
    }
    case Algo::kSumRadii:
    case Algo::kSumDiam: {
      for (PointIndex p : active) {
        bool covered = false;
        for (const Ball& b : r.balls) covered = covered || m.distance(p, b.center) <= b.radius;
        if (!covered) return {0.0, "point outside every ball"};
      }
      if (algo == Algo::kSumRadii) {
        for (const Ball& b : r.balls) v.realized += b.radius;
        if (std::abs(v.realized - r.cost_estimate) > 1e-9 * std::max(1.0, v.realized)) {
          return {v.realized, "reported sum of radii differs from the balls"};
        }
        return v;
      }
      auto raw = [&](PointIndex a, PointIndex b) { return m.distance(a, b); };
      for (double d : realized_diameters(r.balls, active, raw)) v.realized += d;
      break;
    }
    case Algo::kGauntlet:
      break;
  }
  if (!within(v.realized, r.cost_estimate)) v.problem = "realized cost above the reported estimate";
  return v;
}

double json_number(double x) { return std::isfinite(x) ? x : -1.0; }

}  // namespace

RunSummary run_stream(const RunConfig& cfg, const Stream& stream, std::ostream& out) {
  validate(cfg);
  DistanceBounds bounds = stream_bounds(stream);
  if (cfg.r_min) bounds.r_min = *cfg.r_min;
  if (cfg.r_max) bounds.r_max = *cfg.r_max;
  if (!(bounds.r_min > 0.0) || bounds.r_max < bounds.r_min) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < r_min <= r_max");
  }
  std::size_t inserts = 0;
  for (const auto& op : stream.ops) inserts += op.kind == UpdateOp::Kind::kInsert;

  std::shared_ptr<Metric> metric = metric_for(stream.header);
  PointSet points(metric);
  DistanceOracle oracle(metric);
  auto engine = make_adapter(cfg, oracle, bounds, inserts);

  RunSummary summary;
  std::vector<bool> is_active;
  for (const auto& op : stream.ops) {
    std::uint64_t before = oracle.queries();
    PointIndex p = points.apply(op);
    if (op.kind == UpdateOp::Kind::kInsert) {
      if (is_active.size() <= p) is_active.resize(p + 1, false);
      is_active[p] = true;
      engine->insert(p);
    } else {
      is_active[p] = false;
      engine->erase(p);
    }
    Report r = engine->report();
    std::uint64_t delta = oracle.queries() - before;
    auto active = points.active_points();
    Verdict v = verify(cfg.algo, cfg.k, r, active, *metric, is_active);
    if (!v.problem.empty()) {
      if (summary.verifier_failures == 0) {
        summary.first_failure = "t=" + std::to_string(points.stats().t) + ": " + v.problem;
      }
      ++summary.verifier_failures;
    }

    nlohmann::json line;
    line["t"] = points.stats().t;
    line["n_active"] = points.stats().n_active;
    line["cost_estimate"] = json_number(r.cost_estimate);
    line["realized_cost"] = json_number(v.realized);
    line["num_centers"] = r.centers.size();
    line["distance_queries_delta"] = delta;
    line["restarts"] = r.restarts;
    line["witness_flags"] = r.witness_flags;
    std::vector<std::string> names;
    for (PointIndex c : r.centers) names.push_back(points.name(c));
    line["centers"] = names;
    if (!v.problem.empty()) line["verifier"] = v.problem;
    out << line.dump() << '\n';
    ++summary.updates;
  }
  summary.queries = oracle.queries();
  return summary;
}

BenchRow bench_once(const RunConfig& cfg, std::size_t n) {
  validate(cfg);
  const std::size_t grid = 1024;
  Stream stream = synthetic_stream(n, cfg.seed, grid);
  DistanceBounds bounds{1.0, std::sqrt(2.0) * static_cast<double>(grid - 1)};
  if (cfg.r_min) bounds.r_min = *cfg.r_min;
  if (cfg.r_max) bounds.r_max = *cfg.r_max;

  std::shared_ptr<Metric> metric = metric_for(stream.header);
  PointSet points(metric);
  DistanceOracle oracle(metric);
  auto engine = make_adapter(cfg, oracle, bounds, n);
  for (const auto& op : stream.ops) {
    PointIndex p = points.apply(op);
    if (op.kind == UpdateOp::Kind::kInsert) engine->insert(p);
    else engine->erase(p);
  }
  BenchRow row;
  row.n = n;
  row.updates = stream.ops.size();
  if (row.updates) {
    row.mean_queries = static_cast<double>(oracle.queries()) / static_cast<double>(row.updates);
    row.mean_queue_insertions = static_cast<double>(engine->queue_insertions()) / static_cast<double>(row.updates);
  }
  double ln = std::log2(static_cast<double>(std::max<std::size_t>(2, n)));
  row.analytic = (static_cast<double>(cfg.k) + ln) * ln * std::log2(bounds.r_max / bounds.r_min) / cfg.eps;
  return row;
}

}  // namespace dynclust
