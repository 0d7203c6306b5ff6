// End-to-end acceptance checks, one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynclust/adversary.hpp"
#include "dynclust/clustering_tree.hpp"
#include "dynclust/kcenter.hpp"
#include "dynclust/lfmis.hpp"
#include "dynclust/lsh.hpp"
#include "dynclust/reference.hpp"
#include "dynclust/runner.hpp"
#include "dynclust/sum_of_radii.hpp"
#include "support.hpp"

using namespace dynclust;
using namespace dynclust::support;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// P(Bin(n, p) >= x)
double binomial_upper_tail(std::size_t n, double p, std::size_t x) {
  double total = 0.0;
  for (std::size_t i = x; i <= n; ++i) {
    double logc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    total += std::exp(logc + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return total;
}

Outcome lfmis_equivalence() {
  std::size_t mismatches = 0, checks = 0;
  const std::size_t ks[] = {1, 3, 10};
  const double radii[] = {5.0, 10.0, 20.0};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::size_t n = 20 + rng() % 181;
    std::size_t k = ks[seed % 3];
    double r = radii[(seed / 3) % 3];
    Pool pool = plane_pool(n, rng);
    auto raw = pool.raw();
    EdgePredicate edge = [&](PointIndex a, PointIndex b) { return raw(a, b) <= r; };
    LfmisInstance inst(k, mix_seed(seed, 7), std::make_unique<ScanIndex>(edge));
    std::vector<bool> active(n, false);
    for (const Step& s : churn(n, 2000, rng, 0.55)) {
      if (s.insert) inst.insert(s.p);
      else inst.erase(s.p);
      active[s.p] = s.insert;
      std::vector<RankedVertex> vs;
      for (PointIndex v = 0; v < n; ++v)
        if (active[v]) vs.push_back({inst.rank(v), v});
      ++checks;
      if (inst.alg() != greedy_lfmis(vs, edge, k + 1)) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%zu mismatches over %zu updates", mismatches, checks)};
}

Outcome kcenter_guarantee() {
  std::size_t violations = 0, steps = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::size_t n = 2 + rng() % 13;
    std::size_t k = 1 + rng() % 3;
    Pool pool = plane_pool(n, rng);
    auto raw = pool.raw();
    auto bounds = pool_bounds(pool);
    KCenterConfig cfg;
    cfg.k = k;
    cfg.eps = 0.1;
    cfg.r_min = bounds.r_min;
    cfg.r_max = bounds.r_max;
    cfg.seed = seed;
    KCenterEngine engine(*pool.oracle, cfg);
    auto steps_list = churn(n, 3 * n, rng);
    std::vector<bool> active(n, false);
    for (const Step& s : steps_list) active[s.p] = s.insert;
    for (PointIndex p = 0; p < n; ++p)
      if (active[p]) steps_list.push_back({false, p});
    std::vector<PointIndex> live;
    for (const Step& s : steps_list) {
      if (s.insert) {
        engine.insert(s.p);
        live.push_back(s.p);
      } else {
        engine.erase(s.p);
        live.erase(std::find(live.begin(), live.end(), s.p));
      }
      ++steps;
      auto sol = engine.solution();
      double opt = live.empty() ? 0.0 : exact_kcenter(live, k, raw).cost;
      double realized = 0.0;
      for (auto [p, c] : sol.assignment) realized = std::max(realized, raw(p, c));
      bool ok = sol.cost_estimate <= 2.1 * opt + 1e-9 && realized <= sol.cost_estimate + 1e-9 &&
                sol.assignment.size() == live.size() && sol.centers.size() <= k;
      if (opt > 0) worst = std::max(worst, sol.cost_estimate / opt);
      violations += !ok;
    }
  }
  return {violations == 0, fmt("%zu violations over %zu steps, worst estimate/OPT %.3f", violations, steps, worst)};
}

Outcome update_scaling() {
  RunConfig cfg;
  cfg.algo = Algo::kLfmisKCenter;
  cfg.k = 8;
  cfg.eps = 0.5;
  cfg.seed = 3;
  cfg.threads = 1;
  BenchRow small = bench_once(cfg, 256);
  BenchRow large = bench_once(cfg, 4096);
  double measured = large.mean_queries / small.mean_queries;
  double analytic = large.analytic / small.analytic;
  return {measured <= 3.0 * analytic,
          fmt("queries/update %.1f -> %.1f (x%.2f), analytic x%.2f, limit x%.2f", small.mean_queries,
              large.mean_queries, measured, analytic, 3.0 * analytic)};
}

struct LshTrial {
  bool recall_failed = false;
  std::size_t spurious_pairs = 0;       // distinct pairs beyond c r sharing some bucket
  double spurious_per_table = 0.0;      // the same count averaged per table
};

LshTrial lsh_trial(const Pool& pool, double r, double c, double delta, std::uint64_t seed) {
  const std::size_t n = pool.size;
  auto family = sample_family(*pool.metric, r, c, n, delta, seed);
  const std::size_t s = family->params().s;
  std::vector<std::vector<std::uint64_t>> keys(n);
  for (PointIndex v = 0; v < n; ++v) family->keys(v, keys[v]);
  auto raw = pool.raw();
  LshTrial out;
  std::uint64_t table_hits = 0;
  for (PointIndex a = 0; a < n; ++a) {
    for (PointIndex b = a + 1; b < n; ++b) {
      double d = raw(a, b);
      if (d > r && d <= c * r) continue;
      std::size_t shared = 0;
      for (std::size_t j = 0; j < s; ++j) shared += keys[a][j] == keys[b][j];
      if (d <= r && shared == 0) out.recall_failed = true;
      if (d > c * r && shared) {
        ++out.spurious_pairs;
        table_hits += shared;
      }
    }
  }
  out.spurious_per_table = static_cast<double>(table_hits) / static_cast<double>(s);
  return out;
}

Outcome lsh_parameters() {
  const std::size_t trials = 50, n = 500;
  const double delta = 0.1, c = 2.0;
  std::ostringstream detail;
  bool pass = true;
  struct Setup {
    const char* name;
    std::function<Pool(std::mt19937_64&)> make;
    double r;
  };
  std::vector<Setup> setups = {
      {"l2", [&](std::mt19937_64& rng) { return plane_pool(n, rng); }, 4.0},
      {"hamming", [&](std::mt19937_64& rng) { return hamming_pool(n, 64, rng, 20, 0.05); }, 6.0},
  };
  for (const auto& setup : setups) {
    std::size_t failures = 0;
    std::vector<double> L, per_table;
    for (std::uint64_t seed = 1; seed <= trials; ++seed) {
      std::mt19937_64 rng(seed * 7919);
      Pool pool = setup.make(rng);
      auto t = lsh_trial(pool, setup.r, c, delta, seed);
      failures += t.recall_failed;
      L.push_back(static_cast<double>(t.spurious_pairs));
      per_table.push_back(t.spurious_per_table);
    }
    double tail = binomial_upper_tail(trials, 2 * delta, failures);
    bool recall_ok = tail >= 0.05;
    double mean = 0, var = 0, mean_tab = 0;
    for (double x : L) mean += x / L.size();
    for (double x : L) var += (x - mean) * (x - mean) / (L.size() - 1);
    for (double x : per_table) mean_tab += x / per_table.size();
    // one-sided t test of E[L] < 2 at 95%
    double tstat = var > 0 ? (mean - 2.0) / std::sqrt(var / L.size()) : (mean < 2.0 ? -1e9 : 1e9);
    bool spurious_ok = tstat <= 1.677;
    pass = pass && recall_ok && spurious_ok;
    detail << setup.name << ": recall failures " << failures << "/" << trials << " (tail p " << fmt("%.3f", tail)
           << "), mean L " << fmt("%.2f", mean) << " (t " << fmt("%.2f", tstat) << "), per table "
           << fmt("%.2g", mean_tab) << "; ";
  }
  return {pass, detail.str()};
}

Outcome lsh_kcenter() {
  const std::size_t seeds = 50;
  const double c = 2.0, eps = 0.5, delta = 0.1;
  std::ostringstream detail;
  bool pass = true;
  for (int family = 0; family < 2; ++family) {
    std::size_t good = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      std::mt19937_64 rng(seed * 31 + family);
      std::size_t n = 8 + rng() % 5;
      std::size_t k = 2 + rng() % 2;
      Pool pool = family == 0 ? hamming_pool(n, 48, rng, k, 0.1) : jaccard_pool(n, rng, k);
      auto raw = pool.raw();
      auto bounds = pool_bounds(pool);
      LshKCenterConfig cfg;
      cfg.base.k = k;
      cfg.base.eps = eps;
      cfg.base.r_min = bounds.r_min;
      cfg.base.r_max = bounds.r_max;
      cfg.base.seed = seed;
      cfg.c = c;
      cfg.delta = delta;
      LshKCenterEngine engine(*pool.oracle, cfg);
      bool ok = true;
      std::vector<PointIndex> live;
      for (const Step& s : churn(n, 3 * n, rng, 0.7)) {
        if (s.insert) {
          engine.insert(s.p);
          live.push_back(s.p);
        } else {
          engine.erase(s.p);
          live.erase(std::find(live.begin(), live.end(), s.p));
        }
        auto sol = engine.solution();
        double opt = live.empty() ? 0.0 : exact_kcenter(live, k, raw).cost;
        double realized = 0.0;
        for (auto [p, q] : sol.assignment) realized = std::max(realized, raw(p, q));
        if (opt > 0) worst = std::max(worst, realized / opt);
        ok = ok && realized <= c * (2 + eps) * opt + 1e-9 && sol.assignment.size() == live.size();
      }
      good += ok;
    }
    bool fam_ok = good >= static_cast<std::size_t>(std::ceil((1 - delta) * seeds));
    pass = pass && fam_ok;
    detail << (family == 0 ? "hamming " : "jaccard ") << good << "/" << seeds << " seeds within c(2+eps)OPT, worst "
           << fmt("%.2f", worst) << "; ";
  }
  return {pass, detail.str()};
}

std::string tree_trace(const DetTreeEngine& e) {
  std::ostringstream out;
  for (std::size_t i = 0; i < e.guesses(); ++i) out << e.tree(i).dump();
  try {
    auto sol = e.solution();
    out << "sol " << sol.guess << ' ' << sol.cost_bound;
    for (PointIndex c : sol.centers) out << ' ' << c;
  } catch (const Error& err) {
    out << err.what();
  }
  return out.str();
}

Outcome det_tree() {
  std::size_t violations = 0, steps = 0, witnesses = 0, unsound = 0, nondet = 0;
  const double eps = 0.5;
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    std::size_t n = 3 + rng() % 12;
    std::size_t k = 1 + rng() % 3;
    Pool pool = plane_pool(n, rng);
    auto raw = pool.raw();
    auto bounds = pool_bounds(pool);
    TreeConfig cfg;
    cfg.k = k;
    cfg.eps = eps;
    cfg.r_min = bounds.r_min;
    cfg.r_max = bounds.r_max;
    cfg.n_hint = n;
    cfg.branching = seed % 2 ? 2 : 0;
    auto steps_list = churn(n, 3 * n, rng);
    DetTreeEngine a(*pool.oracle, cfg), b(*pool.oracle, cfg);
    std::vector<PointIndex> live;
    for (const Step& s : steps_list) {
      if (s.insert) {
        a.insert(s.p);
        b.insert(s.p);
        live.push_back(s.p);
      } else {
        a.erase(s.p);
        b.erase(s.p);
        live.erase(std::find(live.begin(), live.end(), s.p));
      }
      ++steps;
      if (tree_trace(a) != tree_trace(b)) ++nondet;
      if (live.empty()) continue;
      double opt = exact_kcenter(live, k, raw).cost;
      for (std::size_t i = 0; i < a.guesses(); ++i) {
        const auto& t = a.tree(i);
        for (const auto& cert : t.witness_certificates()) {
          ++witnesses;
          bool far = cert.size() == k + 1;
          for (std::size_t x = 0; x < cert.size(); ++x)
            for (std::size_t y = x + 1; y < cert.size(); ++y) far = far && raw(cert[x], cert[y]) > t.opt_prime();
          if (!far || !(opt > t.opt_prime() / 2)) ++unsound;
        }
      }
      auto sol = a.solution();
      double realized = 0.0;
      for (PointIndex p : live) {
        double best = INFINITY;
        for (PointIndex c : sol.centers) best = std::min(best, raw(p, c));
        realized = std::max(realized, best);
      }
      double ratio = std::log(static_cast<double>(live.size()) / k) / std::log(static_cast<double>(a.branching()));
      double depth = std::min<double>(k, std::max(1.0, std::ceil(ratio - 1e-12)));
      double bound = (1 + eps) * 4 * depth * opt;
      if (realized > bound + 1e-9 || realized > sol.cost_bound + 1e-9 || sol.centers.size() > k) ++violations;
    }
  }
  bool pass = violations == 0 && unsound == 0 && nondet == 0;
  return {pass, fmt("%zu bound or certificate violations over %zu steps, %zu/%zu witness certificates unsound, %zu nondeterministic "
                    "steps",
                    violations, steps, unsound, witnesses, nondet)};
}

Outcome primal_dual() {
  std::size_t dual_bad = 0, cap_bad = 0, cost_bad = 0, steps = 0, audits = 0;
  double worst = 0.0;
  const double eps = 0.5;
  const double factor = (8 + eps) * (1 + eps);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(9000 + seed);
    std::size_t n = 3 + rng() % 10;
    std::size_t k = 1 + rng() % 3;
    Pool pool = plane_pool(n, rng);
    auto raw = pool.raw();
    auto bounds = pool_bounds(pool);
    SumRadiiConfig cfg;
    cfg.k = k;
    cfg.eps = eps;
    cfg.r_min = bounds.r_min;
    cfg.r_max = bounds.r_max;
    cfg.seed = seed;
    cfg.solver = OfflineSolver::kExact;
    SumRadiiEngine engine(*pool.oracle, cfg);
    std::vector<PointIndex> live;
    for (const Step& s : churn(n, 2 * n, rng, 0.7)) {
      if (s.insert) {
        engine.insert(s.p);
        live.push_back(s.p);
      } else {
        engine.erase(s.p);
        live.erase(std::find(live.begin(), live.end(), s.p));
      }
      ++steps;
      for (std::size_t i = 0; i < engine.guesses(); ++i) {
        auto& inst = engine.instance(i);
        dual_bad += inst.dual_violations();
        if (!inst.too_small() && inst.iterations().size() > inst.iteration_cap()) ++cap_bad;
        audits += !inst.audit().empty();
      }
      if (live.empty()) continue;
      double opt = exact_sum_radii(live, k, raw).cost;
      auto sol = engine.solution();
      if (opt > 0) worst = std::max(worst, sol.cost / opt);
      if (sol.cost > factor * opt + 1e-9) ++cost_bad;
    }
  }
  bool pass = dual_bad == 0 && cap_bad == 0 && cost_bad == 0 && audits == 0;
  return {pass, fmt("%zu steps: dual violations %zu, cap overruns %zu, audit failures %zu, cost over (8+e)(1+e)OPT "
                    "%zu, worst ratio %.2f",
                    steps, dual_bad, cap_bad, audits, cost_bad, worst)};
}

Outcome adversary() {
  std::ostringstream detail;
  bool pass = true;
  std::vector<std::uint32_t> gaps;
  for (std::uint64_t ops : {256u, 1024u, 4096u}) {
    GauntletConfig g;
    g.algo = "diameter";
    g.k = 1;
    g.budget = "4";
    g.ops = ops;
    bool all_verified = true;
    auto res = run_gauntlet(g, [&](const CleanReport& r) { all_verified = all_verified && r.verified; });
    bool ok = res.error.empty() && !res.budget_exceeded && res.ops_done == ops && res.open_fraction_violations == 0 &&
              res.missing_clean_windows == 0 && res.answers_failed == 0 && res.answers_checked > 0 &&
              all_verified && res.degree_violations == 0;
    pass = pass && ok;
    gaps.push_back(res.max_gap);
    detail << "n=" << ops << " gap " << res.max_gap << " (checked " << res.answers_checked << ", failed "
           << res.answers_failed << ", open viol " << res.open_fraction_violations << ", windows missing "
           << res.missing_clean_windows << "); ";
  }
  bool increasing = gaps[0] < gaps[1] && gaps[1] < gaps[2];
  return {pass && increasing, detail.str() + (increasing ? "gap strictly increasing" : "gap NOT strictly increasing")};
}

Outcome planted() {
  std::size_t bad = 0, zero = 0, one = 0, one_eligible = 0, triangles = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto inst = generate_planted(14, 2, 10.0, seed);
    auto metric = std::make_shared<MatrixMetric>(inst.rows);
    for (std::size_t i = 0; i < inst.n; ++i) metric->add_point({});
    std::vector<PointIndex> all(inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) all[i] = static_cast<PointIndex>(i);
    double opt = exact_kcenter(all, inst.k, [&](PointIndex a, PointIndex b) { return metric->distance(a, b); }).cost;
    if (inst.coin == 0) {
      ++zero;
      bad += opt > 1.0;
    } else {
      ++one;
      if (inst.buckets_at_least_two) {
        ++one_eligible;
        bad += opt < inst.R;
      }
    }
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (int coin = 0; coin < 2; ++coin) {
      for (std::size_t n : {4u, 17u, 50u}) triangles += triangle_violations(generate_planted(n, 2, 10.0, seed, coin).rows);
    }
  }
  return {bad == 0 && triangles == 0 && zero > 0 && one_eligible > 0,
          fmt("coin 0: %zu, coin 1: %zu (%zu with buckets >= 2), OPT bound failures %zu, triangle violations %zu", zero,
              one, one_eligible, bad, triangles)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"lfmis canonical equivalence", lfmis_equivalence},
      {"k-center (2+eps) guarantee", kcenter_guarantee},
      {"update cost scaling", update_scaling},
      {"lsh parameter behaviour", lsh_parameters},
      {"lsh k-center guarantee", lsh_kcenter},
      {"deterministic tree", det_tree},
      {"primal-dual sum of radii", primal_dual},
      {"adversary harness", adversary},
      {"planted instances", planted},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (int i = 0; i < 9; ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), i + 1) == only.end()) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
