// dynclust: stream driver, benchmark table and adversary gauntlet.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynclust/adversary.hpp"
#include "dynclust/errors.hpp"
#include "dynclust/runner.hpp"
#include "dynclust/stream_io.hpp"

namespace {

struct Flags {
  std::string algo = "lfmis-kcenter";
  std::size_t k = 1;
  double eps = 0.5;
  std::uint64_t seed = 1;
  std::optional<double> delta, c, r_min, r_max;
  std::optional<std::size_t> B;
  std::string solver = "exact";
  std::size_t threads = dynclust::threads_from_env();
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--algo", f.algo, "lfmis-kcenter | lsh-kcenter | det-tree | sum-radii | sum-diam");
  cmd->add_option("--k", f.k, "number of clusters");
  cmd->add_option("--eps", f.eps, "accuracy parameter");
  cmd->add_option("--seed", f.seed, "seed for every random choice");
  cmd->add_option("--delta", f.delta, "LSH failure probability (lsh-kcenter)");
  cmd->add_option("--c", f.c, "LSH approximation factor (lsh-kcenter)");
  cmd->add_option("--B", f.B, "tree branching factor (det-tree)");
  cmd->add_option("--r-min", f.r_min, "smallest nonzero distance; scanned from the input if unset");
  cmd->add_option("--r-max", f.r_max, "largest distance; scanned from the input if unset");
  cmd->add_option("--solver", f.solver, "offline step for sum-radii: exact | greedy");
  cmd->add_option("--threads", f.threads, "engine worker cap (default DYNCLUST_THREADS)");
}

dynclust::RunConfig to_config(const Flags& f) {
  dynclust::RunConfig cfg;
  cfg.algo = dynclust::parse_algo(f.algo);
  cfg.k = f.k;
  cfg.eps = f.eps;
  cfg.seed = f.seed;
  cfg.delta = f.delta;
  cfg.c = f.c;
  cfg.B = f.B;
  cfg.r_min = f.r_min;
  cfg.r_max = f.r_max;
  cfg.solver = f.solver;
  cfg.threads = std::max<std::size_t>(1, f.threads);
  return cfg;
}

int do_run(const Flags& f, const std::string& input, const std::string& output) {
  auto cfg = to_config(f);
  dynclust::validate(cfg);
  dynclust::Stream stream;
  if (input.empty() || input == "-") {
    stream = dynclust::read_stream(std::cin);
  } else {
    stream = dynclust::read_stream_file(input);
  }
  std::ofstream file;
  if (!output.empty() && output != "-") {
    file.open(output);
    if (!file) throw dynclust::Error(dynclust::ErrorCode::kInvalidArgument, "cannot write " + output);
  }
  std::ostream& out = file.is_open() ? file : std::cout;
  auto summary = dynclust::run_stream(cfg, stream, out);
  if (summary.verifier_failures) {
    std::cerr << "dynclust: verifier rejected " << summary.verifier_failures << " updates; first at "
              << summary.first_failure << '\n';
    return 3;
  }
  return 0;
}

int do_bench(const Flags& f, const std::vector<std::size_t>& sizes) {
  auto cfg = to_config(f);
  dynclust::validate(cfg);
  for (std::size_t n : sizes) {
    if (n == 0) continue;
    auto row = dynclust::bench_once(cfg, n);
    nlohmann::json j;
    j["n"] = row.n;
    j["updates"] = row.updates;
    j["mean_queries"] = row.mean_queries;
    j["mean_queue_insertions"] = row.mean_queue_insertions;
    j["analytic"] = row.analytic;
    std::cout << j.dump() << '\n';
  }
  return 0;
}

int do_gauntlet(const dynclust::GauntletConfig& g) {
  auto res = dynclust::run_gauntlet(g, [](const dynclust::CleanReport& r) {
    nlohmann::json j;
    j["t"] = r.t;
    j["n"] = r.n;
    j["open"] = r.open;
    j["queries"] = r.queries;
    j["budget"] = r.budget;
    j["answers"] = r.answers;
    j["verified"] = r.verified;
    j["uni_failed"] = r.uni_failed;
    j["star_failed"] = r.star_failed;
    j["reported"] = r.reported;
    j["cost_uni"] = r.cost_uni;
    j["cost_star"] = r.cost_star;
    j["gap"] = r.gap;
    if (r.detailed) j["range_ratio"] = r.range_ratio;
    std::cout << j.dump() << '\n';
  });
  nlohmann::json s;
  s["summary"] = true;
  s["ops_done"] = res.ops_done;
  s["budget_exceeded"] = res.budget_exceeded;
  s["open_fraction_violations"] = res.open_fraction_violations;
  s["degree_violations"] = res.degree_violations;
  s["missing_clean_windows"] = res.missing_clean_windows;
  s["answers_checked"] = res.answers_checked;
  s["answers_failed"] = res.answers_failed;
  s["max_gap"] = res.max_gap;
  s["final_gap"] = res.final_gap;
  if (!res.error.empty()) s["error"] = res.error;
  std::cout << s.dump() << '\n';
  return res.error.empty() && res.answers_failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fully dynamic metric clustering"};
  app.require_subcommand(1);

  Flags run_flags;
  std::string input, output;
  auto* run = app.add_subcommand("run", "process an update stream and print JSON-lines telemetry");
  add_common(run, run_flags);
  run->add_option("--input", input, "stream file ('-' for stdin)");
  run->add_option("--output", output, "telemetry file (stdout if unset)");

  Flags bench_flags;
  std::vector<std::size_t> sizes{256, 1024, 4096};
  auto* bench = app.add_subcommand("bench", "mean cost per update on synthetic streams");
  add_common(bench, bench_flags);
  bench->add_option("--sizes", sizes, "stream sizes")->delimiter(',');

  dynclust::GauntletConfig gcfg;
  bool no_enforce = false;
  auto* gauntlet = app.add_subcommand("gauntlet", "run an algorithm against the adaptive adversary");
  gauntlet->add_option("--algo", gcfg.algo, "diameter | all-pairs | det-tree");
  gauntlet->add_option("--budget-f", gcfg.budget, "query budget f(k, n), e.g. '4' or 'k*log(n)^2'");
  gauntlet->add_option("--ops", gcfg.ops, "number of updates");
  gauntlet->add_option("--k", gcfg.k, "number of clusters");
  gauntlet->add_option("--eps", gcfg.eps, "accuracy parameter for det-tree");
  gauntlet->add_flag("--no-enforce", no_enforce, "count queries past the budget instead of stopping");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(run_flags, input, output);
    if (*bench) return do_bench(bench_flags, sizes);
    gcfg.enforce_budget = !no_enforce;
    return do_gauntlet(gcfg);
  } catch (const std::exception& e) {
    std::cerr << "dynclust: " << e.what() << '\n';
    return 2;
  }
}
