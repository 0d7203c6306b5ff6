#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dynclust/stream_io.hpp"
#include "dynclust/util.hpp"

namespace dynclust {

enum class Algo { kLfmisKCenter, kLshKCenter, kDetTree, kSumRadii, kSumDiam, kGauntlet };

Algo parse_algo(const std::string& name);
const char* algo_name(Algo algo);

struct RunConfig {
  Algo algo = Algo::kLfmisKCenter;
  std::size_t k = 1;
  double eps = 0.5;
  std::uint64_t seed = 1;
  std::optional<double> delta;        // lsh-kcenter only
  std::optional<double> c;            // lsh-kcenter only
  std::optional<std::size_t> B;       // det-tree only
  std::optional<double> r_min;        // auto from the stream when unset
  std::optional<double> r_max;
  std::string solver = "exact";       // sum-radii / sum-diam offline step
  std::size_t threads = threads_from_env();
};

// Throws InvalidArgument for flags that do not belong to the chosen algorithm.
void validate(const RunConfig& cfg);

struct RunSummary {
  std::size_t updates = 0;
  std::uint64_t queries = 0;
  std::size_t verifier_failures = 0;
  std::string first_failure;
};

// Streams one JSON object per update to out. Every cost figure is
// re-derived from the emitted centers by a separate pass over the raw
// metric; disagreements are counted, not thrown.
RunSummary run_stream(const RunConfig& cfg, const Stream& stream, std::ostream& out);

struct BenchRow {
  std::size_t n = 0;
  std::size_t updates = 0;
  double mean_queries = 0.0;
  double mean_queue_insertions = 0.0;
  double analytic = 0.0;  // (k + log n) log n log(Delta) / eps
};

BenchRow bench_once(const RunConfig& cfg, std::size_t n);

}  // namespace dynclust
