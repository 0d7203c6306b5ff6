#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dynclust/metric.hpp"

namespace dynclust {

struct StreamHeader {
  MetricKind kind = MetricKind::kEuclidean;
  std::size_t dim = 0;
  double p = 2.0;
  std::string matrix_file;  // resolved against the stream's directory
};

struct Stream {
  StreamHeader header;
  std::vector<UpdateOp> ops;
};

// Line format: "# metric=<kind> dim=<d> [p=<p>]" or "# metric=matrix file=<path>",
// then "+ <id> <values...>" and "- <id>". Blank lines and later '#' lines are skipped.
Stream read_stream(std::istream& in, const std::string& base_dir = ".");
Stream read_stream_file(const std::string& path);
void write_stream(std::ostream& out, const Stream& stream);

// Full square matrix, one comma-separated row per line.
std::vector<std::vector<double>> read_matrix_csv(const std::string& path);

std::unique_ptr<Metric> metric_for(const StreamHeader& header);

// Distance bounds over every point the stream inserts.
DistanceBounds stream_bounds(const Stream& stream);

// Distinct points of a grid x grid lattice in the plane: n insertions, then
// n updates that alternately delete a random active point and insert a new one.
Stream synthetic_stream(std::size_t n, std::uint64_t seed, std::size_t grid = 1024);

}  // namespace dynclust
