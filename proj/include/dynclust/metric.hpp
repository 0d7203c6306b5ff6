#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dynclust/errors.hpp"

namespace dynclust {

// Dense internal handle for a point. External ids are interned by PointSet.
using PointIndex = std::uint32_t;

enum class MetricKind { kEuclidean, kLp, kHamming, kJaccard, kMatrix, kAdversary };

const char* metric_name(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

struct UpdateOp {
  enum class Kind { kInsert, kDelete };
  Kind kind = Kind::kInsert;
  std::string id;
  std::vector<double> coords;  // Set elements for jaccard, bits for hamming.

  static UpdateOp insert(std::string id, std::vector<double> coords = {}) {
    return {Kind::kInsert, std::move(id), std::move(coords)};
  }
  static UpdateOp erase(std::string id) { return {Kind::kDelete, std::move(id), {}}; }
};

// Point storage plus the distance function. distance() must be safe to call
// from several threads once points are registered.
class Metric {
 public:
  virtual ~Metric() = default;
  virtual MetricKind kind() const = 0;
  virtual PointIndex add_point(std::span<const double> payload) = 0;
  virtual std::size_t size() const = 0;
  virtual double distance(PointIndex a, PointIndex b) const = 0;
};

// Coordinate vectors under an l_p norm (p = 2 is the euclidean kind).
class LpMetric : public Metric {
 public:
  LpMetric(std::size_t dim, double p);
  MetricKind kind() const override { return p_ == 2.0 ? MetricKind::kEuclidean : MetricKind::kLp; }
  PointIndex add_point(std::span<const double> payload) override;
  std::size_t size() const override { return count_; }
  double distance(PointIndex a, PointIndex b) const override;

  std::size_t dim() const { return dim_; }
  double p() const { return p_; }
  std::span<const double> coords(PointIndex i) const { return {coords_.data() + i * dim_, dim_}; }

 private:
  std::size_t dim_;
  double p_;
  std::size_t count_ = 0;
  std::vector<double> coords_;
};

// Bit vectors; the payload is dim values, each 0 or 1.
class HammingMetric : public Metric {
 public:
  explicit HammingMetric(std::size_t dim);
  MetricKind kind() const override { return MetricKind::kHamming; }
  PointIndex add_point(std::span<const double> payload) override;
  std::size_t size() const override { return count_; }
  double distance(PointIndex a, PointIndex b) const override;

  std::size_t dim() const { return dim_; }
  std::size_t words() const { return words_; }
  std::span<const std::uint64_t> bits(PointIndex i) const { return {bits_.data() + i * words_, words_}; }

 private:
  std::size_t dim_;
  std::size_t words_;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Finite sets of non-negative integers; the payload lists the elements.
class JaccardMetric : public Metric {
 public:
  MetricKind kind() const override { return MetricKind::kJaccard; }
  PointIndex add_point(std::span<const double> payload) override;
  std::size_t size() const override { return sets_.size(); }
  double distance(PointIndex a, PointIndex b) const override;

  const std::vector<std::uint64_t>& set(PointIndex i) const { return sets_[i]; }

 private:
  std::vector<std::vector<std::uint64_t>> sets_;
};

// Explicit symmetric matrix; points are bound to rows in insertion order.
class MatrixMetric : public Metric {
 public:
  explicit MatrixMetric(std::vector<std::vector<double>> rows);
  MetricKind kind() const override { return MetricKind::kMatrix; }
  PointIndex add_point(std::span<const double> payload) override;
  std::size_t size() const override { return used_; }
  double distance(PointIndex a, PointIndex b) const override;

  std::size_t capacity() const { return rows_.size(); }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  std::vector<std::vector<double>> rows_;
  std::size_t used_ = 0;
};

std::unique_ptr<Metric> make_metric(MetricKind kind, std::size_t dim, double p = 2.0);

// Counting front-end over a Metric. Every evaluation bumps the counter by one.
class DistanceOracle {
 public:
  explicit DistanceOracle(std::shared_ptr<const Metric> metric) : metric_(std::move(metric)) {}

  double operator()(PointIndex a, PointIndex b) const;
  std::uint64_t queries() const { return queries_.load(std::memory_order_relaxed); }
  const Metric& metric() const { return *metric_; }
  std::shared_ptr<const Metric> shared_metric() const { return metric_; }

 private:
  std::shared_ptr<const Metric> metric_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

struct StreamStats {
  std::uint64_t t = 0;
  std::uint64_t n_active = 0;
  std::uint64_t n_max = 0;
};

// Interns external ids, validates updates and keeps the active set.
class PointSet {
 public:
  explicit PointSet(std::shared_ptr<Metric> metric);

  // Registers or retires a point. A re-inserted id gets a fresh index.
  PointIndex apply(const UpdateOp& op);

  bool active(PointIndex i) const { return i < active_.size() && active_[i]; }
  std::optional<PointIndex> find(std::string_view id) const;
  const std::string& name(PointIndex i) const { return names_.at(i); }
  std::vector<PointIndex> active_points() const;
  const StreamStats& stats() const { return stats_; }
  Metric& metric() { return *metric_; }
  std::shared_ptr<Metric> shared_metric() const { return metric_; }

 private:
  std::shared_ptr<Metric> metric_;
  std::unordered_map<std::string, PointIndex> live_;
  std::vector<std::string> names_;
  std::vector<bool> active_;
  StreamStats stats_;
};

// r_min * ratio^i for i = 0.. until the last scale reaches r_max.
class ScaleLadder {
 public:
  ScaleLadder(double r_min, double r_max, double ratio);
  static ScaleLadder for_eps(double eps, double r_min, double r_max) {
    return ScaleLadder(r_min, r_max, 1.0 + eps / 2.0);
  }

  std::size_t size() const { return scales_.size(); }
  double operator[](std::size_t i) const { return scales_[i]; }
  const std::vector<double>& scales() const { return scales_; }
  double ratio() const { return ratio_; }

 private:
  double ratio_;
  std::vector<double> scales_;
};

struct DistanceBounds {
  double r_min = 1.0;
  double r_max = 1.0;
};

// Bounds on the smallest non-zero and largest distance, derived without a
// pairwise scan where the metric allows it.
DistanceBounds estimate_bounds(const Metric& metric);

}  // namespace dynclust
