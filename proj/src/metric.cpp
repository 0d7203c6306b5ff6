#include "dynclust/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace dynclust {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateInsert: return "DuplicateInsert";
    case ErrorCode::kDeleteOfInactive: return "DeleteOfInactive";
    case ErrorCode::kUnknownPoint: return "UnknownPoint";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnsupportedMetric: return "UnsupportedMetric";
    case ErrorCode::kRadiusOutOfRange: return "RadiusOutOfRange";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kNotCleanOperation: return "NotCleanOperation";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kGuessTooSmall: return "GuessTooSmall";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kEuclidean: return "euclidean-l2";
    case MetricKind::kLp: return "lp";
    case MetricKind::kHamming: return "hamming";
    case MetricKind::kJaccard: return "jaccard";
    case MetricKind::kMatrix: return "matrix";
    case MetricKind::kAdversary: return "adversary";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "euclidean-l2" || name == "l2" || name == "euclidean") return MetricKind::kEuclidean;
  if (name == "lp" || name == "l1") return MetricKind::kLp;
  if (name == "hamming") return MetricKind::kHamming;
  if (name == "jaccard") return MetricKind::kJaccard;
  if (name == "matrix") return MetricKind::kMatrix;
  if (name == "adversary") return MetricKind::kAdversary;
  throw Error(ErrorCode::kUnsupportedMetric, std::string(name));
}

LpMetric::LpMetric(std::size_t dim, double p) : dim_(dim), p_(p) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (!(p >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "lp needs p >= 1");
}

PointIndex LpMetric::add_point(std::span<const double> payload) {
  if (payload.size() != dim_) {
    throw Error(ErrorCode::kMalformedInput,
                "expected " + std::to_string(dim_) + " coordinates, got " + std::to_string(payload.size()));
  }
  coords_.insert(coords_.end(), payload.begin(), payload.end());
  return static_cast<PointIndex>(count_++);
}

double LpMetric::distance(PointIndex a, PointIndex b) const {
  const double* x = coords_.data() + static_cast<std::size_t>(a) * dim_;
  const double* y = coords_.data() + static_cast<std::size_t>(b) * dim_;
  double acc = 0.0;
  if (p_ == 2.0) {
    for (std::size_t i = 0; i < dim_; ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(acc);
  }
  if (p_ == 1.0) {
    for (std::size_t i = 0; i < dim_; ++i) acc += std::abs(x[i] - y[i]);
    return acc;
  }
  for (std::size_t i = 0; i < dim_; ++i) acc += std::pow(std::abs(x[i] - y[i]), p_);
  return std::pow(acc, 1.0 / p_);
}

HammingMetric::HammingMetric(std::size_t dim) : dim_(dim), words_((dim + 63) / 64) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
}

PointIndex HammingMetric::add_point(std::span<const double> payload) {
  if (payload.size() != dim_) {
    throw Error(ErrorCode::kMalformedInput,
                "expected " + std::to_string(dim_) + " bits, got " + std::to_string(payload.size()));
  }
  std::size_t base = bits_.size();
  bits_.resize(base + words_, 0);
  for (std::size_t i = 0; i < dim_; ++i) {
    if (payload[i] != 0.0 && payload[i] != 1.0) throw Error(ErrorCode::kMalformedInput, "bits must be 0 or 1");
    if (payload[i] == 1.0) bits_[base + i / 64] |= std::uint64_t{1} << (i % 64);
  }
  return static_cast<PointIndex>(count_++);
}

double HammingMetric::distance(PointIndex a, PointIndex b) const {
  const std::uint64_t* x = bits_.data() + static_cast<std::size_t>(a) * words_;
  const std::uint64_t* y = bits_.data() + static_cast<std::size_t>(b) * words_;
  int d = 0;
  for (std::size_t i = 0; i < words_; ++i) d += std::popcount(x[i] ^ y[i]);
  return d;
}

PointIndex JaccardMetric::add_point(std::span<const double> payload) {
  std::vector<std::uint64_t> s;
  s.reserve(payload.size());
  for (double v : payload) {
    if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::kMalformedInput, "set elements must be non-negative integers");
    s.push_back(static_cast<std::uint64_t>(v));
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  sets_.push_back(std::move(s));
  return static_cast<PointIndex>(sets_.size() - 1);
}

double JaccardMetric::distance(PointIndex a, PointIndex b) const {
  const auto& x = sets_[a];
  const auto& y = sets_[b];
  if (x.empty() && y.empty()) return 0.0;
  std::size_t inter = 0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter, ++i, ++j;
    }
  }
  std::size_t uni = x.size() + y.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

MatrixMetric::MatrixMetric(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != rows_.size()) throw Error(ErrorCode::kMalformedInput, "distance matrix is not square");
    if (rows_[i][i] != 0.0) throw Error(ErrorCode::kMalformedInput, "distance matrix needs a zero diagonal");
    for (std::size_t j = 0; j < i; ++j) {
      if (rows_[i][j] != rows_[j][i]) throw Error(ErrorCode::kMalformedInput, "distance matrix is not symmetric");
      if (rows_[i][j] < 0) throw Error(ErrorCode::kMalformedInput, "negative distance");
    }
  }
}

PointIndex MatrixMetric::add_point(std::span<const double>) {
  if (used_ >= rows_.size()) throw Error(ErrorCode::kUnknownPoint, "more points than matrix rows");
  return static_cast<PointIndex>(used_++);
}

double MatrixMetric::distance(PointIndex a, PointIndex b) const { return rows_[a][b]; }

std::unique_ptr<Metric> make_metric(MetricKind kind, std::size_t dim, double p) {
  switch (kind) {
    case MetricKind::kEuclidean: return std::make_unique<LpMetric>(dim, 2.0);
    case MetricKind::kLp: return std::make_unique<LpMetric>(dim, p);
    case MetricKind::kHamming: return std::make_unique<HammingMetric>(dim);
    case MetricKind::kJaccard: return std::make_unique<JaccardMetric>();
    default: break;
  }
  throw Error(ErrorCode::kUnsupportedMetric, std::string(metric_name(kind)) + " cannot be built from a dimension");
}

double DistanceOracle::operator()(PointIndex a, PointIndex b) const {
  std::size_t n = metric_->size();
  if (a >= n || b >= n) throw Error(ErrorCode::kUnknownPoint, "distance query on unregistered point");
  queries_.fetch_add(1, std::memory_order_relaxed);
  return metric_->distance(a, b);
}

PointSet::PointSet(std::shared_ptr<Metric> metric) : metric_(std::move(metric)) {}

PointIndex PointSet::apply(const UpdateOp& op) {
  if (op.kind == UpdateOp::Kind::kInsert) {
    if (live_.count(op.id)) throw Error(ErrorCode::kDuplicateInsert, op.id);
    PointIndex idx = metric_->add_point(op.coords);
    if (idx != names_.size()) throw Error(ErrorCode::kInvalidArgument, "metric and point set out of step");
    names_.push_back(op.id);
    active_.push_back(true);
    live_.emplace(op.id, idx);
    ++stats_.t;
    ++stats_.n_active;
    stats_.n_max = std::max(stats_.n_max, stats_.n_active);
    return idx;
  }
  auto it = live_.find(op.id);
  if (it == live_.end()) {
    throw Error(ErrorCode::kDeleteOfInactive, op.id);
  }
  PointIndex idx = it->second;
  live_.erase(it);
  active_[idx] = false;
  ++stats_.t;
  --stats_.n_active;
  return idx;
}

std::optional<PointIndex> PointSet::find(std::string_view id) const {
  auto it = live_.find(std::string(id));
  if (it == live_.end()) return std::nullopt;
  return it->second;
}

std::vector<PointIndex> PointSet::active_points() const {
  std::vector<PointIndex> out;
  out.reserve(stats_.n_active);
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (active_[i]) out.push_back(static_cast<PointIndex>(i));
  }
  return out;
}

ScaleLadder::ScaleLadder(double r_min, double r_max, double ratio) : ratio_(ratio) {
  if (!(r_min > 0) || !(r_max > 0)) throw Error(ErrorCode::kInvalidArgument, "scale bounds must be positive");
  if (!(ratio > 1.0)) throw Error(ErrorCode::kInvalidArgument, "scale ratio must exceed 1");
  double r = r_min;
  scales_.push_back(r);
  while (scales_.back() < r_max) {
    r *= ratio;
    scales_.push_back(r);
  }
}

namespace {

// Smallest positive gap between sorted values.
double min_gap(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) {
    double g = v[i] - v[i - 1];
    if (g > 0) best = std::min(best, g);
  }
  return best;
}

DistanceBounds finish(double lo, double hi) {
  if (!std::isfinite(lo) || lo <= 0) lo = hi > 0 ? hi : 1.0;
  if (!(hi > 0)) hi = lo;
  return {lo, std::max(lo, hi)};
}

}  // namespace

DistanceBounds estimate_bounds(const Metric& metric) {
  std::size_t n = metric.size();
  switch (metric.kind()) {
    case MetricKind::kEuclidean:
    case MetricKind::kLp: {
      // Any two distinct points differ in some coordinate by at least the
      // smallest gap on that axis, and an l_p distance dominates every
      // coordinate difference.
      const auto& m = static_cast<const LpMetric&>(metric);
      double lo = std::numeric_limits<double>::infinity();
      double acc = 0.0;
      std::vector<double> axis(n);
      for (std::size_t d = 0; d < m.dim(); ++d) {
        for (std::size_t i = 0; i < n; ++i) axis[i] = m.coords(static_cast<PointIndex>(i))[d];
        lo = std::min(lo, min_gap(axis));
        double extent = n ? axis.back() - axis.front() : 0.0;
        acc += std::pow(extent, m.p());
      }
      return finish(lo, std::pow(acc, 1.0 / m.p()));
    }
    case MetricKind::kHamming:
      return finish(1.0, static_cast<double>(static_cast<const HammingMetric&>(metric).dim()));
    case MetricKind::kJaccard: {
      const auto& m = static_cast<const JaccardMetric&>(metric);
      std::size_t biggest = 1;
      for (std::size_t i = 0; i < n; ++i) biggest = std::max(biggest, m.set(static_cast<PointIndex>(i)).size());
      return finish(1.0 / (2.0 * static_cast<double>(biggest)), 1.0);
    }
    case MetricKind::kMatrix: {
      const auto& m = static_cast<const MatrixMetric&>(metric);
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (const auto& row : m.rows()) {
        for (double d : row) {
          if (d > 0) lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
      }
      return finish(lo, hi);
    }
    case MetricKind::kAdversary:
      break;
  }
  // Unit-length paths: every answer is a positive integer below n.
  return finish(1.0, std::max<double>(1.0, static_cast<double>(n)));
}

}  // namespace dynclust
