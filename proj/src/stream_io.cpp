#include "dynclust/stream_io.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "dynclust/util.hpp"

namespace dynclust {

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::kMalformedInput, "line " + std::to_string(line) + ": " + why);
}

double parse_number(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) malformed(line, "bad number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    malformed(line, "bad number '" + tok + "'");
  }
}

}  // namespace

Stream read_stream(std::istream& in, const std::string& base_dir) {
  Stream s;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream ls(text);
    std::string head;
    if (!(ls >> head)) continue;
    if (head[0] == '#') {
      if (have_header) continue;
      std::string rest = head.size() > 1 ? head.substr(1) + " " : "";
      std::string tok;
      bool any = false;
      std::istringstream fields(rest + std::string(std::istreambuf_iterator<char>(ls), {}));
      while (fields >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "metric") {
          s.header.kind = parse_metric_kind(val);
          if (val == "l1") s.header.p = 1.0;
          any = true;
        } else if (key == "dim") {
          s.header.dim = static_cast<std::size_t>(parse_number(val, line));
        } else if (key == "p") {
          s.header.p = parse_number(val, line);
        } else if (key == "file") {
          std::filesystem::path fp(val);
          s.header.matrix_file = fp.is_absolute() ? val : (std::filesystem::path(base_dir) / fp).string();
        }
      }
      if (any) have_header = true;
      continue;
    }
    if (!have_header) malformed(line, "update before the '# metric=' header");
    std::string id;
    if (!(ls >> id)) malformed(line, "missing point id");
    if (head == "+") {
      std::vector<double> coords;
      std::string tok;
      while (ls >> tok) coords.push_back(parse_number(tok, line));
      auto kind = s.header.kind;
      bool fixed = kind == MetricKind::kEuclidean || kind == MetricKind::kLp || kind == MetricKind::kHamming;
      if (fixed && s.header.dim && coords.size() != s.header.dim) {
        malformed(line, "expected " + std::to_string(s.header.dim) + " coordinates, got " + std::to_string(coords.size()));
      }
      s.ops.push_back(UpdateOp::insert(id, std::move(coords)));
    } else if (head == "-") {
      std::string extra;
      if (ls >> extra) malformed(line, "delete carries no coordinates");
      s.ops.push_back(UpdateOp::erase(id));
    } else {
      malformed(line, "expected '+' or '-', got '" + head + "'");
    }
  }
  if (!have_header) throw Error(ErrorCode::kMalformedInput, "missing '# metric=' header");
  auto kind = s.header.kind;
  if ((kind == MetricKind::kEuclidean || kind == MetricKind::kLp || kind == MetricKind::kHamming) &&
      s.header.dim == 0) {
    throw Error(ErrorCode::kMalformedInput, "header needs dim= for this metric");
  }
  if (kind == MetricKind::kMatrix && s.header.matrix_file.empty()) {
    throw Error(ErrorCode::kMalformedInput, "matrix streams need file=");
  }
  if (kind == MetricKind::kAdversary) {
    throw Error(ErrorCode::kUnsupportedMetric, "adversary streams are generated, not read; use gauntlet");
  }
  return s;
}

Stream read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedInput, "cannot open " + path);
  return read_stream(in, std::filesystem::path(path).parent_path().string());
}

void write_stream(std::ostream& out, const Stream& stream) {
  const auto& h = stream.header;
  out << "# metric=" << (h.kind == MetricKind::kEuclidean ? "l2" : metric_name(h.kind));
  if (h.kind == MetricKind::kMatrix) {
    out << " file=" << h.matrix_file;
  } else if (h.dim) {
    out << " dim=" << h.dim;
  }
  if (h.kind == MetricKind::kLp) out << " p=" << h.p;
  out << '\n';
  for (const auto& op : stream.ops) {
    if (op.kind == UpdateOp::Kind::kDelete) {
      out << "- " << op.id << '\n';
      continue;
    }
    out << "+ " << op.id;
    for (double c : op.coords) out << ' ' << c;
    out << '\n';
  }
}

std::vector<std::vector<double>> read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedInput, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ls(text);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      auto a = cell.find_first_not_of(" \t\r");
      auto b = cell.find_last_not_of(" \t\r");
      if (a == std::string::npos) malformed(line, "empty cell");
      row.push_back(parse_number(cell.substr(a, b - a + 1), line));
    }
    if (!rows.empty() && row.size() != rows.front().size()) malformed(line, "row length differs from the first row");
    rows.push_back(std::move(row));
  }
  if (!rows.empty() && rows.front().size() != rows.size()) {
    throw Error(ErrorCode::kMalformedInput, path + ": matrix is not square");
  }
  return rows;
}

std::unique_ptr<Metric> metric_for(const StreamHeader& header) {
  if (header.kind == MetricKind::kMatrix) return std::make_unique<MatrixMetric>(read_matrix_csv(header.matrix_file));
  return make_metric(header.kind, header.dim, header.p);
}

DistanceBounds stream_bounds(const Stream& stream) {
  auto metric = metric_for(stream.header);
  if (stream.header.kind != MetricKind::kMatrix) {
    for (const auto& op : stream.ops) {
      if (op.kind == UpdateOp::Kind::kInsert) metric->add_point(op.coords);
    }
  }
  return estimate_bounds(*metric);
}

Stream synthetic_stream(std::size_t n, std::uint64_t seed, std::size_t grid) {
  Stream s;
  s.header.kind = MetricKind::kEuclidean;
  s.header.dim = 2;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> coord(0, grid - 1);
  std::unordered_set<std::uint64_t> used;
  std::size_t next = 0;
  auto fresh = [&] {
    for (;;) {
      std::size_t x = coord(rng), y = coord(rng);
      if (used.insert(static_cast<std::uint64_t>(x) * grid + y).second) {
        return UpdateOp::insert("p" + std::to_string(next++), {static_cast<double>(x), static_cast<double>(y)});
      }
    }
  };
  IndexedSet active;
  for (std::size_t i = 0; i < n; ++i) {
    active.insert(static_cast<std::uint32_t>(next));
    s.ops.push_back(fresh());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 2 == 0 && !active.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
      std::uint32_t victim = active.items()[pick(rng)];
      active.erase(victim);
      s.ops.push_back(UpdateOp::erase("p" + std::to_string(victim)));
    } else {
      active.insert(static_cast<std::uint32_t>(next));
      s.ops.push_back(fresh());
    }
  }
  return s;
}

}  // namespace dynclust
