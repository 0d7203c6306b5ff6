#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dynclust {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) { return splitmix64(seed ^ splitmix64(salt)); }

// Thread count from DYNCLUST_THREADS, defaulting to 1.
inline std::size_t threads_from_env() {
  const char* s = std::getenv("DYNCLUST_THREADS");
  if (!s || !*s) return 1;
  long v = std::strtol(s, nullptr, 10);
  return v > 0 ? static_cast<std::size_t>(v) : 1;
}

// Runs fn(0..n-1) on up to `threads` threads. Rethrows the first failure.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min(threads, n);
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Vector-backed set with O(1) insert, erase and uniform sampling.
class IndexedSet {
 public:
  bool contains(std::uint32_t v) const { return v < pos_.size() && pos_[v] != kAbsent; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<std::uint32_t>& items() const { return items_; }

  void insert(std::uint32_t v) {
    if (contains(v)) return;
    if (v >= pos_.size()) pos_.resize(static_cast<std::size_t>(v) + 1, kAbsent);
    pos_[v] = static_cast<std::uint32_t>(items_.size());
    items_.push_back(v);
  }

  void erase(std::uint32_t v) {
    if (!contains(v)) return;
    std::uint32_t slot = pos_[v];
    std::uint32_t last = items_.back();
    items_[slot] = last;
    pos_[last] = slot;
    items_.pop_back();
    pos_[v] = kAbsent;
  }

  void clear() {
    for (auto v : items_) pos_[v] = kAbsent;
    items_.clear();
  }

 private:
  static constexpr std::uint32_t kAbsent = 0xffffffffu;
  std::vector<std::uint32_t> items_;
  std::vector<std::uint32_t> pos_;
};

}  // namespace dynclust
