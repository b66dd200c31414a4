#pragma once

#include "condgrad/core.hpp"
#include "condgrad/trace.hpp"

#include <cstdint>
#include <list>
#include <optional>

namespace condgrad {

/// Bounded LRU list of vertices returned by earlier oracle calls.
class WeakSeparationCache {
 public:
  explicit WeakSeparationCache(std::size_t capacity = 256) : capacity_(capacity) {
    require(capacity >= 1, "cache capacity must be positive");
  }

  std::size_t size() const { return atoms_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::int64_t hits() const { return hits_; }
  std::int64_t misses() const { return misses_; }
  const std::list<Point>& atoms() const { return atoms_; }

  /// Best cached atom for <c, x - v> if it beats the threshold; marks it
  /// most recently used.
  std::optional<Point> find_above(const Point& c, const Point& x, double threshold) {
    const double cx = c.dot(x);
    auto best = atoms_.end();
    double best_val = threshold;
    for (auto it = atoms_.begin(); it != atoms_.end(); ++it) {
      const double val = cx - c.dot(*it);
      if (val > best_val) {
        best_val = val;
        best = it;
      }
    }
    if (best == atoms_.end()) {
      ++misses_;
      return std::nullopt;
    }
    ++hits_;
    atoms_.splice(atoms_.begin(), atoms_, best);
    return atoms_.front();
  }

  void insert(const Point& v) {
    for (auto it = atoms_.begin(); it != atoms_.end(); ++it) {
      if (*it == v) {
        atoms_.splice(atoms_.begin(), atoms_, it);
        return;
      }
    }
    atoms_.push_front(v);
    if (atoms_.size() > capacity_) atoms_.pop_back();
  }

 private:
  std::size_t capacity_;
  std::list<Point> atoms_;  // front = most recently used
  std::int64_t hits_ = 0;
  std::int64_t misses_ = 0;
};

struct SeparationAnswer {
  bool positive = false;
  Point vertex;      // set when positive
  double gap = 0.0;  // <c, x - v> for positive answers, exact FW gap for negative ones
  bool from_cache = false;
};

/// Weak separation: a vertex with <c, x - v> > phi / K, or a certificate
/// (the exact gap, <= phi / K) that none exists. Cache first, then one LMO.
template <typename Region>
SeparationAnswer weak_separation(const Region& region, WeakSeparationCache& cache, const Point& c,
                                 const Point& x, double phi, double K, Counters& counters) {
  require(phi > 0.0, "weak separation needs phi > 0");
  require(K >= 1.0, "weak separation needs K >= 1");
  SeparationAnswer ans;
  if (auto v = cache.find_above(c, x, phi / K)) {
    ++counters.cache_hits;
    ans.positive = true;
    ans.from_cache = true;
    ans.gap = c.dot(x - *v);
    ans.vertex = std::move(*v);
    return ans;
  }
  ++counters.lmo;
  Point v = region.lmo(c);
  const double gap = c.dot(x - v);
  if (gap > phi / K) {
    cache.insert(v);
    ans.positive = true;
    ans.gap = gap;
    ans.vertex = std::move(v);
    return ans;
  }
  ++counters.negative_calls;
  ans.gap = gap;
  return ans;
}

}  // namespace condgrad
