#pragma once

// Finite unions of disjoint closed intervals, kept sorted.

#include "kicked/scaled_product.hpp"
#include "kicked/scalar.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace kicked {

template <class R>
struct Interval {
  R lo;
  R hi;
  R width() const { return hi - lo; }
  R mid() const { return (lo + hi) / 2; }
  bool contains(const R& t) const { return lo <= t && t <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

template <class R>
class BasicIntervalSet {
 public:
  BasicIntervalSet() = default;
  BasicIntervalSet(std::initializer_list<Interval<R>> pieces) {
    for (const auto& p : pieces) add(p.lo, p.hi);
  }

  /// Union with [lo, hi]; touching or overlapping pieces merge.
  void add(const R& lo, const R& hi) {
    if (hi < lo) throw std::invalid_argument("interval with hi < lo");
    Interval<R> merged{lo, hi};
    std::vector<Interval<R>> out;
    out.reserve(pieces_.size() + 1);
    bool placed = false;
    for (const auto& p : pieces_) {
      if (p.hi < merged.lo) {
        out.push_back(p);
      } else if (merged.hi < p.lo) {
        if (!placed) {
          out.push_back(merged);
          placed = true;
        }
        out.push_back(p);
      } else {
        merged.lo = std::min(merged.lo, p.lo);
        merged.hi = std::max(merged.hi, p.hi);
      }
    }
    if (!placed) out.push_back(merged);
    pieces_ = std::move(out);
  }

  void add(const BasicIntervalSet& other) {
    for (const auto& p : other.pieces_) add(p.lo, p.hi);
  }

  /// Removes the open interval (lo, hi); what remains stays closed.
  /// Degenerate leftovers (single points) are dropped.
  void remove_open(const R& lo, const R& hi) {
    std::vector<Interval<R>> out;
    for (const auto& p : pieces_) {
      if (hi <= p.lo || p.hi <= lo) {
        out.push_back(p);
        continue;
      }
      if (p.lo < lo) out.push_back({p.lo, lo});
      if (hi < p.hi) out.push_back({hi, p.hi});
    }
    pieces_ = std::move(out);
  }

  BasicIntervalSet intersect(const BasicIntervalSet& other) const {
    BasicIntervalSet out;
    std::size_t i = 0, j = 0;
    while (i < pieces_.size() && j < other.pieces_.size()) {
      const auto& a = pieces_[i];
      const auto& b = other.pieces_[j];
      const R lo = std::max(a.lo, b.lo);
      const R hi = std::min(a.hi, b.hi);
      if (lo <= hi) out.pieces_.push_back({lo, hi});
      if (a.hi < b.hi) ++i; else ++j;
    }
    return out;
  }

  /// Sum of the widths, accumulated with compensation.
  R measure() const {
    CompensatedSum<R> s;
    for (const auto& p : pieces_) s.add(p.width());
    return s.value();
  }

  bool contains(const R& t) const {
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), t,
                               [](const Interval<R>& p, const R& v) { return p.hi < v; });
    return it != pieces_.end() && it->contains(t);
  }

  bool empty() const { return pieces_.empty(); }
  std::size_t size() const { return pieces_.size(); }
  const std::vector<Interval<R>>& intervals() const { return pieces_; }
  const Interval<R>& operator[](std::size_t i) const { return pieces_[i]; }
  R inf() const { return pieces_.front().lo; }
  R sup() const { return pieces_.back().hi; }

  friend bool operator==(const BasicIntervalSet&, const BasicIntervalSet&) = default;

 private:
  std::vector<Interval<R>> pieces_;
};

using IntervalSet = BasicIntervalSet<double>;

}  // namespace kicked
