/** @file intervals.hpp
 *  Finite unions of half-open rational intervals with exact measure and set algebra.
 */
#pragma once

#include <algorithm>
#include <vector>

#include "ttlab/dyadic.hpp"

namespace ttlab {

/// Sorted, pairwise disjoint, non-adjacent half-open intervals.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> pieces) {
    for (auto& p : pieces) add(p);
  }

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  Rat measure() const {
    Rat m = 0;
    for (auto& p : pieces_) m += p.length();
    return m;
  }

  void add(const Interval& iv) {
    if (!(iv.lo < iv.hi)) return;
    std::vector<Interval> out;
    Interval cur = iv;
    bool placed = false;
    for (auto& p : pieces_) {
      if (p.hi < cur.lo) {
        out.push_back(p);
      } else if (cur.hi < p.lo) {
        if (!placed) {
          out.push_back(cur);
          placed = true;
        }
        out.push_back(p);
      } else {
        cur.lo = std::min(cur.lo, p.lo);
        cur.hi = std::max(cur.hi, p.hi);
      }
    }
    if (!placed) out.push_back(cur);
    pieces_ = std::move(out);
  }

  IntervalSet unite(const IntervalSet& o) const {
    IntervalSet r = *this;
    for (auto& p : o.pieces_) r.add(p);
    return r;
  }

  IntervalSet intersect(const IntervalSet& o) const {
    IntervalSet r;
    std::size_t a = 0, b = 0;
    while (a < pieces_.size() && b < o.pieces_.size()) {
      Rat lo = std::max(pieces_[a].lo, o.pieces_[b].lo);
      Rat hi = std::min(pieces_[a].hi, o.pieces_[b].hi);
      if (lo < hi) r.pieces_.push_back({lo, hi});
      if (pieces_[a].hi < o.pieces_[b].hi)
        ++a;
      else
        ++b;
    }
    return r;
  }

  IntervalSet minus(const IntervalSet& o) const {
    IntervalSet r;
    for (auto p : pieces_) {
      Rat lo = p.lo;
      for (auto& q : o.pieces_) {
        if (q.hi <= lo || q.lo >= p.hi) continue;
        if (q.lo > lo) r.pieces_.push_back({lo, q.lo});
        lo = std::max(lo, q.hi);
        if (lo >= p.hi) break;
      }
      if (lo < p.hi) r.pieces_.push_back({lo, p.hi});
    }
    return r;
  }

  bool contains_point(const Rat& x) const {
    for (auto& p : pieces_)
      if (p.contains_point(x)) return true;
    return false;
  }

  /// Distance from an interval to the complement of this set (0 if the interval leaves the set).
  Rat dist_to_complement(const Interval& I) const {
    for (auto& p : pieces_)
      if (p.lo <= I.lo && I.hi <= p.hi) return std::min(I.lo - p.lo, p.hi - I.hi);
    return Rat(0);
  }

  bool operator==(const IntervalSet& o) const { return pieces_ == o.pieces_; }

 private:
  std::vector<Interval> pieces_;
};

}  // namespace ttlab
