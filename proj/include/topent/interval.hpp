#pragma once

#include <algorithm>
#include <vector>

#include "topent/errors.hpp"

namespace topent {

// Closed interval [lo, hi]. Empty intervals are not representable; use
// IntervalSet for possibly-empty results.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

inline bool intersects(const Interval& a, const Interval& b) {
  return a.lo <= b.hi && b.lo <= a.hi;
}

// Finite union of closed intervals kept canonical: sorted by left endpoint,
// pairwise disjoint, touching pieces merged. The canonical form of a set is
// unique, so == is set equality.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(Interval iv) {
    if (iv.lo <= iv.hi) parts_.push_back(iv);
  }

  static IntervalSet from_parts(std::vector<Interval> parts) {
    std::erase_if(parts, [](const Interval& iv) { return !(iv.lo <= iv.hi); });
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
      return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });
    IntervalSet out;
    for (const Interval& iv : parts) {
      if (!out.parts_.empty() && iv.lo <= out.parts_.back().hi) {
        out.parts_.back().hi = std::max(out.parts_.back().hi, iv.hi);
      } else {
        out.parts_.push_back(iv);
      }
    }
    return out;
  }

  bool empty() const { return parts_.empty(); }
  const std::vector<Interval>& parts() const { return parts_; }

  double total_length() const {
    double sum = 0.0;
    for (const Interval& iv : parts_) sum += iv.length();
    return sum;
  }

  // Diameter of the set: sup distance between two member points.
  double diameter() const {
    if (parts_.empty()) return 0.0;
    return parts_.back().hi - parts_.front().lo;
  }

  Interval hull() const {
    if (parts_.empty()) throw InvalidArgument("hull of empty interval set");
    return {parts_.front().lo, parts_.back().hi};
  }

  bool contains(double x) const {
    for (const Interval& iv : parts_) {
      if (iv.contains(x)) return true;
      if (iv.lo > x) break;
    }
    return false;
  }

  // A connected closed interval lies in a canonical union iff it lies in a
  // single component.
  bool contains(const Interval& iv) const {
    for (const Interval& part : parts_) {
      if (part.lo <= iv.lo && iv.hi <= part.hi) return true;
    }
    return false;
  }

  bool contains(const IntervalSet& other) const {
    return std::all_of(other.parts_.begin(), other.parts_.end(),
                       [this](const Interval& iv) { return contains(iv); });
  }

  bool operator==(const IntervalSet& other) const {
    if (parts_.size() != other.parts_.size()) return false;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i].lo != other.parts_[i].lo || parts_[i].hi != other.parts_[i].hi) return false;
    }
    return true;
  }

 private:
  std::vector<Interval> parts_;
};

inline IntervalSet intersect(const IntervalSet& set, const Interval& iv) {
  std::vector<Interval> out;
  for (const Interval& part : set.parts()) {
    double lo = std::max(part.lo, iv.lo);
    double hi = std::min(part.hi, iv.hi);
    if (lo <= hi) out.push_back({lo, hi});
  }
  return IntervalSet::from_parts(std::move(out));
}

inline IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> out;
  for (const Interval& pa : a.parts()) {
    for (const Interval& pb : b.parts()) {
      double lo = std::max(pa.lo, pb.lo);
      double hi = std::min(pa.hi, pb.hi);
      if (lo <= hi) out.push_back({lo, hi});
    }
  }
  return IntervalSet::from_parts(std::move(out));
}

inline IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> out(a.parts());
  out.insert(out.end(), b.parts().begin(), b.parts().end());
  return IntervalSet::from_parts(std::move(out));
}

}  // namespace topent
