#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kochlab/circle.hpp"

namespace kochlab {

// Finite union of closed arcs of the circle, kept as sorted disjoint segments
// of [0, 2^64] in raw fixed-point units. All set operations are exact.
class IntervalUnion {
 public:
  using Raw = unsigned __int128;
  struct Segment {
    Raw lo;
    Raw hi;
  };

  IntervalUnion() = default;

  // Arc [center - radius, center + radius].
  void add_ball(CirclePoint center, double radius);
  // Arc starting at `start` of raw length `length`.
  void add_arc(CirclePoint start, std::uint64_t length);

  double measure() const;
  bool contains(CirclePoint x) const;
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }
  const std::vector<Segment>& segments() const { return segments_; }

  IntervalUnion translated(CirclePoint shift) const;
  IntervalUnion intersect(const IntervalUnion& other) const;

  // A point of the union (the left end of its first segment); union must be non-empty.
  CirclePoint witness() const;

 private:
  void insert_linear(Raw lo, Raw hi);
  std::vector<Segment> segments_;
};

// Exact Leb of the intersection of (set + t_i) over all translates.
double translate_intersection_measure(const IntervalUnion& set,
                                      const std::vector<CirclePoint>& translates);

}  // namespace kochlab
