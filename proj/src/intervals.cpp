#include "kochlab/intervals.hpp"

#include <algorithm>
#include <cmath>

#include "kochlab/error.hpp"

namespace kochlab {
namespace {

constexpr IntervalUnion::Raw kFull = static_cast<IntervalUnion::Raw>(1) << 64;

}  // namespace

void IntervalUnion::insert_linear(Raw lo, Raw hi) {
  if (hi < lo) return;
  // Merge into the sorted list.
  auto it = std::lower_bound(segments_.begin(), segments_.end(), lo,
                             [](const Segment& s, Raw v) { return s.hi < v; });
  Segment merged{lo, hi};
  auto first = it;
  while (it != segments_.end() && it->lo <= merged.hi) {
    merged.lo = std::min(merged.lo, it->lo);
    merged.hi = std::max(merged.hi, it->hi);
    ++it;
  }
  it = segments_.erase(first, it);
  segments_.insert(it, merged);
}

void IntervalUnion::add_arc(CirclePoint start, std::uint64_t length) {
  Raw lo = start.raw();
  Raw hi = lo + length;
  if (hi <= kFull) {
    insert_linear(lo, hi);
  } else {
    insert_linear(lo, kFull);
    insert_linear(0, hi - kFull);
  }
}

void IntervalUnion::add_ball(CirclePoint center, double radius) {
  if (radius < 0) return;
  if (radius >= 0.5) {
    insert_linear(0, kFull);
    return;
  }
  std::uint64_t r = arc_raw(radius);
  add_arc(center - CirclePoint::from_raw(r), 2 * r);
}

double IntervalUnion::measure() const {
  long double total = 0;
  for (const auto& s : segments_) total += static_cast<long double>(s.hi - s.lo);
  return static_cast<double>(std::ldexp(total, -64));
}

bool IntervalUnion::contains(CirclePoint x) const {
  Raw v = x.raw();
  auto it = std::lower_bound(segments_.begin(), segments_.end(), v,
                             [](const Segment& s, Raw val) { return s.hi < val; });
  if (it != segments_.end() && it->lo <= v) return true;
  // x = 0 also equals the point 2^64.
  return v == 0 && !segments_.empty() && segments_.back().hi == kFull;
}

IntervalUnion IntervalUnion::translated(CirclePoint shift) const {
  IntervalUnion out;
  for (const auto& s : segments_) {
    Raw len = s.hi - s.lo;
    if (len >= kFull) {
      out.insert_linear(0, kFull);
      continue;
    }
    CirclePoint start = CirclePoint::from_raw(static_cast<std::uint64_t>(s.lo)) + shift;
    out.add_arc(start, static_cast<std::uint64_t>(len));
  }
  return out;
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
  IntervalUnion out;
  std::size_t i = 0, j = 0;
  const auto& a = segments_;
  const auto& b = other.segments_;
  while (i < a.size() && j < b.size()) {
    Raw lo = std::max(a[i].lo, b[j].lo);
    Raw hi = std::min(a[i].hi, b[j].hi);
    if (lo <= hi) out.segments_.push_back({lo, hi});
    if (a[i].hi < b[j].hi) ++i; else ++j;
  }
  return out;
}

CirclePoint IntervalUnion::witness() const {
  if (segments_.empty()) raise(ErrorCode::kPrecondition, "empty interval union has no witness");
  return CirclePoint::from_raw(static_cast<std::uint64_t>(segments_.front().lo));
}

double translate_intersection_measure(const IntervalUnion& set,
                                      const std::vector<CirclePoint>& translates) {
  if (translates.empty()) return set.measure();
  IntervalUnion acc = set.translated(translates[0]);
  for (std::size_t i = 1; i < translates.size() && !acc.empty(); ++i) {
    acc = acc.intersect(set.translated(translates[i]));
  }
  return acc.measure();
}

}  // namespace kochlab
