#pragma once

#include <cmath>
#include <cstdint>

namespace kochlab {

// A point of the circle R/Z stored as a 64-bit binary fraction. Addition wraps
// exactly, so rotation orbits are reversible and free of accumulated rounding,
// and differences of nearby points keep full relative precision.
class CirclePoint {
 public:
  constexpr CirclePoint() = default;
  static constexpr CirclePoint from_raw(std::uint64_t raw) { return CirclePoint(raw); }

  static CirclePoint from_double(double x) {
    double frac = x - std::floor(x);
    long double scaled = std::ldexp(static_cast<long double>(frac), 64);
    long double rounded = std::nearbyint(scaled);
    if (rounded >= 18446744073709551616.0L) return CirclePoint(0);
    return CirclePoint(static_cast<std::uint64_t>(rounded));
  }

  constexpr std::uint64_t raw() const { return raw_; }

  // Representative in [0, 1).
  double value() const { return std::ldexp(static_cast<double>(raw_), -64); }

  // 1 - value(), computed without cancellation.
  double complement() const {
    if (raw_ == 0) return 1.0;
    return std::ldexp(static_cast<double>(0 - raw_), -64);
  }

  // Distance to 0 on the circle, ||x||.
  double norm() const {
    return raw_ <= (std::uint64_t{1} << 63) ? value() : complement();
  }

  constexpr CirclePoint operator+(CirclePoint o) const { return CirclePoint(raw_ + o.raw_); }
  constexpr CirclePoint operator-(CirclePoint o) const { return CirclePoint(raw_ - o.raw_); }
  constexpr CirclePoint operator-() const { return CirclePoint(0 - raw_); }
  CirclePoint& operator+=(CirclePoint o) { raw_ += o.raw_; return *this; }
  CirclePoint& operator-=(CirclePoint o) { raw_ -= o.raw_; return *this; }

  // n-fold sum with wraparound; exact for any signed n.
  constexpr CirclePoint times(std::int64_t n) const {
    return CirclePoint(raw_ * static_cast<std::uint64_t>(n));
  }

  constexpr bool operator==(const CirclePoint&) const = default;
  constexpr auto operator<=>(const CirclePoint&) const = default;

 private:
  constexpr explicit CirclePoint(std::uint64_t raw) : raw_(raw) {}
  std::uint64_t raw_ = 0;
};

inline double circle_distance(CirclePoint a, CirclePoint b) { return (a - b).norm(); }

// Raw length of an arc of the given real length (clamped to the full circle).
inline std::uint64_t arc_raw(double length) {
  if (length <= 0) return 0;
  if (length >= 1) return ~std::uint64_t{0};
  return CirclePoint::from_double(length).raw();
}

}  // namespace kochlab
