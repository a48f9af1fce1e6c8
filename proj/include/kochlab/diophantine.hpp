#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kochlab/circle.hpp"

namespace kochlab {

// Continued fraction alpha = [0; a_1, a_2, ...] with q_0 = 1, q_1 = a_1,
// q_{n+1} = a_{n+1} q_n + q_{n-1}.
struct ContinuedFraction {
  std::string source;
  double alpha = 0.0;
  CirclePoint alpha_point;
  std::vector<std::uint64_t> partial_quotients;  // a_1..a_m
  std::vector<std::uint64_t> denominators;       // q_0..q_m

  int depth() const { return static_cast<int>(partial_quotients.size()); }
  std::uint64_t a(int n) const { return partial_quotients.at(n - 1); }
  std::uint64_t q(int n) const { return denominators.at(n); }
};

// Named quadratic irrationals with exact quotient sequences: "golden"
// ((sqrt5 - 1)/2, all ones) and "sqrt2m1" (sqrt2 - 1, all twos).
ContinuedFraction cf_named(const std::string& name, int depth);

// Exact rational p/q in (0, 1). Rationals have finite expansions; asking for
// more quotients than exist raises a precision-exhausted error.
ContinuedFraction cf_from_rational(std::uint64_t p, std::uint64_t q, int depth);

// Decimal string "0.ddd..." read as the interval of reals that round to it
// (half a unit in the last digit); only quotients shared by the whole interval
// are emitted.
ContinuedFraction cf_from_decimal(const std::string& digits, int depth);

// A double read as the interval of reals within half an ulp.
ContinuedFraction cf_from_double(double alpha, int depth);

// Synthetic expansion from explicit quotients; alpha is the finite convergent.
ContinuedFraction cf_from_quotients(const std::vector<std::uint64_t>& quotients);

// Dispatch: a known name, "p/q", or a decimal string.
ContinuedFraction cf_parse(const std::string& spec, int depth);

struct DiophantineCertificate {
  double alpha = 0.0;
  double constant_C = 0.0;
  int checked_depth = 0;
  bool passed = false;
  double worst_ratio = 0.0;
  int worst_index = -1;
  int first_failing_index = -1;  // -1 when passed
  std::vector<double> ratios;    // q_{n+1} / (q_n max(1, ln^2 q_n)), n = 0..m-1
};

DiophantineCertificate is_diophantine_D(const ContinuedFraction& cf, double C);

// Greedy digits over the distinct denominators: q_0 is skipped when it
// duplicates q_1 (a_1 = 1), so digits[i] multiplies q_{first_index + i}.
struct OstrowskiDigits {
  std::uint64_t target = 0;
  int first_index = 1;
  std::vector<std::uint64_t> digits;

  int top_index() const { return first_index + static_cast<int>(digits.size()) - 1; }
  std::uint64_t digit(int k) const { return digits.at(k - first_index); }
};

OstrowskiDigits ostrowski_expand(std::uint64_t N, const ContinuedFraction& cf);
std::uint64_t ostrowski_value(const OstrowskiDigits& d, const ContinuedFraction& cf);

struct OrbitDistance {
  std::uint64_t index = 0;
  double distance = 0.0;
};

// argmin over 0 <= j < N of ||x + j alpha||, smallest j on ties.
OrbitDistance min_orbit_distance(CirclePoint x, std::uint64_t N, CirclePoint alpha);

}  // namespace kochlab
