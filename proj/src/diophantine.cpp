#include "kochlab/diophantine.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <cmath>
#include <limits>

#include "kochlab/error.hpp"

namespace kochlab {
namespace {

using boost::multiprecision::cpp_int;

std::uint64_t checked_denominator(std::uint64_t a, std::uint64_t q, std::uint64_t q_prev) {
  unsigned __int128 v = static_cast<unsigned __int128>(a) * q + q_prev;
  if (v > std::numeric_limits<std::uint64_t>::max()) {
    raise(ErrorCode::kDomain, "convergent denominator overflows 64 bits");
  }
  return static_cast<std::uint64_t>(v);
}

void fill_denominators(ContinuedFraction& cf) {
  cf.denominators.assign(1, 1);
  std::uint64_t prev = 0;
  for (std::uint64_t a : cf.partial_quotients) {
    std::uint64_t next = checked_denominator(a, cf.denominators.back(), prev);
    prev = cf.denominators.back();
    cf.denominators.push_back(next);
  }
}

// round(p / q * 2^64) reduced mod 2^64.
CirclePoint point_from_ratio(const cpp_int& p, const cpp_int& q) {
  cpp_int scaled = (p << 64);
  cpp_int r = (2 * scaled + q) / (2 * q);
  r &= (cpp_int(1) << 64) - 1;
  return CirclePoint::from_raw(static_cast<std::uint64_t>(r));
}

double ratio_to_double(const cpp_int& p, const cpp_int& q) {
  return point_from_ratio(p, q).value();
}

void check_depth(int depth) {
  if (depth < 1) raise(ErrorCode::kDomain, "continued-fraction depth must be >= 1");
}

// Expands every real in [lo_p/lo_q, hi_p/hi_q] simultaneously; stops with a
// precision error once the endpoints disagree on the next quotient.
std::vector<std::uint64_t> certified_quotients(cpp_int lo_p, cpp_int lo_q, cpp_int hi_p,
                                               cpp_int hi_q, int depth) {
  std::vector<std::uint64_t> out;
  while (static_cast<int>(out.size()) < depth) {
    if (lo_p == 0 || hi_p == 0) {
      raise(ErrorCode::kPrecisionExhausted,
            "input certifies only " + std::to_string(out.size()) + " partial quotients");
    }
    // x -> 1/x reverses the order of the endpoints.
    cpp_int a_lo = hi_q / hi_p;
    cpp_int a_hi = lo_q / lo_p;
    bool exact_hi = (lo_q % lo_p) == 0;
    if (a_lo != a_hi || exact_hi) {
      raise(ErrorCode::kPrecisionExhausted,
            "input certifies only " + std::to_string(out.size()) + " partial quotients");
    }
    if (a_lo > cpp_int(std::numeric_limits<std::uint64_t>::max())) {
      raise(ErrorCode::kDomain, "partial quotient exceeds 64 bits");
    }
    std::uint64_t a = static_cast<std::uint64_t>(a_lo);
    out.push_back(a);
    cpp_int new_lo_p = hi_q - a_lo * hi_p, new_lo_q = hi_p;
    cpp_int new_hi_p = lo_q - a_lo * lo_p, new_hi_q = lo_p;
    lo_p = new_lo_p;
    lo_q = new_lo_q;
    hi_p = new_hi_p;
    hi_q = new_hi_q;
  }
  return out;
}

ContinuedFraction finish(std::string source, std::vector<std::uint64_t> quotients,
                         CirclePoint alpha_point) {
  ContinuedFraction cf;
  cf.source = std::move(source);
  cf.partial_quotients = std::move(quotients);
  cf.alpha_point = alpha_point;
  cf.alpha = alpha_point.value();
  fill_denominators(cf);
  return cf;
}

}  // namespace

ContinuedFraction cf_named(const std::string& name, int depth) {
  check_depth(depth);
  cpp_int one64 = cpp_int(1) << 64;
  if (name == "golden") {
    cpp_int root = boost::multiprecision::sqrt(cpp_int(5) << 128);
    cpp_int raw = (root - one64) / 2;
    return finish(name, std::vector<std::uint64_t>(depth, 1),
                  CirclePoint::from_raw(static_cast<std::uint64_t>(raw)));
  }
  if (name == "sqrt2m1") {
    cpp_int root = boost::multiprecision::sqrt(cpp_int(2) << 128);
    cpp_int raw = root - one64;
    return finish(name, std::vector<std::uint64_t>(depth, 2),
                  CirclePoint::from_raw(static_cast<std::uint64_t>(raw)));
  }
  raise(ErrorCode::kDomain, "unknown named rotation '" + name + "'");
}

ContinuedFraction cf_from_rational(std::uint64_t p, std::uint64_t q, int depth) {
  check_depth(depth);
  if (q == 0 || p == 0 || p >= q) raise(ErrorCode::kDomain, "rational rotation must lie in (0,1)");
  std::vector<std::uint64_t> out;
  std::uint64_t num = p, den = q;
  while (static_cast<int>(out.size()) < depth) {
    if (num == 0) {
      raise(ErrorCode::kPrecisionExhausted, std::to_string(p) + "/" + std::to_string(q) +
                                                " has only " + std::to_string(out.size()) +
                                                " partial quotients");
    }
    out.push_back(den / num);
    std::uint64_t rem = den % num;
    den = num;
    num = rem;
  }
  return finish(std::to_string(p) + "/" + std::to_string(q), std::move(out),
                point_from_ratio(cpp_int(p), cpp_int(q)));
}

ContinuedFraction cf_from_decimal(const std::string& digits, int depth) {
  check_depth(depth);
  std::string s = digits;
  if (s.rfind("0.", 0) == 0) s = s.substr(2);
  else if (!s.empty() && s[0] == '.') s = s.substr(1);
  else raise(ErrorCode::kDomain, "decimal rotation must be written as 0.ddd");
  if (s.empty()) raise(ErrorCode::kDomain, "decimal rotation has no digits");
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      raise(ErrorCode::kDomain, "malformed decimal rotation '" + digits + "'");
    }
  }
  cpp_int num(s);
  cpp_int den = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(s.size()));
  if (num == 0) raise(ErrorCode::kDomain, "rotation must lie in (0,1)");
  // [num - 1/2, num + 1/2] / den.
  cpp_int lo_p = 2 * num - 1, hi_p = 2 * num + 1, q2 = 2 * den;
  auto quotients = certified_quotients(lo_p, q2, hi_p, q2, depth);
  return finish(digits, std::move(quotients), point_from_ratio(num, den));
}

ContinuedFraction cf_from_double(double alpha, int depth) {
  check_depth(depth);
  if (!(alpha > 0.0 && alpha < 1.0)) raise(ErrorCode::kDomain, "rotation must lie in (0,1)");
  int exp2 = 0;
  double mant = std::frexp(alpha, &exp2);
  // alpha = m * 2^(exp2 - 53) with integer m; half ulp = 2^(exp2 - 54).
  auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
  int shift = 54 - exp2;
  cpp_int den = cpp_int(1) << shift;
  cpp_int lo_p = 2 * cpp_int(m) - 1, hi_p = 2 * cpp_int(m) + 1;
  auto quotients = certified_quotients(lo_p, den, hi_p, den, depth);
  return finish("double", std::move(quotients), CirclePoint::from_double(alpha));
}

ContinuedFraction cf_from_quotients(const std::vector<std::uint64_t>& quotients) {
  if (quotients.empty()) raise(ErrorCode::kDomain, "synthetic expansion needs quotients");
  for (auto a : quotients) {
    if (a == 0) raise(ErrorCode::kDomain, "partial quotients must be positive");
  }
  // Evaluate [0; a_1..a_m] from the tail.
  cpp_int p = 0, q = 1;
  for (auto it = quotients.rbegin(); it != quotients.rend(); ++it) {
    cpp_int np = q;
    cpp_int nq = cpp_int(*it) * q + p;
    p = np;
    q = nq;
  }
  ContinuedFraction cf = finish("synthetic", quotients, point_from_ratio(p, q));
  cf.alpha = ratio_to_double(p, q);
  return cf;
}

ContinuedFraction cf_parse(const std::string& spec, int depth) {
  if (spec == "golden" || spec == "sqrt2m1") return cf_named(spec, depth);
  auto slash = spec.find('/');
  if (slash != std::string::npos) {
    try {
      std::size_t used = 0;
      std::uint64_t p = std::stoull(spec.substr(0, slash), &used);
      std::uint64_t q = std::stoull(spec.substr(slash + 1));
      return cf_from_rational(p, q, depth);
    } catch (const std::logic_error&) {
      raise(ErrorCode::kDomain, "malformed rational rotation '" + spec + "'");
    }
  }
  return cf_from_decimal(spec, depth);
}

DiophantineCertificate is_diophantine_D(const ContinuedFraction& cf, double C) {
  if (cf.depth() < 2) raise(ErrorCode::kDomain, "class-D check needs depth >= 2");
  if (!(C > 0)) raise(ErrorCode::kDomain, "class-D constant must be positive");
  DiophantineCertificate cert;
  cert.alpha = cf.alpha;
  cert.constant_C = C;
  cert.checked_depth = cf.depth();
  for (int n = 0; n < cf.depth(); ++n) {
    double qn = static_cast<double>(cf.q(n));
    double l = std::log(qn);
    double ratio = static_cast<double>(cf.q(n + 1)) / (qn * std::max(1.0, l * l));
    cert.ratios.push_back(ratio);
    if (ratio > cert.worst_ratio) {
      cert.worst_ratio = ratio;
      cert.worst_index = n;
    }
    if (ratio > C && cert.first_failing_index < 0) cert.first_failing_index = n;
  }
  cert.passed = cert.worst_ratio <= C;
  return cert;
}

OstrowskiDigits ostrowski_expand(std::uint64_t N, const ContinuedFraction& cf) {
  if (N == 0) raise(ErrorCode::kDomain, "Ostrowski expansion needs N >= 1");
  if (N >= cf.denominators.back()) {
    raise(ErrorCode::kDepthInsufficient,
          "N = " + std::to_string(N) + " is not below the last tabulated denominator");
  }
  OstrowskiDigits out;
  out.target = N;
  out.first_index = cf.a(1) == 1 ? 1 : 0;
  int m = out.first_index;
  while (m + 1 <= cf.depth() && cf.q(m + 1) <= N) ++m;
  out.digits.assign(m - out.first_index + 1, 0);
  std::uint64_t rest = N;
  for (int k = m; k >= out.first_index && rest > 0; --k) {
    std::uint64_t b = rest / cf.q(k);
    out.digits[k - out.first_index] = b;
    rest -= b * cf.q(k);
  }
  return out;
}

std::uint64_t ostrowski_value(const OstrowskiDigits& d, const ContinuedFraction& cf) {
  std::uint64_t total = 0;
  for (int k = d.first_index; k <= d.top_index(); ++k) total += d.digit(k) * cf.q(k);
  return total;
}

OrbitDistance min_orbit_distance(CirclePoint x, std::uint64_t N, CirclePoint alpha) {
  if (N == 0) raise(ErrorCode::kDomain, "orbit length must be >= 1");
  OrbitDistance best{0, x.norm()};
  CirclePoint p = x;
  for (std::uint64_t j = 1; j < N; ++j) {
    p += alpha;
    double d = p.norm();
    if (d < best.distance) best = {j, d};
  }
  return best;
}

}  // namespace kochlab
