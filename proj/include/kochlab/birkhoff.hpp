#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kochlab/circle.hpp"
#include "kochlab/diophantine.hpp"
#include "kochlab/intervals.hpp"
#include "kochlab/numerics.hpp"
#include "kochlab/random.hpp"
#include "kochlab/roof.hpp"

namespace kochlab {

// Orbit points closer than this to a singularity are treated as hits.
inline constexpr double kSingularityGuard = 1e-15;

// S_N(g)(x) = sum_{j<N} g(x + j alpha), compensated.
template <class G>
double ergodic_sum(G&& g, CirclePoint x, std::uint64_t N, CirclePoint alpha) {
  CompensatedSum sum;
  CirclePoint p = x;
  for (std::uint64_t j = 0; j < N; ++j, p += alpha) sum += g(p);
  return sum.value();
}

enum class ObservableKind { kRoof, kRoofCentered, kRoofDeriv1, kRoofDeriv2, kBvCustom };

// A piecewise-monotone test function of bounded variation on the circle.
struct BvObservable {
  std::string name;
  std::function<double(double)> fn;  // argument in [0, 1)
  double mean = 0.0;
  double variation = 0.0;  // total variation on the circle
};

// The five reference observables used by the Denjoy-Koksma suites.
std::vector<BvObservable> reference_bv_observables();
BvObservable constant_observable(double value);

struct ErgodicSumQuery {
  ObservableKind kind = ObservableKind::kRoof;
  CirclePoint x;
  std::uint64_t N = 1;
  CirclePoint alpha;
};

// Roof kinds are centred at the singularity 0; raises a singularity error
// naming the offending j when the orbit passes within the guard radius.
double ergodic_sum(const ErgodicSumQuery& q, const SingularRoof& roof,
                   const BvObservable* custom = nullptr);

struct DenjoyKoksmaReport {
  std::string observable;
  int level = 0;
  std::uint64_t q_n = 0;
  double max_deviation = 0.0;
  double bound = 0.0;  // 2 Var(h)
  bool passed = false;
};

DenjoyKoksmaReport check_denjoy_koksma(const BvObservable& h, const ContinuedFraction& cf, int n,
                                       const std::vector<CirclePoint>& grid);

struct ScanRow {
  std::uint64_t N = 0;
  double value = 0.0;      // the per-N statistic (max ratio, min sum, ...)
  double reference = 0.0;  // the comparison bound or normaliser
  double raw = 0.0;        // unnormalised statistic behind `value`
};

struct ResidualScanReport {
  std::vector<ScanRow> rows;  // value = max ratio, reference = A N^g ln^5 N
  double slope = 0.0;         // log-log fit of max ratio against N
  double max_ratio = 0.0;
  double calibration = 0.0;   // frozen constant the ratio is held against
  bool passed = false;
};

// R = |S_N(f) - N - f(x_min,N)| normalised by A N^g ln^5 N. N_grid must be
// increasing; sums are accumulated incrementally along each orbit.
ResidualScanReport dk0_residual_scan(const SingularRoof& roof, const ContinuedFraction& cf,
                                     const std::vector<std::uint64_t>& N_grid,
                                     const std::vector<CirclePoint>& x_grid, double calibration,
                                     int workers = 1);

struct LowerBoundReport {
  std::vector<ScanRow> rows;  // value = min S_N(f''), reference = A N^{2+g} / ln^10 N
  std::uint64_t N0 = 16;
  bool passed = false;
};

LowerBoundReport second_derivative_lower_bound(const SingularRoof& roof, const ContinuedFraction& cf,
                                               const std::vector<std::uint64_t>& N_grid,
                                               const std::vector<CirclePoint>& x_grid,
                                               std::uint64_t N0 = 16, int workers = 1);

struct BvSumReport {
  std::vector<ScanRow> rows;  // value = sup |S_N h - N mean| / ln^4 N
  double slope = 0.0;
  double max_ratio = 0.0;
};

BvSumReport bv_sum_scan(const BvObservable& h, const ContinuedFraction& cf,
                        const std::vector<std::uint64_t>& N_grid,
                        const std::vector<CirclePoint>& x_grid, int workers = 1);

struct SmallSumCover {
  std::uint64_t N = 0;
  double epsilon = 0.0;
  double threshold = 0.0;  // N^{g^2 + eps}
  double radius = 0.0;     // N^{-(1 + g/5)}
  std::vector<CirclePoint> centers;
  std::size_t grid_points = 0;
  std::size_t grid_hits = 0;  // grid points inside A_N
  std::size_t escapes = 0;    // grid points of A_N outside the cover
  double measured_A_N = 0.0;
  double cover_measure = 0.0;

  IntervalUnion as_union() const;
};

struct CoverOptions {
  double grid_factor = 10.0;  // grid has grid_factor * N^1.3 points
  int workers = 1;
};

// Covers A_N = {|S_N(f - 1)| <= N^{g^2+eps}} by <= 3N balls of radius delta_N,
// following the partition of the circle by the points -i alpha.
SmallSumCover compute_AN_cover(const SingularRoof& roof, CirclePoint alpha, std::uint64_t N,
                               double epsilon, const CoverOptions& options = {});

// Uniform grid of `count` midpoints.
std::vector<CirclePoint> uniform_grid(std::size_t count);

struct FewTranslatesReport {
  int subset_size = 0;
  std::size_t samples = 0;
  double set_measure = 0.0;
  double expected = 0.0;  // Leb(A)^s
  double mean = 0.0;      // Monte Carlo mean of Leb(cap (A + t_i)) over uniform t
  double standard_error = 0.0;
  double z_score = 0.0;
  bool passed = false;    // |mean - expected| <= 5 standard errors
};

FewTranslatesReport few_translates_check(const IntervalUnion& set, int subset_size, std::size_t samples,
                                         std::uint64_t seed, const ParallelOptions& options = {});

}  // namespace kochlab
