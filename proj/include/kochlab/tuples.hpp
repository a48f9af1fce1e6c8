#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kochlab/birkhoff.hpp"
#include "kochlab/cocycle.hpp"
#include "kochlab/intervals.hpp"
#include "kochlab/kochergin.hpp"

namespace kochlab {

// Union of the 4 q_{n+1} + 1 arcs of radius 1/(q_n ln^5 q_n) around
// c + k alpha, |k| <= 2 q_{n+1}.
struct GcnSet {
  CirclePoint center;
  int level = 0;
  std::uint64_t q_n = 0;
  std::uint64_t q_next = 0;
  double radius = 0.0;
  std::uint64_t arc_count = 0;      // before merging
  double unmerged_measure = 0.0;    // arc_count * 2 radius
  IntervalUnion set;
};

GcnSet build_gcn(CirclePoint c, const ContinuedFraction& cf, int n);

struct G1Level {
  int n = 0;
  bool disjoint = true;
  int first_i = -1;
  int first_j = -1;
  std::optional<CirclePoint> witness;
};

struct G1Report {
  std::vector<G1Level> levels;
  std::optional<G1Level> first_failure;  // shallowest failing level
  bool all_levels = true;
  bool passed = false;  // disjoint at the deepest configured level
};

G1Report check_G1(const std::vector<CirclePoint>& tuple, const ContinuedFraction& cf, int n_lo, int n_hi);

struct G2Row {
  std::uint64_t N = 0;
  std::vector<int> subset;
  double measure = 0.0;      // exact Leb of the intersected translated covers
  double prediction = 0.0;   // (2 * 3N * delta_N)^s ln^2 N
  double paper_target = 0.0; // N^-6
  bool within_prediction = false;
  bool meets_paper_target = false;
};

struct G2Report {
  int subset_size = 0;
  std::vector<G2Row> rows;
  bool passed = false;
};

G2Report check_G2(const std::vector<CirclePoint>& tuple, const std::vector<SmallSumCover>& covers,
                  int subset_size);
G2Report check_G2(const std::vector<CirclePoint>& tuple, const SingularRoof& roof, const ContinuedFraction& cf,
                  const std::vector<std::uint64_t>& N_grid, double epsilon, int subset_size);

struct G3Witness {
  FlowPoint start;
  double T = 0.0;
  std::vector<int> endpoint_violations;
  std::vector<int> window_violations;
};

struct G3Report {
  std::size_t samples = 0;
  std::vector<double> T_grid;
  std::vector<std::size_t> violation_histogram;  // count of (sample, T) by number of violating indices
  std::size_t max_violations = 0;
  double pass_fraction = 0.0;
  std::vector<G3Witness> witnesses;  // (sample, T) with more than 3 violations
  bool passed = false;
};

// Indices violating the endpoint condition or the orbit-window condition
// for one start point and horizon.
G3Witness g3_violations(const KocherginFlow& flow, const BumpParameters& bump, FlowPoint x, double T);

G3Report check_G3(const KocherginFlow& flow, const BumpParameters& bump, const std::vector<double>& T_grid,
                  std::size_t samples, std::uint64_t seed, const ParallelOptions& options = {});

struct TupleVerdict {
  std::vector<CirclePoint> tuple;
  G1Report g1;
  G2Report g2;
  G3Report g3;
  bool overall = false;
};

struct SearchOptions {
  int n_lo = 4;
  int n_hi = 10;
  std::vector<std::uint64_t> N_grid{64, 256};
  double epsilon = 0.01;
  std::vector<double> T_grid{1e2, 1e3};
  std::size_t g3_samples = 200;
  BumpParameters bump;
  std::uint64_t seed = 1;
  std::size_t attempts = 100;
  int workers = 1;
};

std::vector<TupleVerdict> search_good_tuples(const SingularRoof& roof, const ContinuedFraction& cf, int count,
                                             const SearchOptions& options);

TupleVerdict evaluate_tuple(const std::vector<CirclePoint>& tuple, const SingularRoof& roof,
                            const ContinuedFraction& cf, const std::vector<SmallSumCover>& covers,
                            const SearchOptions& options, std::uint64_t g3_seed);

}  // namespace kochlab
