#include "kochlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "kochlab/birkhoff.hpp"
#include "kochlab/clt.hpp"
#include "kochlab/cocycle.hpp"
#include "kochlab/diophantine.hpp"
#include "kochlab/error.hpp"
#include "kochlab/kochergin.hpp"
#include "kochlab/plot.hpp"
#include "kochlab/report_io.hpp"
#include "kochlab/roof.hpp"
#include "kochlab/stats.hpp"
#include "kochlab/tuples.hpp"

namespace kochlab {

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  raise(ErrorCode::kConfigInvalid, (where.empty() ? std::string("config") : where) + ": " + what);
}

// Reads one JSON object, records the effective value of every key (defaults
// included) and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const Json& object, std::string path) : path_(std::move(path)) {
    if (!object.is_object()) invalid(path_, "expected an object");
    object_ = object;
    effective_ = Json::object();
  }

  double number(const std::string& key, double fallback, const std::function<bool(double)>& ok,
                const std::string& rule) {
    double v = fallback;
    if (const Json* j = find(key)) {
      if (!j->is_number()) invalid(where(key), "expected a number");
      v = j->get<double>();
    }
    if (!std::isfinite(v) || !ok(v)) invalid(where(key), rule);
    effective_[key] = v;
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo, std::int64_t hi) {
    std::int64_t v = fallback;
    if (const Json* j = find(key)) v = as_integer(*j, where(key));
    if (v < lo || v > hi) {
      invalid(where(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    effective_[key] = v;
    return v;
  }

  std::uint64_t unsigned_required(const std::string& key) {
    const Json* j = find(key);
    if (!j) invalid(where(key), "is required");
    if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<std::int64_t>() >= 0)) {
      invalid(where(key), "expected a non-negative integer");
    }
    std::uint64_t v = j->get<std::uint64_t>();
    effective_[key] = v;
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    std::string v = fallback;
    if (const Json* j = find(key)) {
      if (!j->is_string()) invalid(where(key), "expected a string");
      v = j->get<std::string>();
    }
    effective_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback,
                              const std::function<bool(double)>& ok, const std::string& rule,
                              std::size_t min_size = 1) {
    std::vector<double> v = fallback;
    if (const Json* j = find(key)) {
      if (!j->is_array()) invalid(where(key), "expected an array of numbers");
      v.clear();
      for (const Json& e : *j) {
        if (!e.is_number()) invalid(where(key), "expected an array of numbers");
        v.push_back(e.get<double>());
      }
    }
    if (v.size() < min_size) invalid(where(key), "needs at least " + std::to_string(min_size) + " entries");
    for (double x : v) {
      if (!std::isfinite(x) || !ok(x)) invalid(where(key), rule);
    }
    effective_[key] = v;
    return v;
  }

  std::vector<std::uint64_t> counts(const std::string& key, const std::vector<std::uint64_t>& fallback,
                                    std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> v = fallback;
    if (const Json* j = find(key)) {
      if (!j->is_array()) invalid(where(key), "expected an array of integers");
      v.clear();
      for (const Json& e : *j) {
        std::int64_t x = as_integer(e, where(key));
        if (x < 0) invalid(where(key), "entries must be non-negative");
        v.push_back(static_cast<std::uint64_t>(x));
      }
    }
    if (v.empty()) invalid(where(key), "needs at least one entry");
    for (std::uint64_t x : v) {
      if (x < lo || x > hi) {
        invalid(where(key), "entries must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
    }
    effective_[key] = v;
    return v;
  }

  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& fallback) {
    std::vector<std::string> v = fallback;
    if (const Json* j = find(key)) {
      if (!j->is_array()) invalid(where(key), "expected an array of strings");
      v.clear();
      for (const Json& e : *j) {
        if (!e.is_string()) invalid(where(key), "expected an array of strings");
        v.push_back(e.get<std::string>());
      }
    }
    if (v.empty()) invalid(where(key), "needs at least one entry");
    effective_[key] = v;
    return v;
  }

  Reader child(const std::string& key) {
    const Json* j = find(key);
    return Reader(j ? *j : Json::object(), where(key));
  }
  void adopt(const std::string& key, Reader& child) {
    child.finish();
    effective_[key] = child.effective_;
  }

  const Json& raw() const { return object_; }
  bool has(const std::string& key) const { return object_.contains(key); }
  void mark_used(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!used_.count(it.key())) invalid(where(it.key()), "unknown key");
    }
  }

  Json effective() const { return effective_; }
  const std::string& path() const { return path_; }

 private:
  const Json* find(const std::string& key) {
    used_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  static std::int64_t as_integer(const Json& j, const std::string& at) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
      double d = j.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    invalid(at, "expected an integer");
  }

  Json object_;
  Json effective_;
  std::string path_;
  std::set<std::string> used_;
};

auto positive = [](double x) { return x > 0; };
auto non_negative = [](double x) { return x >= 0; };

struct Calibration {
  double dk0_ratio = 0.0;
  double orbital_C = 0.0;
  double analytic_q99 = 0.0;
  double s2_C = 0.1;
  double clt_gain = 50.0;
};

struct Model {
  std::string alpha = "golden";
  int depth = 40;
  double class_constant = 2.0;
  double gamma = 1.0 / 3.0;
  double coeff_a = 0.1;
  std::vector<double> tuple{0.11, 0.37, 0.52, 0.83};
  BumpParameters bump;
  int analytic_L = 2;
  int analytic_degree = 10;
  Calibration calibration;
};

// Shared, lazily built objects for one run.
struct Context {
  const ExperimentConfig* config = nullptr;
  Model model;
  ContinuedFraction cf;
  SingularRoof roof;
  CompositeRoof composite;
  KocherginFlow flow;
  ParallelOptions parallel;
  std::filesystem::path out_dir;
  std::map<std::string, Json> finished;  // statistics of suites already run

  const BumpCocycle& bump() {
    if (!bump_) bump_ = std::make_unique<BumpCocycle>(flow, model.bump);
    return *bump_;
  }
  FlowPoint bump_center() const { return {farthest_from_singularities(composite.singularities), 0.3}; }

  std::uint64_t seed_for(const std::string& suite) const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : suite) h = (h ^ c) * 1099511628211ULL;
    return derive_seed(config->seed, h, 0);
  }

  std::string write(SuiteResult& out, const std::string& name, const std::string& content) {
    write_file((out_dir / name).string(), content);
    out.artifacts.push_back(name);
    return name;
  }
  std::string write_csv(SuiteResult& out, const std::string& name, const CsvTable& table) {
    return write(out, name, to_csv(table));
  }

 private:
  std::unique_ptr<BumpCocycle> bump_;
};

void check(SuiteResult& out, bool ok, const std::string& invariant) {
  if (!ok) out.failed_invariants.push_back(invariant);
}

std::string num(double x) { return format_number(x); }
std::string num(std::uint64_t x) { return std::to_string(x); }
std::string num(std::int64_t x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }
std::string flag(bool b) { return b ? "true" : "false"; }

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::vector<CirclePoint> random_points(std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  std::vector<CirclePoint> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(CirclePoint::from_raw(rng.bits()));
  return out;
}

// ---------------------------------------------------------------- suites

struct Suite {
  std::string name;
  std::string anchor;
  // Validates the parameters; with a context, also runs the suite.
  std::function<void(Reader&, Context*, SuiteResult&)> body;
};

void suite_cf(Reader&, Context* ctx, SuiteResult& out) {
  if (!ctx) return;
  const ContinuedFraction& cf = ctx->cf;
  DiophantineCertificate cert = is_diophantine_D(cf, ctx->model.class_constant);
  bool recurrence = cf.q(0) == 1 && cf.q(1) == cf.a(1);
  bool best = true;
  CsvTable t{{"n", "a_n", "q_n", "class_ratio", "q_n_alpha_distance", "inverse_next"}, {}};
  for (int n = 1; n <= cf.depth(); ++n) {
    if (n >= 2) recurrence = recurrence && cf.q(n) == cf.a(n) * cf.q(n - 1) + cf.q(n - 2);
    double dist = cf.alpha_point.times(static_cast<std::int64_t>(cf.q(n))).norm();
    double inv = n < cf.depth() ? 1.0 / static_cast<double>(cf.q(n + 1)) : 0.0;
    // The stored alpha carries 64 bits, so the distance is resolved only while q_n q_{n+1} << 2^64.
    if (n < cf.depth() && cf.q(n + 1) <= (std::uint64_t{1} << 28)) best = best && dist < inv;
    t.rows.push_back({num(n), num(cf.a(n)), num(cf.q(n)), num(n - 1 < static_cast<int>(cert.ratios.size()) ? cert.ratios[n - 1] : 0.0),
                      num(dist), num(inv)});
  }
  bool ostrowski = true;
  for (std::uint64_t N : {1ULL, 100ULL, 12345ULL, 1000000ULL}) {
    if (N >= cf.q(cf.depth())) continue;
    ostrowski = ostrowski && ostrowski_value(ostrowski_expand(N, cf), cf) == N;
  }
  ctx->write_csv(out, "cf.csv", t);
  check(out, cert.passed, "Diophantine class certificate q_{n+1} < C q_n ln^2 q_n");
  check(out, recurrence, "denominator recurrence");
  check(out, best, "best approximation ||q_n alpha|| < 1/q_{n+1}");
  check(out, ostrowski, "Ostrowski representation sums back to N");
  out.statistics = {{"source", cf.source},
                    {"alpha", cf.alpha},
                    {"depth", cf.depth()},
                    {"class_constant", cert.constant_C},
                    {"worst_ratio", cert.worst_ratio},
                    {"worst_index", cert.worst_index},
                    {"certificate_passed", cert.passed}};
}

void suite_roof(Reader& p, Context* ctx, SuiteResult& out) {
  int grid = static_cast<int>(p.integer("grid_points", 2000, 10, 1000000));
  if (!ctx) return;
  RoofCheckReport r = check_roof(ctx->roof, ctx->composite, grid);
  check(out, r.symmetry_gap <= 1e-12 * ctx->roof.minimum(), "symmetry f(t) = f(1 - t)");
  check(out, r.min_second > 0, "convexity f'' > 0");
  check(out, r.fd_first_error <= 1e-4 && r.fd_second_error <= 1e-4, "finite differences match derivatives to 1e-4");
  check(out, std::fabs(r.centered_integral) <= 1e-8, "centred roof integrates to zero");
  check(out, std::fabs(r.composite_mean - r.composite_count) <= 1e-3 * r.composite_count,
        "composite roof has mean equal to the singularity count");
  out.statistics = {{"gamma", ctx->roof.gamma},
                    {"coeff_a", ctx->roof.coeff_a},
                    {"offset_b", ctx->roof.offset_b},
                    {"asymptotic_A", ctx->roof.asymptotic_A},
                    {"minimum", ctx->roof.minimum()},
                    {"composite_inf", ctx->composite.inf_value},
                    {"symmetry_gap", r.symmetry_gap},
                    {"min_second_derivative", r.min_second},
                    {"fd_first_error", r.fd_first_error},
                    {"fd_second_error", r.fd_second_error},
                    {"centered_integral", r.centered_integral},
                    {"composite_mean", r.composite_mean}};
}

void suite_denjoy_koksma(Reader& p, Context* ctx, SuiteResult& out) {
  auto rotations = p.strings("rotations", {"golden", "sqrt2m1"});
  double q_max = p.number("q_max", 1e5, [](double x) { return x >= 1 && x <= 1e7; }, "must lie in [1, 1e7]");
  auto grid_n = p.integer("grid_points", 1000, 1, 1000000);
  for (const auto& r : rotations) {
    try {
      cf_parse(r, 40);
    } catch (const Error& e) {
      invalid(p.path() + ".rotations", e.what());
    }
  }
  if (!ctx) return;
  std::vector<CirclePoint> grid = uniform_grid(static_cast<std::size_t>(grid_n));
  CsvTable t{{"rotation", "observable", "n", "q_n", "max_deviation", "bound", "passed"}, {}};
  std::size_t cases = 0, passes = 0;
  double worst = 0.0;
  for (const auto& r : rotations) {
    ContinuedFraction cf = cf_parse(r, 40);
    for (const BvObservable& h : reference_bv_observables()) {
      std::uint64_t last = 0;
      for (int n = 0; n <= cf.depth() && cf.q(n) <= q_max; ++n) {
        if (cf.q(n) == last) continue;
        last = cf.q(n);
        DenjoyKoksmaReport rep = check_denjoy_koksma(h, cf, n, grid);
        ++cases;
        passes += rep.passed;
        worst = std::max(worst, rep.max_deviation / rep.bound);
        t.rows.push_back({r, h.name, num(n), num(rep.q_n), num(rep.max_deviation), num(rep.bound), flag(rep.passed)});
      }
    }
  }
  ctx->write_csv(out, "denjoy_koksma.csv", t);
  check(out, passes == cases, "|S_{q_n} h - q_n mean| <= 2 Var(h) + 1e-9 in every case");
  out.statistics = {{"cases", cases}, {"passed_cases", passes}, {"worst_deviation_over_bound", worst}};
}

void suite_dk0(Reader& p, Context* ctx, SuiteResult& out) {
  std::vector<std::uint64_t> def;
  for (int k = 6; k <= 16; ++k) def.push_back(std::uint64_t{1} << k);
  auto Ns = p.counts("N_grid", def, 2, std::uint64_t{1} << 24);
  auto points = p.integer("points", 200, 1, 100000);
  if (!ctx) return;
  double calib = ctx->model.calibration.dk0_ratio;
  ResidualScanReport rep = dk0_residual_scan(ctx->roof, ctx->cf, Ns, random_points(ctx->seed_for("dk0_residual"), points),
                                             calib, ctx->parallel.workers);
  CsvTable t{{"N", "max_ratio", "normaliser", "max_residual"}, {}};
  for (const ScanRow& r : rep.rows) t.rows.push_back({num(r.N), num(r.value), num(r.reference), num(r.raw)});
  ctx->write_csv(out, "dk0_residual.csv", t);
  check(out, rep.slope <= 0.05, "log-log slope of the max ratio <= 0.05");
  check(out, calib <= 0 || rep.max_ratio <= 2 * calib, "max ratio within twice the frozen calibration");
  out.statistics = {{"slope", rep.slope}, {"max_ratio", rep.max_ratio}, {"calibration", calib},
                    {"calibrated", calib > 0}};
}

void suite_an_cover(Reader& p, Context* ctx, SuiteResult& out) {
  auto Ns = p.counts("N_grid", {16, 64, 256, 1024}, 2, 1 << 14);
  double eps = p.number("epsilon", 0.01, [](double x) { return x > 0 && x <= 0.05; }, "must lie in (0, 0.05]");
  double factor = p.number("grid_factor", 10.0, [](double x) { return x >= 1; }, "must be >= 1");
  if (!ctx) return;
  CsvTable t{{"N", "centers", "radius", "grid_points", "grid_hits", "escapes", "measured_A_N", "bound"}, {}};
  bool escapes = true, count = true, measure = true;
  IntervalUnion last;
  std::uint64_t last_N = 0;
  Json rows = Json::array();
  const double g = ctx->roof.gamma;
  for (std::uint64_t N : Ns) {
    SmallSumCover c = compute_AN_cover(ctx->roof, ctx->cf.alpha_point, N, eps, {factor, ctx->parallel.workers});
    double bound = 6 * std::pow(static_cast<double>(N), -g / 5) * 1.1;
    escapes = escapes && c.escapes == 0;
    count = count && c.centers.size() <= 3 * N;
    measure = measure && c.measured_A_N <= bound;
    t.rows.push_back({num(N), num(c.centers.size()), num(c.radius), num(c.grid_points), num(c.grid_hits),
                      num(c.escapes), num(c.measured_A_N), num(bound)});
    rows.push_back({{"N", N}, {"escapes", c.escapes}, {"measured_A_N", c.measured_A_N}, {"bound", bound}});
    if (N >= last_N) {
      last = c.as_union();
      last_N = N;
    }
  }
  ctx->write_csv(out, "an_cover.csv", t);
  CsvTable arcs{{"lo", "hi"}, {}};
  std::vector<std::pair<double, double>> pairs;
  for (const auto& s : last.segments()) {
    double lo = std::ldexp(static_cast<double>(s.lo), -64), hi = std::ldexp(static_cast<double>(s.hi), -64);
    arcs.rows.push_back({num(lo), num(hi)});
    pairs.emplace_back(lo, hi);
  }
  std::string name = "an_cover_N" + num(last_N);
  ctx->write_csv(out, name + ".csv", arcs);
  if (!pairs.empty()) ctx->write(out, name + ".svg", svg_cover(pairs, "cover of A_N, N = " + num(last_N)));
  check(out, escapes, "no grid point of A_N escapes the cover");
  check(out, count, "at most 3N centers");
  check(out, measure, "measured Leb(A_N) <= 6 N^{-gamma/5} * 1.1");
  out.statistics = {{"epsilon", eps}, {"rows", rows}};
}

void suite_few_translates(Reader& p, Context* ctx, SuiteResult& out) {
  auto sizes = p.counts("subset_sizes", {2, 3}, 1, 8);
  auto samples = p.integer("samples", 100000, 2, 100000000);
  auto cover_N = p.integer("cover_N", 64, 2, 4096);
  double eps = p.number("epsilon", 0.01, [](double x) { return x > 0 && x <= 0.05; }, "must lie in (0, 0.05]");
  if (!ctx) return;
  std::vector<std::pair<std::string, IntervalUnion>> sets(3);
  sets[0].first = "arc";
  sets[0].second.add_ball(CirclePoint::from_double(0.05), 0.05);
  sets[1].first = "two_arcs";
  sets[1].second.add_ball(CirclePoint::from_double(0.2), 0.03);
  sets[1].second.add_ball(CirclePoint::from_double(0.6), 0.1);
  sets[2].first = "A_N_cover";
  sets[2].second = compute_AN_cover(ctx->roof, ctx->cf.alpha_point, cover_N, eps).as_union();
  CsvTable t{{"set", "s", "samples", "leb_A", "expected", "mean", "standard_error", "z", "passed"}, {}};
  bool all = true;
  std::uint64_t stream = 0;
  for (const auto& [name, set] : sets) {
    for (std::uint64_t s : sizes) {
      FewTranslatesReport r = few_translates_check(set, static_cast<int>(s), samples,
                                                   derive_seed(ctx->seed_for("few_translates"), ++stream, 0),
                                                   ctx->parallel);
      all = all && r.passed;
      t.rows.push_back({name, num(s), num(r.samples), num(r.set_measure), num(r.expected), num(r.mean),
                        num(r.standard_error), num(r.z_score), flag(r.passed)});
    }
  }
  ctx->write_csv(out, "few_translates.csv", t);
  check(out, all, "mean translate intersection equals Leb(A)^s within 5 standard errors");
  out.statistics = {{"cases", t.rows.size()}, {"samples", samples}};
}

void suite_tuple_search(Reader& p, Context* ctx, SuiteResult& out) {
  SearchOptions o;
  auto count = p.integer("count", 4, 1, 64);
  o.n_lo = static_cast<int>(p.integer("n_lo", 4, 3, 30));
  o.n_hi = static_cast<int>(p.integer("n_hi", 10, 3, 30));
  if (o.n_hi < o.n_lo) invalid(p.path() + ".n_hi", "must be >= n_lo");
  o.N_grid = p.counts("N_grid", {64, 256}, 2, 1 << 14);
  o.epsilon = p.number("epsilon", 0.01, [](double x) { return x > 0 && x <= 0.05; }, "must lie in (0, 0.05]");
  o.T_grid = p.numbers("T_grid", {1e2, 1e3}, [](double x) { return x > 1; }, "entries must exceed 1");
  o.g3_samples = static_cast<std::size_t>(p.integer("g3_samples", 200, 1, 1000000));
  o.attempts = static_cast<std::size_t>(p.integer("attempts", 100, 1, 100000));
  double min_fraction = p.number("min_pass_fraction", 0.5, [](double x) { return x >= 0 && x <= 1; }, "must lie in [0, 1]");
  if (!ctx) return;
  if (o.n_hi + 1 > ctx->cf.depth()) invalid(p.path() + ".n_hi", "needs rotation.depth > n_hi");
  o.bump = ctx->model.bump;
  o.seed = ctx->seed_for("tuple_search");
  o.workers = ctx->parallel.workers;
  auto verdicts = search_good_tuples(ctx->roof, ctx->cf, static_cast<int>(count), o);
  CsvTable t{{"attempt"}, {}};
  for (int i = 0; i < count; ++i) t.header.push_back("c" + num(i + 1));
  for (const char* h : {"g1", "g2", "g3", "g3_max_violations", "overall"}) t.header.push_back(h);
  std::size_t pass = 0, g1 = 0, g2 = 0, g3 = 0, max_viol = 0;
  for (std::size_t a = 0; a < verdicts.size(); ++a) {
    const TupleVerdict& v = verdicts[a];
    CsvRow row{num(a)};
    for (CirclePoint c : v.tuple) row.push_back(num(c.value()));
    row.push_back(flag(v.g1.passed));
    row.push_back(flag(v.g2.passed));
    row.push_back(flag(v.g3.passed));
    row.push_back(num(v.g3.max_violations));
    row.push_back(flag(v.overall));
    t.rows.push_back(row);
    pass += v.overall;
    g1 += v.g1.passed;
    g2 += v.g2.passed;
    g3 += v.g3.passed;
    max_viol = std::max(max_viol, v.g3.max_violations);
  }
  ctx->write_csv(out, "tuple_search.csv", t);
  double fraction = static_cast<double>(pass) / static_cast<double>(verdicts.size());
  check(out, fraction >= min_fraction, "pass fraction >= " + num(min_fraction));
  check(out, max_viol <= 3, "every G3 sample has at most 3 violating indices");
  out.statistics = {{"attempts", verdicts.size()}, {"pass_fraction", fraction}, {"g1_passed", g1},
                    {"g2_passed", g2}, {"g3_passed", g3}, {"max_g3_violations", max_viol}};
}

void suite_orbital(Reader& p, Context* ctx, SuiteResult& out) {
  double T = p.number("T", 1e3, [](double x) { return x > 1 && x <= 1e6; }, "must lie in (1, 1e6]");
  auto points = p.integer("points", 100, 1, 100000);
  if (!ctx) return;
  double frozen = ctx->model.calibration.orbital_C;
  AgreementReport r = check_orbital_agreement(ctx->flow, ctx->bump(), T, points, ctx->seed_for("orbital_agreement"),
                                              frozen, ctx->parallel);
  CsvTable t{{"theta", "u", "component", "quadrature", "fast", "ergodic_part", "budget", "ratio", "numerically_equal"}, {}};
  bool equal = true;
  for (const AgreementRow& row : r.rows) {
    equal = equal && row.numerically_equal;
    t.rows.push_back({num(row.start.theta.value()), num(row.start.u), num(row.component), num(row.quadrature),
                      num(row.fast), num(row.ergodic_part), num(row.budget), num(row.ratio),
                      flag(row.numerically_equal)});
  }
  ctx->write_csv(out, "orbital_agreement.csv", t);
  check(out, equal, "fast decomposition equals adaptive quadrature");
  check(out, r.fitted_C <= 10, "fitted budget constant C <= 10");
  check(out, frozen <= 0 || r.fitted_C <= 2 * frozen, "fitted C within twice the frozen calibration");
  out.statistics = {{"T", T}, {"rows", r.rows.size()}, {"fitted_C", r.fitted_C}, {"frozen_C", frozen},
                    {"max_numerical_gap", r.max_numerical_gap}};
}

void suite_case1(Reader& p, Context* ctx, SuiteResult& out) {
  double eps = p.number("epsilon", 0.05, [](double x) { return x > 0 && x < 0.5; }, "must lie in (0, 0.5)");
  double T = p.number("T", 1e4, [](double x) { return x > 1 && x <= 1e7; }, "must lie in (1, 1e7]");
  auto points = p.integer("points", 50, 1, 100000);
  if (!ctx) return;
  Case1Report r = check_case1_lower_bound(ctx->flow, ctx->bump(), eps, T, points, ctx->seed_for("case1"));
  CsvTable t{{"theta", "u", "seeded_component", "N", "best_integral", "margin"}, {}};
  for (const Case1Row& row : r.rows) {
    t.rows.push_back({num(row.start.theta.value()), num(row.start.u), num(row.seeded_component), num(row.N),
                      num(row.best_integral), num(row.margin)});
  }
  ctx->write_csv(out, "case1.csv", t);
  check(out, r.rows.size() == static_cast<std::size_t>(points), "requested number of constructed points");
  check(out, r.passed, "max_j int tau_j >= eps^2 T at every constructed point");
  out.statistics = {{"epsilon", eps}, {"T", T}, {"N_limit", r.N_limit}, {"attempts", r.attempts},
                    {"points", r.rows.size()}, {"min_margin", r.min_margin}};
}

void suite_s2(Reader& p, Context* ctx, SuiteResult& out) {
  auto Ts = p.numbers("T_grid", {1e2, 1e3, 1e4}, [](double x) { return x > 1 && x <= 1e7; }, "entries must lie in (1, 1e7]", 2);
  auto samples = p.integer("samples", 100000, 2, 100000000);
  if (!ctx) return;
  double C = ctx->model.calibration.s2_C;
  S2Report r = scan_S2_smallset(ctx->flow, ctx->bump(), C, Ts, samples, ctx->seed_for("s2_scan"), ctx->parallel);
  CsvTable t{{"T", "threshold", "small", "fraction", "fraction_se"}, {}};
  Json rows = Json::array();
  for (const S2Row& row : r.rows) {
    t.rows.push_back({num(row.T), num(row.threshold), num(row.small), num(row.fraction), num(row.fraction_se)});
    rows.push_back({{"T", row.T}, {"fraction", row.fraction}, {"fraction_se", row.fraction_se}});
  }
  ctx->write_csv(out, "s2_scan.csv", t);
  std::vector<double> xs, ys;
  for (const S2Row& row : r.rows) {
    xs.push_back(row.T);
    ys.push_back((static_cast<double>(row.small) + 0.5) / (static_cast<double>(r.samples) + 1));
  }
  ctx->write(out, "s2_decay.svg", svg_decay(xs, ys, "small-set fraction against T"));
  check(out, r.strictly_decreasing, "fraction strictly decreasing in T");
  check(out, r.exponent <= -1, "fitted decay exponent <= -1");
  out.statistics = {{"constant_C", C}, {"samples", r.samples}, {"exponent", r.exponent},
                    {"strictly_decreasing", r.strictly_decreasing}, {"rows", rows}};
}

void suite_analytic(Reader& p, Context* ctx, SuiteResult& out) {
  auto Ts = p.numbers("T_grid", {1e2, 1e3}, [](double x) { return x > 1 && x <= 1e6; }, "entries must lie in (1, 1e6]", 2);
  auto samples = p.integer("samples", 200, 2, 10000000);
  if (!ctx) return;
  AnalyticCocycle analytic(ctx->flow, ctx->model.analytic_L, ctx->model.analytic_degree);
  double calib = ctx->model.calibration.analytic_q99;
  AnalyticDifferenceReport r = check_analytic_difference(ctx->flow, ctx->bump(), analytic, Ts, samples,
                                                         ctx->seed_for("analytic_difference"), calib, ctx->parallel);
  CsvTable t{{"T", "q99", "kept", "excluded", "exclusion_radius", "exclusion_mass_bound"}, {}};
  for (const auto& row : r.rows) {
    t.rows.push_back({num(row.T), num(row.q99), num(row.kept), num(row.excluded), num(row.exclusion_radius),
                      num(row.exclusion_mass_bound)});
  }
  ctx->write_csv(out, "analytic_difference.csv", t);
  check(out, r.slope <= 0.05, "log-log slope of the normalised 0.99-quantile <= 0.05");
  check(out, calib <= 0 || r.max_q99 <= 2 * calib, "quantile within twice the frozen calibration");
  out.statistics = {{"order_L", analytic.order()}, {"degree", analytic.degree()},
                    {"constraint_residual", analytic.max_residual()}, {"slope", r.slope},
                    {"max_q99", r.max_q99}, {"calibration", calib}};
}

void suite_s3(Reader& p, Context* ctx, SuiteResult& out) {
  S3Options o;
  auto deltas = p.numbers("delta_grid", {0.02, 0.01, 0.005}, [](double x) { return x > 0 && x <= 0.1; }, "entries must lie in (0, 0.1]");
  o.m = p.number("m", 1.05, [](double x) { return x > 1 && x < 1.1; }, "must lie in (1, 1.1)");
  o.constant_C = p.number("constant_C", 2.0, positive, "must be positive");
  o.samples = static_cast<std::size_t>(p.integer("samples", 1000, 1, 10000000));
  o.time_points = static_cast<int>(p.integer("time_points", 60, 2, 100000));
  if (!ctx) return;
  o.seed = ctx->seed_for("s3_check");
  o.workers = ctx->parallel.workers;
  FlowPoint x0 = ctx->bump_center();
  S3Report r = check_S3(ctx->flow, x0, deltas, o);
  CsvTable t{{"delta", "t_min", "t_max", "trials", "min_clearance", "passed"}, {}};
  for (const S3Row& row : r.rows) {
    t.rows.push_back({num(row.delta), num(row.t_min), num(row.t_max), num(row.trials), num(row.min_clearance),
                      flag(row.passed)});
  }
  ctx->write_csv(out, "s3_check.csv", t);
  check(out, r.passed, "orbit of the delta-ball avoids x0 over [delta^{-1}, delta^{-m}] / C");
  out.statistics = {{"x0_theta", x0.theta.value()}, {"x0_u", x0.u}, {"m", r.m}, {"constant_C", r.constant_C}};
}

void suite_s1(Reader& p, Context* ctx, SuiteResult& out) {
  auto Ts = p.numbers("T_grid", {1e2, 1e3, 1e4}, [](double x) { return x > 1 && x <= 1e7; }, "entries must lie in (1, 1e7]", 2);
  auto samples = p.integer("samples", 1000, 2, 100000000);
  double top = p.number("fiber_top", 0.4, positive, "must be positive");
  if (!ctx) return;
  if (top >= ctx->composite.inf_value) invalid(p.path() + ".fiber_top", "must lie below inf f");
  S1Report r = check_S1_empirical(ctx->flow, cosine_bump_observable(top), Ts, samples, ctx->seed_for("s1_check"),
                                  ctx->parallel);
  CsvTable t{{"T", "median", "q90"}, {}};
  for (const S1Row& row : r.rows) t.rows.push_back({num(row.T), num(row.median), num(row.q90)});
  ctx->write_csv(out, "s1_check.csv", t);
  check(out, r.passed, "orbit integrals of a smooth mean-zero observable grow sublinearly");
  out.statistics = {{"slope", r.slope}, {"mean_check", r.mean_check}};
}

void suite_theta(Reader& p, Context* ctx, SuiteResult& out) {
  auto deltas = p.numbers("delta_grid", {0.1, 0.05}, [](double x) { return x > 0 && x <= 0.1; }, "entries must lie in (0, 0.1]");
  auto ds = p.numbers("d_grid", {0.0, 0.02, 0.05}, [](double x) { return x >= 0 && x < 0.1; }, "entries must lie in [0, 0.1)");
  double tol = p.number("tolerance", 1e-6, positive, "must be positive");
  if (!ctx) return;
  ThetaPropertyReport r = theta_properties(ctx->flow, ctx->bump_center(), deltas, ds, tol);
  CsvTable t{{"delta", "d", "p1_max_excess", "p2_quadrature", "p2_expected", "p3_quadrature", "p3_expected",
              "strict_gaussian", "passed"}, {}};
  bool p1 = true, p2 = true, p3 = true;
  for (const auto& row : r.rows) {
    p1 = p1 && row.p1_max_excess <= 0;
    p2 = p2 && std::fabs(row.p2_quadrature - row.p2_expected) <= tol;
    p3 = p3 && std::fabs(row.p3_quadrature - row.p3_expected) <= tol;
    t.rows.push_back({num(row.delta), num(row.d), num(row.p1_max_excess), num(row.p2_quadrature),
                      num(row.p2_expected), num(row.p3_quadrature), num(row.p3_expected), num(row.strict_gaussian),
                      flag(row.passed)});
  }
  ctx->write_csv(out, "theta_properties.csv", t);
  check(out, p1, "P1: Theta <= exp(-delta^{-0.1}) beyond distance delta^{0.9}");
  check(out, p2, "P2: squared norm equals (pi/2) delta^2");
  check(out, p3, "P3: cross-correlation equals (pi/2) delta^2 exp(-d^2 / 2 delta^2)");
  out.statistics = {{"rows", r.rows.size()}, {"tolerance", tol}};
}

SkewProduct make_skew(Context& ctx, int component) {
  SkewProduct sp;
  sp.base = &ctx.flow;
  sp.cocycle = &ctx.bump();
  sp.component = component;
  sp.gain = ctx.model.calibration.clt_gain;
  return sp;
}

void suite_clt(Reader& p, Context* ctx, SuiteResult& out) {
  double delta = p.number("delta", 0.05, [](double x) { return x > 0 && x <= 0.1; }, "must lie in (0, 0.1]");
  auto Ts = p.numbers("T_grid", {250, 500, 1000}, [](double x) { return x > 0 && x <= 1e6; }, "entries must lie in (0, 1e6]");
  auto samples = p.integer("samples", 4000, 2, 10000000);
  double ks_alpha = p.number("ks_alpha", 0.01, [](double x) { return x > 0 && x < 1; }, "must lie in (0, 1)");
  double stability = p.number("stability", 0.2, positive, "must be positive");
  double t_max = p.number("series_t_max", 100.0, non_negative, "must be non-negative");
  auto series_samples = p.integer("series_samples", 20000, 2, 100000000);
  auto bins = p.integer("series_bins", 20, 1, 100000);
  double series_tol = p.number("series_tolerance", 0.3, positive, "must be positive");
  double skew_limit = p.number("skewness_limit", 0.15, positive, "must be positive");
  double kurt_limit = p.number("kurtosis_limit", 0.3, positive, "must be positive");
  auto component = p.integer("component", 0, 0, 1000);
  if (!ctx) return;
  if (component >= ctx->composite.count()) invalid(p.path() + ".component", "exceeds the cocycle dimension");
  std::vector<double> grid = Ts;
  std::sort(grid.begin(), grid.end());
  SkewProduct sp = make_skew(*ctx, static_cast<int>(component));
  AppendixObservable H{ThetaBump{ctx->bump_center(), delta}, 1.0};
  std::uint64_t seed = ctx->seed_for("clt");
  std::vector<CltResult> res = clt_monte_carlo(sp, H, grid, samples, seed, ctx->parallel);
  double tail_exponent = 0.0;
  bool have_tail = false;
  if (auto it = ctx->finished.find("s2_scan"); it != ctx->finished.end()) {
    tail_exponent = it->second["exponent"].get<double>();
    have_tail = true;
  }
  VarianceSeries vs = variance_series(sp, H, t_max, series_samples, derive_seed(seed, 1, 0), static_cast<int>(bins),
                                      have_tail ? tail_exponent : 0.0, ctx->parallel);

  Json per_T = Json::array();
  bool ks_ok = true, positive_ok = true;
  double s_min = INFINITY, s_max = 0.0;
  for (const CltResult& r : res) {
    ks_ok = ks_ok && r.ks_p_value && *r.ks_p_value > ks_alpha;
    positive_ok = positive_ok && !r.degenerate && r.sigma2 > 4 * r.sigma2_se;
    s_min = std::min(s_min, r.sigma2);
    s_max = std::max(s_max, r.sigma2);
    per_T.push_back({{"T", r.T}, {"samples", r.samples}, {"sigma2", r.sigma2}, {"sigma2_se", r.sigma2_se},
                     {"mean", r.mean}, {"skewness", r.skewness}, {"skewness_se", r.skewness_se},
                     {"excess_kurtosis", r.excess_kurtosis}, {"kurtosis_se", r.kurtosis_se},
                     {"ks_statistic", r.ks_statistic},
                     {"ks_p_value", r.ks_p_value ? Json(*r.ks_p_value) : Json(nullptr)},
                     {"degenerate", r.degenerate}});
    CsvTable z{{"Z"}, {}};
    for (double v : r.Z) z.rows.push_back({num(v)});
    ctx->write_csv(out, "clt_Z_T" + num(r.T) + ".csv", z);
  }
  const CltResult& last = res.back();
  Json last_json = {{"T", last.T}, {"sigma2", last.sigma2}, {"Z", last.Z}};
  ctx->write(out, "clt_result.json", last_json.dump(2) + "\n");
  if (!last.degenerate) {
    ctx->write(out, "clt_histogram.svg", svg_histogram(last.Z, "Z at T = " + num(last.T)));
    ctx->write(out, "clt_qq.svg", svg_qq(last.Z, last.sigma2, "Z at T = " + num(last.T) + " against N(0, sigma^2)"));
  }
  CsvTable c{{"t_lo", "t_hi", "correlation"}, {}};
  for (std::size_t b = 0; b < vs.correlation.size(); ++b) {
    c.rows.push_back({num(vs.t_edges[b]), num(vs.t_edges[b + 1]), num(vs.correlation[b])});
  }
  ctx->write_csv(out, "variance_series.csv", c);

  const bool stable = s_min > 0 && (s_max - s_min) / s_min <= stability;
  const bool series_ok = std::fabs(vs.sigma2 - last.sigma2) <= series_tol * last.sigma2;
  check(out, ks_ok, "KS p-value > " + num(ks_alpha) + " at every T");
  check(out, positive_ok, "sigma^2 > 0 at 4 standard errors");
  check(out, stable, "sigma^2 stable within " + num(stability) + " across the T grid");
  check(out, series_ok, "variance series within " + num(series_tol) + " of sigma^2 at the largest T");
  check(out, std::fabs(last.skewness) <= skew_limit, "skewness within +-" + num(skew_limit) + " at the largest T");
  check(out, std::fabs(last.excess_kurtosis) <= kurt_limit,
        "excess kurtosis within +-" + num(kurt_limit) + " at the largest T");
  const double prediction = 0.5 * M_PI * std::sqrt(2 * M_PI) * delta * delta * delta * fiber_observable_norm2() /
                            (ctx->composite.count() * roof_integral(ctx->roof, 0.0, 1.0));
  out.statistics = {
      {"note", "d = 1 demo: the fiber is a single suspension flow driven by one cocycle component; the vector "
               "cocycle is exercised by the cocycle and tuple suites only"},
      {"delta", delta},
      {"gain", sp.gain},
      {"component", component},
      {"fiber_norm2", fiber_observable_norm2()},
      {"short_time_prediction", prediction},
      {"per_T", per_T},
      {"variance_series",
       {{"t_max", vs.t_max}, {"sigma2", vs.sigma2}, {"sigma2_se", vs.sigma2_se}, {"c0", vs.c0},
        {"tail_exponent", have_tail ? Json(tail_exponent) : Json(nullptr)},
        {"tail_bound", finite_or_null(vs.tail_bound)}}}};
}

void suite_variance_scaling(Reader& p, Context* ctx, SuiteResult& out) {
  auto deltas = p.numbers("delta_grid", {0.1, 0.05, 0.025}, [](double x) { return x > 0 && x <= 0.1; }, "entries must lie in (0, 0.1]", 2);
  double T = p.number("T", 1000.0, [](double x) { return x > 0 && x <= 1e6; }, "must lie in (0, 1e6]");
  auto samples = p.integer("samples", 4000, 2, 10000000);
  double target = p.number("slope", 3.0, positive, "must be positive");
  double tol = p.number("slope_tolerance", 0.4, positive, "must be positive");
  if (!ctx) return;
  SkewProduct sp = make_skew(*ctx, 0);
  std::vector<double> lx, ly;
  CsvTable t{{"delta", "sigma2", "sigma2_se"}, {}};
  std::vector<double> sig;
  std::uint64_t stream = 0;
  for (double d : deltas) {
    AppendixObservable H{ThetaBump{ctx->bump_center(), d}, 1.0};
    CltResult r = clt_monte_carlo(sp, H, {T}, samples, derive_seed(ctx->seed_for("variance_scaling"), ++stream, 0),
                                  ctx->parallel)[0];
    t.rows.push_back({num(d), num(r.sigma2), num(r.sigma2_se)});
    sig.push_back(r.sigma2);
    if (r.sigma2 > 0) {
      lx.push_back(std::log(d));
      ly.push_back(std::log(r.sigma2));
    }
  }
  ctx->write_csv(out, "variance_scaling.csv", t);
  double slope = lx.size() >= 2 ? fit_line(lx, ly).slope : 0.0;
  if (lx.size() >= 2) ctx->write(out, "variance_scaling.svg", svg_decay(deltas, sig, "sigma^2 against delta"));
  check(out, lx.size() == deltas.size(), "positive variance at every delta");
  check(out, std::fabs(slope - target) <= tol, "log-log slope " + num(target) + " +- " + num(tol));
  out.statistics = {{"T", T}, {"samples", samples}, {"slope", slope}};
}

const std::vector<Suite>& registry() {
  static const std::vector<Suite> suites{
      {"cf", "continued fractions and the Diophantine class", suite_cf},
      {"roof_check", "power-singular roof model", suite_roof},
      {"denjoy_koksma", "Denjoy-Koksma inequality", suite_denjoy_koksma},
      {"dk0_residual", "ergodic sums of the roof away from the closest visit", suite_dk0},
      {"an_cover", "covering of the small-sum sets A_N", suite_an_cover},
      {"few_translates", "translate-intersection averages", suite_few_translates},
      {"tuple_search", "good singularity tuples", suite_tuple_search},
      {"orbital_agreement", "orbital integrals along returns to the base", suite_orbital},
      {"case1", "lower bound for orbits that pass a singular fiber", suite_case1},
      {"s2_scan", "decay of the small set of orbital integrals", suite_s2},
      {"analytic_difference", "smooth versus analytic cocycle", suite_analytic},
      {"s3_check", "slow recurrence to the bump center", suite_s3},
      {"s1_check", "sublinear growth of orbit integrals", suite_s1},
      {"theta_properties", "Gaussian bump properties", suite_theta},
      {"clt", "central limit theorem for the skew product", suite_clt},
      {"variance_scaling", "delta^3 law of the limiting variance", suite_variance_scaling},
  };
  return suites;
}

const Suite& find_suite(const std::string& name) {
  for (const Suite& s : registry()) {
    if (s.name == name) return s;
  }
  invalid("suites", "unknown suite '" + name + "'");
}

struct Parsed {
  ExperimentConfig config;
  Model model;
};

Parsed parse_document(const Json& doc) {
  Parsed out;
  Reader top(doc, "");
  auto version = top.integer("schema_version", -1, kConfigSchemaVersion, kConfigSchemaVersion);
  (void)version;
  if (!doc.contains("schema_version")) invalid("schema_version", "is required");
  out.config.seed = top.unsigned_required("seed");
  out.config.workers = static_cast<int>(top.integer("workers", 1, 1, 1024));
  out.config.chunk_size = static_cast<int>(top.integer("chunk_size", 256, 1, 1 << 20));
  out.config.output_dir = top.text("output_dir", "out");
  if (out.config.output_dir.empty()) invalid("output_dir", "must not be empty");

  Model& m = out.model;
  Reader rot = top.child("rotation");
  m.alpha = rot.text("alpha", m.alpha);
  m.depth = static_cast<int>(rot.integer("depth", m.depth, 12, 90));
  m.class_constant = rot.number("class_constant", m.class_constant, positive, "must be positive");
  top.adopt("rotation", rot);
  try {
    cf_parse(m.alpha, m.depth);
  } catch (const Error& e) {
    invalid("rotation.alpha", e.what());
  }

  Reader roof = top.child("roof");
  m.gamma = roof.number("gamma", m.gamma, [](double g) { return g > 0 && g < 0.5; },
                        "must lie in (0, 1/2): the construction assumes gamma < 1/2");
  m.coeff_a = roof.number("a", m.coeff_a, positive, "must be positive");
  top.adopt("roof", roof);
  try {
    make_singular_roof(m.gamma, m.coeff_a);
  } catch (const Error& e) {
    invalid("roof", e.what());
  }

  Reader tuple = top.child("tuple");
  m.tuple = tuple.numbers("points", m.tuple, [](double x) { return x >= 0 && x < 1; }, "entries must lie in [0, 1)");
  top.adopt("tuple", tuple);
  {
    std::vector<CirclePoint> pts;
    for (double x : m.tuple) pts.push_back(CirclePoint::from_double(x));
    std::sort(pts.begin(), pts.end());
    if (std::adjacent_find(pts.begin(), pts.end()) != pts.end()) invalid("tuple.points", "must be distinct");
  }

  Reader coc = top.child("cocycle");
  m.bump.kappa = coc.number("kappa", m.bump.kappa, [](double x) { return x > 0 && x < 0.25; }, "must lie in (0, 1/4)");
  m.bump.margin = coc.number("margin", m.bump.margin, positive, "must be positive");
  m.analytic_L = static_cast<int>(coc.integer("L", m.analytic_L, 0, 8));
  m.analytic_degree = static_cast<int>(coc.integer("degree", m.analytic_degree, 1, 512));
  top.adopt("cocycle", coc);

  Reader cal = top.child("calibration");
  Calibration& c = m.calibration;
  c.dk0_ratio = cal.number("dk0_ratio", c.dk0_ratio, non_negative, "must be non-negative (0 = not frozen)");
  c.orbital_C = cal.number("orbital_C", c.orbital_C, non_negative, "must be non-negative (0 = not frozen)");
  c.analytic_q99 = cal.number("analytic_q99", c.analytic_q99, non_negative, "must be non-negative (0 = not frozen)");
  c.s2_C = cal.number("s2_C", c.s2_C, positive, "must be positive");
  c.clt_gain = cal.number("clt_gain", c.clt_gain, positive, "must be positive");
  top.adopt("calibration", cal);

  Json suites_effective = Json::object();
  top.mark_used("suites");
  if (doc.contains("suites")) {
    const Json& s = doc["suites"];
    if (!s.is_object()) invalid("suites", "expected an object mapping suite names to parameters");
    std::set<std::string> present;
    for (auto it = s.begin(); it != s.end(); ++it) {
      const Suite& suite = find_suite(it.key());
      Reader params(it.value(), "suites." + it.key());
      params.number("budget_seconds", 0.0, non_negative, "must be non-negative (0 = no budget)");
      SuiteResult scratch;
      suite.body(params, nullptr, scratch);
      params.finish();
      suites_effective[it.key()] = params.effective();
      present.insert(it.key());
    }
    for (const std::string& name : suite_names()) {
      if (present.count(name)) out.config.suites.push_back(name);
    }
  }
  top.finish();
  Json effective = top.effective();
  effective["suites"] = suites_effective;
  out.config.document = effective;
  return out;
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Suite& s : registry()) n.push_back(s.name);
    return n;
  }();
  return names;
}

ExperimentConfig parse_config(const std::string& text) { return parse_document(parse_json_text(text)).config; }

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    raise(ErrorCode::kConfigInvalid, e.what());
  }
  return parse_config(text);
}

ExperimentConfig default_config(std::uint64_t seed) {
  Json doc = {{"schema_version", kConfigSchemaVersion}, {"seed", seed}};
  return parse_document(doc).config;
}

ExperimentConfig apply_overrides(const ExperimentConfig& config, const RunOverrides& overrides) {
  Json doc = config.document;
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.workers) doc["workers"] = *overrides.workers;
  if (overrides.output_dir) doc["output_dir"] = *overrides.output_dir;
  if (!overrides.suites.empty()) {
    Json selected = Json::object();
    for (const std::string& name : overrides.suites) {
      find_suite(name);
      selected[name] = doc["suites"].contains(name) ? doc["suites"][name] : Json::object();
    }
    doc["suites"] = selected;
  }
  return parse_document(doc).config;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  Parsed parsed = parse_document(config.document);
  Context ctx;
  ctx.config = &config;
  ctx.model = parsed.model;
  ctx.parallel = {config.workers, config.chunk_size};
  ctx.out_dir = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) raise(ErrorCode::kIo, "cannot create output directory " + config.output_dir + ": " + ec.message());

  ctx.cf = cf_parse(ctx.model.alpha, ctx.model.depth);
  ctx.roof = make_singular_roof(ctx.model.gamma, ctx.model.coeff_a);
  std::vector<CirclePoint> pts;
  for (double x : ctx.model.tuple) pts.push_back(CirclePoint::from_double(x));
  ctx.composite = make_composite_roof(ctx.roof, pts);
  ctx.flow = make_flow(ctx.cf, ctx.composite, ctx.model.class_constant);

  ExperimentReport report;
  report.passed = true;
  bool over_budget = false;
  Json suites_json = Json::array();
  for (const std::string& name : config.suites) {
    const Suite& suite = find_suite(name);
    SuiteResult res;
    res.name = name;
    res.anchor = suite.anchor;
    Reader params(config.document["suites"][name], "suites." + name);
    double budget = params.number("budget_seconds", 0.0, non_negative, "must be non-negative");
    auto start = std::chrono::steady_clock::now();
    try {
      suite.body(params, &ctx, res);
    } catch (const Error& e) {
      res.failed_invariants.push_back(std::string("raised ") + error_code_name(e.code()) + ": " + e.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.passed = res.failed_invariants.empty();
    if (budget > 0 && res.seconds > budget) {
      res.budget_exceeded = true;
      res.passed = false;
      res.failed_invariants.push_back("runtime budget of " + format_number(budget) + " s exceeded");
      over_budget = true;
    }
    ctx.finished[name] = res.statistics;
    report.passed = report.passed && res.passed;
    suites_json.push_back({{"name", res.name},
                           {"anchor", res.anchor},
                           {"passed", res.passed},
                           {"budget_exceeded", res.budget_exceeded},
                           {"failed_invariants", res.failed_invariants},
                           {"statistics", res.statistics},
                           {"artifacts", res.artifacts}});
    for (const auto& a : res.artifacts) report.artifacts.push_back(a);
    report.suites.push_back(std::move(res));
  }
  Json echo = config.document;
  echo.erase("output_dir");  // reports from different directories stay byte-identical
  Json doc = {{"schema_version", kConfigSchemaVersion},
              {"tool", "kochlab"},
              {"config", echo},
              {"suites", suites_json},
              {"artifacts", report.artifacts},
              {"passed", report.passed}};
  report.json = doc.dump(2) + "\n";
  write_file((ctx.out_dir / "report.json").string(), report.json);
  report.exit_code = over_budget ? 3 : (report.passed ? 0 : 1);
  return report;
}

}  // namespace kochlab
