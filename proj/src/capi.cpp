#include "kochlab/kochlab.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "kochlab/error.hpp"
#include "kochlab/experiment.hpp"
#include "kochlab/kochergin.hpp"
#include "kochlab/plot.hpp"

struct kochlab_config {
  kochlab::ExperimentConfig config;
  std::vector<std::string> selected;
  std::string json;
};

struct kochlab_report {
  kochlab::ExperimentReport report;
  std::vector<std::string> failures;
};

struct kochlab_flow {
  kochlab::KocherginFlow flow;
};

namespace {

thread_local std::string last_error;

int fail(int status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class Body>
int guarded(Body&& body) {
  try {
    body();
    last_error.clear();
    return KOCHLAB_OK;
  } catch (const kochlab::Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(KOCHLAB_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KOCHLAB_INTERNAL, e.what());
  }
}

int null_argument(const char* what) { return fail(KOCHLAB_INVALID_ARGUMENT, std::string(what) + " is null"); }

void refresh(kochlab_config* c) {
  kochlab::RunOverrides o;
  o.suites = c->selected;
  c->config = kochlab::apply_overrides(c->config, o);
  c->json = c->config.document.dump(2);
}

int make_config(kochlab::ExperimentConfig config, kochlab_config** out) {
  auto* c = new kochlab_config{std::move(config), {}, {}};
  c->json = c->config.document.dump(2);
  *out = c;
  return KOCHLAB_OK;
}

}  // namespace

extern "C" {

const char* kochlab_version(void) { return "0.1.0"; }

const char* kochlab_last_error(void) { return last_error.c_str(); }

const char* kochlab_status_name(int status) {
  if (status == KOCHLAB_OK) return "ok";
  if (status == KOCHLAB_INVALID_ARGUMENT) return "invalid-argument";
  if (status == KOCHLAB_INTERNAL) return "internal";
  if (status >= 1 && status <= 18) return kochlab::error_code_name(static_cast<kochlab::ErrorCode>(status));
  return "unknown";
}

size_t kochlab_suite_count(void) { return kochlab::suite_names().size(); }

const char* kochlab_suite_name(size_t index) {
  const auto& names = kochlab::suite_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

int kochlab_config_default(uint64_t seed, kochlab_config** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { make_config(kochlab::default_config(seed), out); });
}

int kochlab_config_load(const char* path, kochlab_config** out) {
  if (!out) return null_argument("out");
  if (!path) return null_argument("path");
  *out = nullptr;
  return guarded([&] { make_config(kochlab::load_config(path), out); });
}

int kochlab_config_parse(const char* text, kochlab_config** out) {
  if (!out) return null_argument("out");
  if (!text) return null_argument("text");
  *out = nullptr;
  return guarded([&] { make_config(kochlab::parse_config(text), out); });
}

int kochlab_config_set_seed(kochlab_config* config, uint64_t seed) {
  if (!config) return null_argument("config");
  return guarded([&] {
    kochlab::RunOverrides o;
    o.seed = seed;
    config->config = kochlab::apply_overrides(config->config, o);
    refresh(config);
  });
}

int kochlab_config_set_workers(kochlab_config* config, int workers) {
  if (!config) return null_argument("config");
  return guarded([&] {
    kochlab::RunOverrides o;
    o.workers = workers;
    config->config = kochlab::apply_overrides(config->config, o);
    refresh(config);
  });
}

int kochlab_config_set_output_dir(kochlab_config* config, const char* dir) {
  if (!config) return null_argument("config");
  if (!dir) return null_argument("dir");
  return guarded([&] {
    kochlab::RunOverrides o;
    o.output_dir = dir;
    config->config = kochlab::apply_overrides(config->config, o);
    refresh(config);
  });
}

int kochlab_config_select_suite(kochlab_config* config, const char* name) {
  if (!config) return null_argument("config");
  if (!name) return null_argument("name");
  return guarded([&] {
    std::vector<std::string> before = config->selected;
    config->selected.push_back(name);
    try {
      refresh(config);
    } catch (...) {
      config->selected = before;
      throw;
    }
  });
}

const char* kochlab_config_json(const kochlab_config* config) { return config ? config->json.c_str() : ""; }

void kochlab_config_free(kochlab_config* config) { delete config; }

int kochlab_run(const kochlab_config* config, kochlab_report** out) {
  if (!out) return null_argument("out");
  if (!config) return null_argument("config");
  *out = nullptr;
  return guarded([&] {
    auto* r = new kochlab_report{kochlab::run_experiment(config->config), {}};
    for (const auto& s : r->report.suites) {
      std::string joined;
      for (const auto& f : s.failed_invariants) joined += (joined.empty() ? "" : "\n") + f;
      r->failures.push_back(joined);
    }
    *out = r;
  });
}

int kochlab_report_exit_code(const kochlab_report* report) { return report ? report->report.exit_code : 1; }

int kochlab_report_passed(const kochlab_report* report) { return report && report->report.passed ? 1 : 0; }

const char* kochlab_report_json(const kochlab_report* report) { return report ? report->report.json.c_str() : ""; }

size_t kochlab_report_suite_count(const kochlab_report* report) { return report ? report->report.suites.size() : 0; }

const char* kochlab_report_suite_name(const kochlab_report* report, size_t index) {
  if (!report || index >= report->report.suites.size()) return nullptr;
  return report->report.suites[index].name.c_str();
}

int kochlab_report_suite_passed(const kochlab_report* report, size_t index) {
  if (!report || index >= report->report.suites.size()) return 0;
  return report->report.suites[index].passed ? 1 : 0;
}

const char* kochlab_report_suite_failures(const kochlab_report* report, size_t index) {
  if (!report || index >= report->failures.size()) return nullptr;
  return report->failures[index].c_str();
}

void kochlab_report_free(kochlab_report* report) { delete report; }

int kochlab_plot(const char* input_path, const char* kind, const char* output_path) {
  if (!input_path) return null_argument("input_path");
  if (!kind) return null_argument("kind");
  if (!output_path) return null_argument("output_path");
  return guarded([&] { kochlab::plot_file(input_path, kind, output_path); });
}

int kochlab_flow_create(const char* alpha, int depth, double gamma, double a, const double* singularities,
                        size_t count, kochlab_flow** out) {
  if (!out) return null_argument("out");
  if (!alpha) return null_argument("alpha");
  if (count > 0 && !singularities) return null_argument("singularities");
  *out = nullptr;
  return guarded([&] {
    std::vector<kochlab::CirclePoint> pts;
    for (size_t i = 0; i < count; ++i) pts.push_back(kochlab::CirclePoint::from_double(singularities[i]));
    auto roof = kochlab::make_composite_roof(kochlab::make_singular_roof(gamma, a), pts);
    *out = new kochlab_flow{kochlab::make_flow(kochlab::cf_parse(alpha, depth), roof)};
  });
}

int kochlab_flow_evolve(const kochlab_flow* flow, double theta, double u, double t, double* theta_out,
                        double* u_out) {
  if (!flow) return null_argument("flow");
  if (!theta_out || !u_out) return null_argument("output pointer");
  return guarded([&] {
    kochlab::FlowPoint p = kochlab::evolve(flow->flow, {kochlab::CirclePoint::from_double(theta), u}, t);
    *theta_out = p.theta.value();
    *u_out = p.u;
  });
}

int kochlab_flow_height(const kochlab_flow* flow, double theta, double* out) {
  if (!flow) return null_argument("flow");
  if (!out) return null_argument("out");
  return guarded([&] { *out = flow->flow.height(kochlab::CirclePoint::from_double(theta)); });
}

void kochlab_flow_free(kochlab_flow* flow) { delete flow; }

}  // extern "C"
