/* C interface to the kochlab experiment library. */
#ifndef KOCHLAB_KOCHLAB_H
#define KOCHLAB_KOCHLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KOCHLAB_API __declspec(dllexport)
#else
#define KOCHLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values match the library's error kinds. */
typedef enum kochlab_status {
  KOCHLAB_OK = 0,
  KOCHLAB_DOMAIN = 1,
  KOCHLAB_PRECISION_EXHAUSTED = 2,
  KOCHLAB_DEPTH_INSUFFICIENT = 3,
  KOCHLAB_SINGULARITY = 4,
  KOCHLAB_POSITIVITY = 5,
  KOCHLAB_BISECTION_FAILURE = 6,
  KOCHLAB_GEOMETRY = 7,
  KOCHLAB_RANK_DEFICIENT = 8,
  KOCHLAB_LEVEL_TOO_SMALL = 9,
  KOCHLAB_PRECONDITION = 10,
  KOCHLAB_HORIZON = 11,
  KOCHLAB_CONSTRUCTION_FAILURE = 12,
  KOCHLAB_CONFIG_INVALID = 13,
  KOCHLAB_MALFORMED_INPUT = 14,
  KOCHLAB_UNKNOWN_KIND = 15,
  KOCHLAB_IO = 16,
  KOCHLAB_BUDGET_EXCEEDED = 17,
  KOCHLAB_WINDOW_EMPTY = 18,
  KOCHLAB_INVALID_ARGUMENT = 100, /* null handle or pointer */
  KOCHLAB_INTERNAL = 101
} kochlab_status;

typedef struct kochlab_config kochlab_config;
typedef struct kochlab_report kochlab_report;
typedef struct kochlab_flow kochlab_flow;

KOCHLAB_API const char* kochlab_version(void);
/* Message of the last failed call on this thread; empty after a success. */
KOCHLAB_API const char* kochlab_last_error(void);
KOCHLAB_API const char* kochlab_status_name(int status);

KOCHLAB_API size_t kochlab_suite_count(void);
KOCHLAB_API const char* kochlab_suite_name(size_t index);

/* Configs. The returned handle must be released with kochlab_config_free. */
KOCHLAB_API int kochlab_config_default(uint64_t seed, kochlab_config** out);
KOCHLAB_API int kochlab_config_load(const char* path, kochlab_config** out);
KOCHLAB_API int kochlab_config_parse(const char* text, kochlab_config** out);
KOCHLAB_API int kochlab_config_set_seed(kochlab_config* config, uint64_t seed);
KOCHLAB_API int kochlab_config_set_workers(kochlab_config* config, int workers);
KOCHLAB_API int kochlab_config_set_output_dir(kochlab_config* config, const char* dir);
/* Restricts the run to the selected suites; repeated calls accumulate. */
KOCHLAB_API int kochlab_config_select_suite(kochlab_config* config, const char* name);
/* Effective config as JSON; valid until the config is modified or freed. */
KOCHLAB_API const char* kochlab_config_json(const kochlab_config* config);
KOCHLAB_API void kochlab_config_free(kochlab_config* config);

/* Runs the configured suites. Suite failures are reported, not returned. */
KOCHLAB_API int kochlab_run(const kochlab_config* config, kochlab_report** out);
/* 0 all passed, 1 a suite failed, 3 a runtime budget was exceeded. */
KOCHLAB_API int kochlab_report_exit_code(const kochlab_report* report);
KOCHLAB_API int kochlab_report_passed(const kochlab_report* report);
KOCHLAB_API const char* kochlab_report_json(const kochlab_report* report);
KOCHLAB_API size_t kochlab_report_suite_count(const kochlab_report* report);
KOCHLAB_API const char* kochlab_report_suite_name(const kochlab_report* report, size_t index);
KOCHLAB_API int kochlab_report_suite_passed(const kochlab_report* report, size_t index);
/* Failed invariants of one suite joined by newlines; empty if it passed. */
KOCHLAB_API const char* kochlab_report_suite_failures(const kochlab_report* report, size_t index);
KOCHLAB_API void kochlab_report_free(kochlab_report* report);

/* kind: histogram, qq, decay or cover. */
KOCHLAB_API int kochlab_plot(const char* input_path, const char* kind, const char* output_path);

/* Special flow over a rotation under the composite power-singular roof. */
KOCHLAB_API int kochlab_flow_create(const char* alpha, int depth, double gamma, double a, const double* singularities,
                                    size_t count, kochlab_flow** out);
KOCHLAB_API int kochlab_flow_evolve(const kochlab_flow* flow, double theta, double u, double t, double* theta_out,
                                    double* u_out);
KOCHLAB_API int kochlab_flow_height(const kochlab_flow* flow, double theta, double* out);
KOCHLAB_API void kochlab_flow_free(kochlab_flow* flow);

#ifdef __cplusplus
}
#endif

#endif
