// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "kochlab/kochlab.h"

TEST_CASE("status names and suite listing") {
  CHECK(std::string(kochlab_status_name(KOCHLAB_OK)) == "ok");
  CHECK(std::string(kochlab_status_name(KOCHLAB_CONFIG_INVALID)) == "config-invalid");
  CHECK(kochlab_suite_count() == 16);
  CHECK(std::string(kochlab_suite_name(0)) == "cf");
  CHECK(kochlab_suite_name(kochlab_suite_count()) == nullptr);
  CHECK(std::string(kochlab_version()).size() > 0);
}

TEST_CASE("null arguments and invalid configs") {
  kochlab_config* c = nullptr;
  CHECK(kochlab_config_parse(nullptr, &c) == KOCHLAB_INVALID_ARGUMENT);
  CHECK(kochlab_config_parse("{\"schema_version\": 1, \"seed\": 1, \"roof\": {\"gamma\": 0.6}}", &c) ==
        KOCHLAB_CONFIG_INVALID);
  CHECK(c == nullptr);
  CHECK(std::string(kochlab_last_error()).find("gamma") != std::string::npos);
  CHECK(kochlab_run(nullptr, nullptr) == KOCHLAB_INVALID_ARGUMENT);
  CHECK(kochlab_config_default(5, &c) == KOCHLAB_OK);
  CHECK(std::string(kochlab_last_error()).empty());
  CHECK(kochlab_config_select_suite(c, "no_such_suite") == KOCHLAB_CONFIG_INVALID);
  CHECK(kochlab_config_set_workers(c, 0) == KOCHLAB_CONFIG_INVALID);
  kochlab_config_free(c);
  kochlab_config_free(nullptr);
}

TEST_CASE("run a suite and plot its output") {
  auto dir = std::filesystem::temp_directory_path() / "kochlab_capi";
  std::filesystem::remove_all(dir);
  kochlab_config* c = nullptr;
  REQUIRE(kochlab_config_default(42, &c) == KOCHLAB_OK);
  REQUIRE(kochlab_config_set_output_dir(c, dir.string().c_str()) == KOCHLAB_OK);
  REQUIRE(kochlab_config_select_suite(c, "an_cover") == KOCHLAB_OK);
  CHECK(std::string(kochlab_config_json(c)).find("\"an_cover\"") != std::string::npos);
  kochlab_report* r = nullptr;
  REQUIRE(kochlab_run(c, &r) == KOCHLAB_OK);
  CHECK(kochlab_report_exit_code(r) == 0);
  CHECK(kochlab_report_passed(r) == 1);
  REQUIRE(kochlab_report_suite_count(r) == 1);
  CHECK(std::string(kochlab_report_suite_name(r, 0)) == "an_cover");
  CHECK(std::string(kochlab_report_suite_failures(r, 0)).empty());
  CHECK(std::string(kochlab_report_json(r)).find("\"passed\": true") != std::string::npos);
  kochlab_report_free(r);
  kochlab_config_free(c);

  const std::string svg = (dir / "cover.svg").string();
  CHECK(kochlab_plot((dir / "an_cover_N1024.csv").string().c_str(), "cover", svg.c_str()) == KOCHLAB_OK);
  CHECK(std::filesystem::file_size(svg) > 0);
  CHECK(kochlab_plot((dir / "an_cover.csv").string().c_str(), "spiral", svg.c_str()) == KOCHLAB_UNKNOWN_KIND);
  std::filesystem::remove_all(dir);
}

TEST_CASE("flow handle") {
  const double cs[] = {0.11, 0.37, 0.52, 0.83};
  kochlab_flow* f = nullptr;
  CHECK(kochlab_flow_create("golden", 40, 0.7, 0.1, cs, 4, &f) != KOCHLAB_OK);
  REQUIRE(kochlab_flow_create("golden", 40, 1.0 / 3.0, 0.1, cs, 4, &f) == KOCHLAB_OK);
  double h = 0;
  REQUIRE(kochlab_flow_height(f, 0.2, &h) == KOCHLAB_OK);
  CHECK(h > 3.5);
  // Flowing to the roof moves to the next fiber.
  double theta = 0, u = 0;
  REQUIRE(kochlab_flow_evolve(f, 0.2, 0.0, h, &theta, &u) == KOCHLAB_OK);
  CHECK(u == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(theta == doctest::Approx(std::fmod(0.2 + (std::sqrt(5.0) - 1) / 2, 1.0)).epsilon(1e-12));
  REQUIRE(kochlab_flow_evolve(f, theta, u, -h, &theta, &u) == KOCHLAB_OK);
  CHECK(theta == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(kochlab_flow_evolve(f, 0.2, 0.0, 1e30, &theta, &u) == KOCHLAB_HORIZON);
  kochlab_flow_free(f);
}
