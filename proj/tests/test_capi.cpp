#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "nearsing.h"
#include "oracle_tables.hpp"

TEST_CASE("c api: version and error state") {
  const char* v = nearsing_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);
}

TEST_CASE("c api: surface lifecycle") {
  nearsing_surface* s = nullptr;
  REQUIRE(nearsing_surface_create("sphere", &s) == NEARSING_OK);
  REQUIRE(s != nullptr);

  double phi = 0.0;
  const double origin[3] = {0, 0, 0};
  CHECK(nearsing_surface_phi(s, origin, &phi) == NEARSING_OK);
  CHECK(phi < 0.0);

  double grad[3] = {0, 0, 0};
  const double p[3] = {0.5, 0.25, -0.5};
  CHECK(nearsing_surface_grad(s, p, grad) == NEARSING_OK);
  CHECK(grad[0] == doctest::Approx(1.0).epsilon(1e-12));   // 2 x
  CHECK(grad[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(grad[2] == doctest::Approx(-1.0).epsilon(1e-12));

  double x0[3], b, n0[3], chi;
  const double y[3] = {0, 0, 1.25};
  CHECK(nearsing_surface_closest_point(s, y, x0, &b, n0, &chi) == NEARSING_OK);
  CHECK(std::abs(x0[2] - 1.0) <= 1e-10);
  CHECK(b == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(n0[2] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(chi == 0.0);
  // outputs are optional
  CHECK(nearsing_surface_closest_point(s, y, nullptr, &b, nullptr, nullptr) == NEARSING_OK);

  nearsing_surface_destroy(s);
}

TEST_CASE("c api: failure paths set codes and messages") {
  nearsing_surface* s = nullptr;
  CHECK(nearsing_surface_create("hyperboloid", &s) == NEARSING_ERR_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  CHECK(std::strlen(nearsing_last_error()) > 0);

  double out = 0.0;
  const double y[3] = {0, 0, 0};
  CHECK(nearsing_surface_phi(nullptr, y, &out) == NEARSING_ERR_INVALID_ARGUMENT);

  REQUIRE(nearsing_surface_create("sphere", &s) == NEARSING_OK);
  // the center has no unique closest point
  CHECK(nearsing_surface_closest_point(s, y, nullptr, &out, nullptr, nullptr) ==
        NEARSING_ERR_NON_CONVERGENCE);
  nearsing_surface_destroy(s);
}

TEST_CASE("c api: quadrature rule") {
  nearsing_surface* s = nullptr;
  REQUIRE(nearsing_surface_create("sphere", &s) == NEARSING_OK);
  nearsing_rule* r = nullptr;
  REQUIRE(nearsing_rule_build(s, 1.0 / 8, &r) == NEARSING_OK);
  const size_t count = nearsing_rule_node_count(r);
  CHECK(count > 500);

  double area = 0.0;
  CHECK(nearsing_rule_area(r, &area) == NEARSING_OK);
  // h = 1/8 is deliberately coarse here (lifecycle test, not accuracy).
  CHECK(area == doctest::Approx(oracle::kSphereArea).epsilon(1e-3));

  std::vector<double> x(3 * count), n(3 * count), w(count);
  REQUIRE(nearsing_rule_get_nodes(r, x.data(), n.data(), w.data()) == NEARSING_OK);
  double acc = 0.0;
  for (size_t k = 0; k < count; ++k) {
    acc += w[k];
    const double r2 = x[3 * k] * x[3 * k] + x[3 * k + 1] * x[3 * k + 1] + x[3 * k + 2] * x[3 * k + 2];
    CHECK(std::abs(r2 - 1.0) <= 1e-10);
  }
  CHECK(acc == doctest::Approx(area).epsilon(1e-12));

  const char* path = "test_capi_nodes.csv";
  CHECK(nearsing_rule_dump_csv(r, path) == NEARSING_OK);
  std::FILE* f = std::fopen(path, "r");
  REQUIRE(f != nullptr);
  char header[64] = {0};
  REQUIRE(std::fgets(header, sizeof header, f) != nullptr);
  CHECK(std::string(header) == "axis,i,j,x1,x2,x3,n1,n2,n3,w\n");
  std::fclose(f);
  std::remove(path);

  nearsing_rule_destroy(r);
  nearsing_surface_destroy(s);
  // invalid spacing
  CHECK(nearsing_rule_build(nullptr, 1.0 / 8, &r) == NEARSING_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api: moment integrals and weights") {
  CHECK(std::abs(nearsing_i0(1.0) - 0.050254541660012221011) <= 1e-15);
  CHECK(std::abs(nearsing_i2(1.0) - 0.035681555130090969882) <= 1e-15);
  CHECK(std::abs(nearsing_i4(1.0) - 0.054476255380046164762) <= 1e-15);

  const double rhos[3] = {2.0, 3.0, 4.0};
  double a[3], lambdas[3];
  int degenerate = -1;
  REQUIRE(nearsing_weights(rhos, 3, 5, 0.0, 1.0 / 32, 0, 0.0, 0.0, 4.0, a, lambdas,
                           &degenerate) == NEARSING_OK);
  CHECK(degenerate == 0);
  CHECK(std::abs(a[0] - 14.0 / 3.0) <= 1e-12);
  CHECK(std::abs(a[1] + 16.0 / 3.0) <= 1e-12);
  CHECK(std::abs(a[2] - 5.0 / 3.0) <= 1e-12);
  CHECK(lambdas[0] == 0.0);

  // far target: degenerate single-width weights
  REQUIRE(nearsing_weights(rhos, 3, 5, 1.0, 1.0 / 32, 0, 0.0, 0.0, 4.0, a, nullptr,
                           &degenerate) == NEARSING_OK);
  CHECK(degenerate == 1);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == 0.0);

  // bad multiplier count
  CHECK(nearsing_weights(rhos, 2, 5, 0.0, 1.0 / 32, 0, 0.0, 0.0, 4.0, a, nullptr, nullptr) ==
        NEARSING_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api: full run from JSON config") {
  const char* cfg = R"({"case":"sphere-single","h":[0.125],"out":"test_capi_run.csv"})";
  char* report = nullptr;
  REQUIRE(nearsing_run_json(cfg, &report) == NEARSING_OK);
  REQUIRE(report != nullptr);
  const nlohmann::json j = nlohmann::json::parse(report);
  nearsing_string_free(report);
  CHECK(j.at("case") == "sphere-single");
  REQUIRE(j.at("rows").size() == 1);
  CHECK(j.at("rows")[0].at("n_targets").get<long long>() > 100);
  CHECK(j.at("rows")[0].at("max_err").get<double>() < 0.05);
  std::remove("test_capi_run.csv");

  CHECK(nearsing_run_json("{\"unknown\": 1}", nullptr) == NEARSING_ERR_CONFIG);
  CHECK(nearsing_run_json("][", nullptr) == NEARSING_ERR_CONFIG);
  CHECK(nearsing_run_json(nullptr, nullptr) == NEARSING_ERR_INVALID_ARGUMENT);
}
