#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "oracle_tables.hpp"
#include "quadrature.hpp"
#include "surface.hpp"

using namespace nearsing;

namespace {

// Relative tolerances reflect the quadrature error at the coarse h = 1/16
// used here (the acceptance suite pins the fine-h accuracy): the sphere is
// benign, the other shapes carry h-comparable curvature radii.
struct AreaVolume {
  const char* surface;
  double area;    // frozen closed-form value (0: unavailable)
  double area_tol;
  double volume;  // frozen closed-form or voxel value
  double volume_tol;
};

const AreaVolume kAreaVolume[] = {
    {"sphere", oracle::kSphereArea, 1e-4, oracle::kSphereVolume, 1e-4},
    {"prolate-spheroid", oracle::kSpheroidArea, 2e-3, oracle::kSpheroidVolume, 2e-3},
    {"rotated-ellipsoid", oracle::kEllipsoidArea, 2e-3, oracle::kEllipsoidVolume, 2e-3},
    {"cassini", oracle::kCassiniArea, 2e-3, oracle::kCassiniVolume, 2e-3},
    {"molecular", 0.0, 0.0, oracle::kMolecularVolumeVoxel, 5e-3},
};

double flux_volume(const QuadratureRule& rule) {
  // divergence theorem: (1/3) int x . n dS = enclosed volume
  return integrate(rule, [](const QuadratureNode& n) { return dot(n.x, n.n) / 3.0; });
}

}  // namespace

TEST_CASE("partition bump: support, endpoints, monotone decay") {
  CHECK(partition_bump(0.0, 2.0) == 1.0);
  CHECK(partition_bump(1.0, 2.0) == 0.0);
  CHECK(partition_bump(-1.0, 2.0) == 0.0);
  CHECK(partition_bump(1.5, 2.0) == 0.0);
  double prev = 1.0;
  for (double r = 0.05; r < 1.0; r += 0.05) {
    const double v = partition_bump(r, 2.0);
    CHECK(v > 0.0);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(partition_bump(0.999999, 2.0) < 1e-6);
}

TEST_CASE("areas converge to the frozen closed forms") {
  for (const auto& row : kAreaVolume) {
    if (row.area == 0.0) continue;
    auto s = make_surface(row.surface);
    const QuadratureRule rule = generate_rule(*s, 1.0 / 16);
    CHECK(std::abs(surface_area(rule) - row.area) <= row.area_tol * row.area);
  }
}

TEST_CASE("sphere area error decays at high order between h=1/8 and h=1/16") {
  auto s = make_surface("sphere");
  const double e8 = std::abs(surface_area(generate_rule(*s, 1.0 / 8)) - oracle::kSphereArea);
  const double e16 = std::abs(surface_area(generate_rule(*s, 1.0 / 16)) - oracle::kSphereArea);
  CHECK(e16 < e8 / 8.0);  // at least third order on one halving
}

TEST_CASE("flux identity recovers the enclosed volumes") {
  for (const auto& row : kAreaVolume) {
    auto s = make_surface(row.surface);
    const QuadratureRule rule = generate_rule(*s, 1.0 / 16);
    CHECK(std::abs(flux_volume(rule) - row.volume) <= row.volume_tol * row.volume);
  }
}

TEST_CASE("node invariants") {
  auto s = make_surface("cassini");  // exercises a non-convex shape
  const double h = 1.0 / 8;
  const QuadratureRule rule = generate_rule(*s, h);
  REQUIRE(rule.size() > 100);
  CHECK(rule.h == h);
  const double diam = s->diameter();
  const double cos_cap = std::cos(70.0 * 3.14159265358979323846 / 180.0);
  for (const QuadratureNode& n : rule.nodes) {
    CHECK(n.axis >= 0);
    CHECK(n.axis <= 2);
    // on the surface, to the refinement tolerance
    CHECK(std::abs(s->phi(n.x)) <= 1e-11 * norm(s->grad(n.x)) * diam);
    // unit outward normal, aligned with the gradient
    CHECK(norm(n.n) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(n.n - normalized(s->grad(n.x))) <= 1e-10);
    // admitted axis: the normal is inclined toward it
    CHECK(std::abs(n.n[n.axis]) >= cos_cap - 1e-9);
    CHECK(n.w >= 0.0);
    CHECK(n.w <= 3.0 * h * h);  // |n_d| >= cos(70 deg) caps the weight
    // the two off-axis coordinates sit exactly on grid lines (cyclic order)
    CHECK(n.x[(n.axis + 1) % 3] == n.i * h);
    CHECK(n.x[(n.axis + 2) % 3] == n.j * h);
  }
}

TEST_CASE("nodes are sorted and unique") {
  auto s = make_surface("sphere");
  const QuadratureRule rule = generate_rule(*s, 1.0 / 8);
  for (size_t k = 1; k < rule.size(); ++k) {
    const QuadratureNode& a = rule.nodes[k - 1];
    const QuadratureNode& b = rule.nodes[k];
    CHECK(std::tuple(a.axis, a.i, a.j, a.x[a.axis]) < std::tuple(b.axis, b.i, b.j, b.x[b.axis]));
  }
}

TEST_CASE("widening the membership cutoff only adds zero-weight nodes") {
  auto s = make_surface("prolate-spheroid");
  QuadratureOptions tight;  // defaults: membership at the partition support
  QuadratureOptions wide = tight;
  wide.membership_angle_deg = 89.0;
  const QuadratureRule a = generate_rule(*s, 1.0 / 8, tight);
  const QuadratureRule b = generate_rule(*s, 1.0 / 8, wide);
  CHECK(b.size() >= a.size());
  CHECK(surface_area(a) == doctest::Approx(surface_area(b)).epsilon(1e-14));
  CHECK(flux_volume(a) == doctest::Approx(flux_volume(b)).epsilon(1e-14));
}

TEST_CASE("node dump: header and row count") {
  auto s = make_surface("sphere");
  const QuadratureRule rule = generate_rule(*s, 1.0 / 8);
  const std::string path = "test_nodes_dump.csv";
  dump_nodes_csv(rule, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "axis,i,j,x1,x2,x3,n1,n2,n3,w");
  size_t rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == rule.size());
  in.close();
  std::remove(path.c_str());
}
