#pragma once

// Catalog of reference problems with closed-form solutions, used by the
// convergence harness and the verification suites.  Each case bundles a
// surface, a kernel family, the layer densities, and the exact field the
// layer potentials reproduce (region-aware: inside / on / outside values
// follow the jump relations of the corresponding representation formula).

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "evaluators.hpp"
#include "geometry.hpp"
#include "surface.hpp"

namespace nearsing {

enum class ValidRegion {
  Everywhere,  // exact field known on both sides of the surface
  InsideOnly,  // exact field known only at interior targets
};

struct TestCase {
  std::string name;
  KernelFamily family = KernelFamily::LaplaceSingle;
  std::shared_ptr<const ImplicitSurface> surface;

  ScalarField f_scalar;  // single-layer scalar density (if used)
  ScalarField g_scalar;  // double-layer scalar density (if used)
  VectorField f_vector;  // single-layer vector density (if used)
  VectorField q_vector;  // double-layer vector density (if used)

  // Exact value at target y whose near-surface frame is given.  Scalar
  // families report the value in .x with .y = .z = 0.
  std::function<Vec3(const Vec3& y, const NearFrame& frame)> exact;

  ValidRegion valid_region = ValidRegion::Everywhere;
  bool vector_valued = false;
  // Cases whose published error study restricts targets to the first octant
  // by default (large node sets); the harness honors this unless overridden.
  bool default_first_octant = false;
};

// Names: sphere-single, sphere-double, combined-ellipsoid, combined-cassini,
// combined-molecular, spheroid-translation, stresslet-sphere,
// stresslet-spheroid, stokes-sphere, stokes-ellipsoid, stokes-molecular.
TestCase make_case(const std::string& name);

std::vector<std::string> case_names();

}  // namespace nearsing
