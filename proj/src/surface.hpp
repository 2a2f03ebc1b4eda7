// Closed smooth surfaces given implicitly as phi = 0 (phi < 0 inside), with
// analytic gradients, bounding boxes, and closest-point projection.
#pragma once

#include <memory>
#include <string>

#include "geometry.hpp"

namespace nearsing {

class ImplicitSurface {
 public:
  virtual ~ImplicitSurface() = default;

  virtual double phi(const Vec3& x) const = 0;
  virtual Vec3 grad(const Vec3& x) const = 0;
  // Axis-aligned box containing the surface (tight up to exact extents).
  virtual Box3 bounding_box() const = 0;
  virtual const char* name() const = 0;

  double diameter() const { return bounding_box().diameter(); }
};

// Built-in surfaces: "sphere", "rotated-ellipsoid", "prolate-spheroid",
// "cassini", "molecular".  Throws InvalidArgument for unknown names.
std::unique_ptr<ImplicitSurface> make_surface(const std::string& name);

struct ClosestPointOptions {
  int max_iterations = 100;
  double tolerance = 1e-12;  // relative to the surface diameter
};

// Closest surface point, signed distance b (negative inside, sign taken from
// phi(y)), outward normal at the closest point, and chi.  Two stages: gradient
// projection to reach the zero level set, then a constrained Gauss-Newton
// polish enforcing that y - x0 is parallel to the normal.  Throws
// NonConvergence for degenerate targets (e.g. equidistant centers).
NearFrame closest_point(const ImplicitSurface& surface, const Vec3& y,
                        const ClosestPointOptions& opts = {});

inline double signed_distance(const ImplicitSurface& surface, const Vec3& y) {
  return closest_point(surface, y).b;
}

// Outward unit normal at a point already on the surface.
Vec3 outward_normal(const ImplicitSurface& surface, const Vec3& x);

}  // namespace nearsing
