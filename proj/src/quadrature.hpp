// Grid-aligned surface quadrature.
//
// Nodes are the intersections of the surface with the lines of a uniform
// grid.  Each node carries a weight w = psi_d(n) h^2 / |n_d|, where d is the
// axis of its line and the psi's are a partition of unity over the three axis
// directions built from a smooth bump of the normal's inclination.  Summing
// w f over nodes integrates f over the surface with high order.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "surface.hpp"

namespace nearsing {

struct QuadratureOptions {
  double partition_angle_deg = 70.0;   // support half-angle of the axis bump
  double membership_angle_deg = 70.0;  // axis admission cutoff (>= partition angle)
  double bump_sharpness = 2.0;         // exponent scale a in exp(a r^2/(r^2-1))
  double sample_step = 0.25;           // along-line sampling step, units of h
};

struct QuadratureNode {
  int axis;        // axis of the grid line the node lies on
  int i, j;        // integer grid indices of the two fixed coordinates
  Vec3 x;          // node position (on the surface to ~1e-12)
  Vec3 n;          // outward unit normal
  double w;        // positive quadrature weight
};

struct QuadratureRule {
  double h = 0.0;
  std::vector<QuadratureNode> nodes;

  size_t size() const { return nodes.size(); }
};

// The inclination bump: b(r) = exp(a r^2 / (r^2 - 1)) for |r| < 1, else 0.
double partition_bump(double r, double sharpness);

// Builds the rule for one surface and spacing.  Throws RootRefinementFailure
// if a well-inclined crossing cannot be polished to the surface tolerance.
QuadratureRule generate_rule(const ImplicitSurface& surface, double h,
                             const QuadratureOptions& opts = {});

// Sum of w * f(node) in the rule's fixed node order.
template <typename F>
double integrate(const QuadratureRule& rule, F&& f) {
  double acc = 0.0;
  for (const QuadratureNode& n : rule.nodes) acc += n.w * f(n);
  return acc;
}

inline double surface_area(const QuadratureRule& rule) {
  return integrate(rule, [](const QuadratureNode&) { return 1.0; });
}

// Writes nodes as CSV: axis,i,j,x1,x2,x3,n1,n2,n3,w (17 significant digits).
void dump_nodes_csv(const QuadratureRule& rule, const std::string& path);

}  // namespace nearsing
