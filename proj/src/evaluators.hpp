// Layer-potential evaluation: quadrature + regularized kernels + width
// extrapolation, with near/far path selection per target.
//
// Near the surface, each per-width value splits into one singular-kernel sum
// over all nodes outside a correction radius plus a regularized sum over the
// few nodes inside it (the two differ only where the shape-function tails are
// nonnegligible, and the radius is chosen so the truncated tails are below
// roundoff).  This keeps the dominant cost at one kernel pass per target
// regardless of how many widths are extrapolated.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "extrapolation.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "surface.hpp"

namespace nearsing {

enum class EvalPath { NearExtrapolated, OnSurfaceSharp, FarUnregularized };

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

// Result of one target evaluation.  Scalar families use value.x and raw[i].x.
// When path is NearExtrapolated, value = sum_i weights.weights[i] * raw[i].
struct TargetResult {
  Vec3 value{};
  std::array<Vec3, 4> raw{};
  WeightSolution weights;
  NearFrame frame;
  EvalPath path = EvalPath::NearExtrapolated;
};

enum class KernelFamily {
  LaplaceSingle,
  LaplaceDouble,
  LaplaceCombined,  // single(f) + double(g), one node pass
  StokesSingle,
  StokesDouble,
  StokesCombined,  // single(f) + double(q), one node pass
};

struct BatchProblem {
  KernelFamily family;
  const ImplicitSurface* surface = nullptr;
  const QuadratureRule* rule = nullptr;
  ExtrapolationPlan plan;
  // Densities, evaluable at nodes and at closest points (for subtraction).
  ScalarField f_scalar, g_scalar;  // Laplace single / double
  VectorField f_vector, q_vector;  // Stokes single / double
  bool baseline = false;           // force unregularized evaluation everywhere
  int threads = 1;
};

// Evaluates all targets; deterministic for a fixed problem regardless of the
// thread count (per-target sums are sequential in fixed node order).
std::vector<TargetResult> evaluate_batch(const BatchProblem& problem,
                                         std::span<const Vec3> targets);

// Single-target conveniences (thin wrappers over evaluate_batch).
TargetResult laplace_single(const Vec3& y, const ImplicitSurface& surface,
                            const QuadratureRule& rule, const ScalarField& f,
                            const ExtrapolationPlan& plan);
TargetResult laplace_double(const Vec3& y, const ImplicitSurface& surface,
                            const QuadratureRule& rule, const ScalarField& g,
                            const ExtrapolationPlan& plan);
TargetResult stokes_single(const Vec3& y, const ImplicitSurface& surface,
                           const QuadratureRule& rule, const VectorField& f,
                           const ExtrapolationPlan& plan);
TargetResult stokes_double(const Vec3& y, const ImplicitSurface& surface,
                           const QuadratureRule& rule, const VectorField& q,
                           const ExtrapolationPlan& plan);

// On-surface evaluation with the sharp fifth-order shape functions at a single
// width delta = delta_factor * h (no extrapolation); x0 must lie on the
// surface.  The double layer uses the subtracted form with chi = 1/2.
double laplace_single_on(const Vec3& x0, const ImplicitSurface& surface,
                         const QuadratureRule& rule, const ScalarField& f,
                         double delta_factor = 3.0);
double laplace_double_on(const Vec3& x0, const ImplicitSurface& surface,
                         const QuadratureRule& rule, const ScalarField& g,
                         double delta_factor = 3.0);

}  // namespace nearsing
