// Richardson-type extrapolation across regularization widths.
//
// For a target at signed distance b, the regularization error of an erf-family
// smoothed layer potential expands in odd powers of delta with coefficients
// given by the moment integrals I_n(lambda), lambda = b/delta:
//
//   eps(delta) ~ c1 delta I0(lambda) + c3 delta^3 I2(lambda) + c5 delta^5 I4(lambda) + ...
//
// Evaluating at several widths delta_i = rho_i * (width scale) and solving a
// small linear system for weights a_i that cancel the leading terms (while
// summing to 1) removes the error through the chosen order.
#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace nearsing {

// Moment integrals I_n(lambda) = int_0^inf erfc(sqrt(s^2+lambda^2)) /
// sqrt(s^2+lambda^2) * s^{n+1} ds in closed form.  Even in lambda.
double moment_i0(double lambda);
double moment_i2(double lambda);
double moment_i4(double lambda);

enum class DeltaRule {
  Proportional,  // delta_i = rho_i * h
  Fractional,    // delta_i = rho_i * h^q * anchor_h^(1-q)
};

struct ExtrapolationPlan {
  std::vector<double> rhos;  // distinct positive multipliers, one per width
  int order = 5;             // 5 (three widths) or 7 (four widths)
  DeltaRule rule = DeltaRule::Proportional;
  double fractional_q = 4.0 / 5.0;
  double anchor_h = 1.0 / 64.0;
  double far_cutoff = 4.0;  // |b| >= far_cutoff * max(delta): no extrapolation

  int width_count() const { return order == 7 ? 4 : 3; }
  void validate() const;  // throws InvalidArgument
};

struct WeightSolution {
  std::array<double, 4> weights{};  // a_i, sum to 1
  std::array<double, 4> deltas{};
  std::array<double, 4> lambdas{};  // b / delta_i (signed)
  int count = 0;
  bool degenerate_far = false;      // beyond far cutoff: weights = (1, 0, 0, ...)
};

// Widths and extrapolation weights for a target at signed distance b and grid
// spacing h.  Honors the far cutoff (degenerate weights past it).
WeightSolution solve_weights(const ExtrapolationPlan& plan, double b, double h);

// Same, but always solves the moment system regardless of the far cutoff.
WeightSolution solve_weights_unclamped(const ExtrapolationPlan& plan, double b, double h);

inline double extrapolate(std::span<const double> values, std::span<const double> weights) {
  double acc = 0.0;
  for (size_t i = 0; i < values.size(); ++i) acc += weights[i] * values[i];
  return acc;
}

// Determinant of the 3x3 moment system for width multipliers rhos at
// dimensionless distance x = b/h: rows [1, rho_i I0(x/rho_i), rho_i^3 I2(x/rho_i)].
double weight_system_determinant(const std::vector<double>& rhos, double x);

// Verifies D(0) against the closed form
//   (rho3-rho2)(rho2-rho1)(rho3-rho1)(rho1+rho2+rho3) / (3 pi)
// and positivity of D(x) on x in [0, 10] (step 0.05).  Throws
// RelationViolated / PositivityViolated.
void determinant_positivity_check(const std::vector<double>& rhos);

// Integrates the companion moment families
//   J_n(lambda) = int (s2(r)-1)/r^3 * s^{n+3} ds,   r = sqrt(s^2+lambda^2),
//   K_n(lambda) = int (1-s3(r))/r^5 * s^{n+5} ds,
// by adaptive quadrature and checks the identities J0 = -2 I0, J2 = -4 I2,
// J4 = -6 I4, K0 = (8/3) I0, K2 = 8 I2 on lambda in {0, 0.25, ..., 3}.
// Throws RelationViolated if any identity misses the tolerance.
void companion_relations_check(double tol = 1e-8);

// Adaptive Simpson quadrature (exposed for reuse in verification code).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol);

}  // namespace nearsing
