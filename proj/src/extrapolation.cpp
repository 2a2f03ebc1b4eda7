#include "extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "kernels.hpp"

namespace nearsing {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628695;  // 1/sqrt(pi)

}  // namespace

double moment_i0(double lambda) {
  const double l = std::abs(lambda);
  return std::exp(-l * l) * kInvSqrtPi - l * std::erfc(l);
}

double moment_i2(double lambda) {
  const double l = std::abs(lambda);
  const double l2 = l * l;
  return (2.0 / 3.0) * ((0.5 - l2) * std::exp(-l2) * kInvSqrtPi + l2 * l * std::erfc(l));
}

double moment_i4(double lambda) {
  const double l = std::abs(lambda);
  const double l2 = l * l;
  return (2.0 / 15.0) * ((4.0 * l2 * l2 - 2.0 * l2 + 3.0) * std::exp(-l2) * kInvSqrtPi -
                         4.0 * l2 * l2 * l * std::erfc(l));
}

void ExtrapolationPlan::validate() const {
  if (order != 5 && order != 7)
    fail(ErrorCode::InvalidArgument, "extrapolation", "order must be 5 or 7");
  if (static_cast<int>(rhos.size()) != width_count())
    fail(ErrorCode::InvalidArgument, "extrapolation",
         "order " + std::to_string(order) + " needs " + std::to_string(width_count()) +
             " width multipliers, got " + std::to_string(rhos.size()));
  for (double r : rhos)
    if (!(r > 0.0)) fail(ErrorCode::InvalidArgument, "extrapolation", "multipliers must be positive");
  for (size_t i = 0; i < rhos.size(); ++i)
    for (size_t j = i + 1; j < rhos.size(); ++j)
      if (rhos[i] == rhos[j])
        fail(ErrorCode::InvalidArgument, "extrapolation", "multipliers must be distinct");
  if (rule == DeltaRule::Fractional) {
    if (!(fractional_q > 0.0 && fractional_q <= 1.0))
      fail(ErrorCode::InvalidArgument, "extrapolation", "fractional exponent must be in (0, 1]");
    if (!(anchor_h > 0.0))
      fail(ErrorCode::InvalidArgument, "extrapolation", "anchor spacing must be positive");
  }
  if (!(far_cutoff > 0.0))
    fail(ErrorCode::InvalidArgument, "extrapolation", "far cutoff must be positive");
}

namespace {

// Solves the n x n moment system sum_i a_i M[i][j] = (j == 0) by Gaussian
// elimination with row equilibration and partial pivoting.  The weights are
// invariant under scaling the moment columns, so equilibration only improves
// conditioning; a genuinely defective system still surfaces as SingularSystem.
void solve_moment_system(const double M[4][4], int n, std::array<double, 4>& a) {
  double A[4][5];
  for (int j = 0; j < n; ++j) {  // row j of the transposed system
    double maxabs = 0.0;
    for (int i = 0; i < n; ++i) maxabs = std::max(maxabs, std::abs(M[i][j]));
    if (!(maxabs > 0.0) || !std::isfinite(maxabs))
      fail(ErrorCode::SingularSystem, "extrapolation", "degenerate moment row");
    for (int i = 0; i < n; ++i) A[j][i] = M[i][j] / maxabs;
    A[j][n] = (j == 0) ? 1.0 / maxabs : 0.0;
  }

  double piv_min = 1e300, piv_max = 0.0;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    if (p != c)
      for (int k = 0; k <= n; ++k) std::swap(A[c][k], A[p][k]);
    const double piv = A[c][c];
    if (piv == 0.0 || !std::isfinite(piv))
      fail(ErrorCode::SingularSystem, "extrapolation", "zero pivot in moment system");
    piv_min = std::min(piv_min, std::abs(piv));
    piv_max = std::max(piv_max, std::abs(piv));
    for (int r = c + 1; r < n; ++r) {
      const double m = A[r][c] / piv;
      if (m == 0.0) continue;
      for (int k = c; k <= n; ++k) A[r][k] -= m * A[c][k];
    }
  }
  if (piv_max / piv_min > 1e12)
    fail(ErrorCode::SingularSystem, "extrapolation",
         "moment system condition estimate exceeds 1e12");

  for (int r = n - 1; r >= 0; --r) {
    double s = A[r][n];
    for (int k = r + 1; k < n; ++k) s -= A[r][k] * a[k];
    a[r] = s / A[r][r];
  }
}

WeightSolution solve_impl(const ExtrapolationPlan& plan, double b, double h, bool clamp) {
  plan.validate();
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "extrapolation", "spacing must be positive");

  WeightSolution out;
  out.count = plan.width_count();
  const double scale = plan.rule == DeltaRule::Proportional
                           ? h
                           : std::pow(h, plan.fractional_q) *
                                 std::pow(plan.anchor_h, 1.0 - plan.fractional_q);
  double delta_max = 0.0;
  for (int i = 0; i < out.count; ++i) {
    out.deltas[i] = plan.rhos[i] * scale;
    out.lambdas[i] = b / out.deltas[i];
    delta_max = std::max(delta_max, out.deltas[i]);
  }

  if (clamp && std::abs(b) >= plan.far_cutoff * delta_max) {
    out.weights = {1.0, 0.0, 0.0, 0.0};
    out.degenerate_far = true;
    return out;
  }

  double M[4][4] = {};
  for (int i = 0; i < out.count; ++i) {
    const double rho = plan.rhos[i];
    M[i][0] = 1.0;
    M[i][1] = rho * moment_i0(out.lambdas[i]);
    M[i][2] = rho * rho * rho * moment_i2(out.lambdas[i]);
    if (out.count == 4) M[i][3] = rho * rho * rho * rho * rho * moment_i4(out.lambdas[i]);
  }
  solve_moment_system(M, out.count, out.weights);
  return out;
}

}  // namespace

WeightSolution solve_weights(const ExtrapolationPlan& plan, double b, double h) {
  return solve_impl(plan, b, h, /*clamp=*/true);
}

WeightSolution solve_weights_unclamped(const ExtrapolationPlan& plan, double b, double h) {
  return solve_impl(plan, b, h, /*clamp=*/false);
}

double weight_system_determinant(const std::vector<double>& rhos, double x) {
  if (rhos.size() != 3)
    fail(ErrorCode::InvalidArgument, "extrapolation", "determinant check expects three multipliers");
  double u[3], v[3];
  for (int i = 0; i < 3; ++i) {
    const double rho = rhos[i];
    u[i] = rho * moment_i0(x / rho);
    v[i] = rho * rho * rho * moment_i2(x / rho);
  }
  return (u[1] * v[2] - u[2] * v[1]) - (u[0] * v[2] - u[2] * v[0]) + (u[0] * v[1] - u[1] * v[0]);
}

void determinant_positivity_check(const std::vector<double>& rhos) {
  if (rhos.size() != 3)
    fail(ErrorCode::InvalidArgument, "extrapolation", "determinant check expects three multipliers");
  std::vector<double> r = rhos;
  std::sort(r.begin(), r.end());
  const double closed =
      (r[2] - r[1]) * (r[1] - r[0]) * (r[2] - r[0]) * (r[0] + r[1] + r[2]) / (3.0 * kPi);
  const double d0 = weight_system_determinant(r, 0.0);
  if (std::abs(d0 - closed) > 1e-12)
    fail(ErrorCode::RelationViolated, "extrapolation",
         "determinant at coincidence deviates from closed form by " +
             std::to_string(std::abs(d0 - closed)));
  for (int k = 0; k <= 200; ++k) {
    const double x = 0.05 * k;
    const double d = weight_system_determinant(r, x);
    if (!(d > 0.0))
      fail(ErrorCode::PositivityViolated, "extrapolation",
           "moment determinant not positive at x = " + std::to_string(x));
  }
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

void companion_relations_check(double tol) {
  const double upper = 12.0;  // integrands decay like e^{-s^2 - lambda^2}
  for (int k = 0; k <= 12; ++k) {
    const double lambda = 0.25 * k;

    // (s2(r)-1)/r^3 * s^{n+3} written as -tail2(r) * s^n * (s/r)^3, which is
    // stable both at r -> 0 and at large r; likewise for the s3 family.
    const auto j_moment = [&](int n) {
      return integrate_adaptive(
          [&](double s) {
            if (s == 0.0) return (lambda == 0.0 && n == 0) ? -1.0 : 0.0;
            const double r = std::sqrt(s * s + lambda * lambda);
            const double ratio = s / r;
            return -shape_tail_s2(r) * std::pow(s, n) * ratio * ratio * ratio;
          },
          0.0, upper, 1e-12);
    };
    const auto k_moment = [&](int n) {
      return integrate_adaptive(
          [&](double s) {
            if (s == 0.0) return (lambda == 0.0 && n == 0) ? 1.0 : 0.0;
            const double r = std::sqrt(s * s + lambda * lambda);
            const double ratio = s / r;
            const double ratio2 = ratio * ratio;
            return shape_tail_s3(r) * std::pow(s, n) * ratio2 * ratio2 * ratio;
          },
          0.0, upper, 1e-12);
    };

    const double i0 = moment_i0(lambda), i2 = moment_i2(lambda), i4 = moment_i4(lambda);
    const struct {
      double got, want;
      const char* name;
    } checks[] = {
        {j_moment(0), -2.0 * i0, "J0 = -2 I0"},   {j_moment(2), -4.0 * i2, "J2 = -4 I2"},
        {j_moment(4), -6.0 * i4, "J4 = -6 I4"},   {k_moment(0), (8.0 / 3.0) * i0, "K0 = 8/3 I0"},
        {k_moment(2), 8.0 * i2, "K2 = 8 I2"},
    };
    for (const auto& c : checks) {
      if (!(std::abs(c.got - c.want) <= tol))
        fail(ErrorCode::RelationViolated, "extrapolation",
             std::string(c.name) + " violated at lambda = " + std::to_string(lambda) +
                 " (difference " + std::to_string(std::abs(c.got - c.want)) + ")");
    }
  }
}

}  // namespace nearsing
