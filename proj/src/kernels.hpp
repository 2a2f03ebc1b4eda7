// Regularized layer-potential kernels.
//
// The singular Laplace / Stokes kernels are smoothed by replacing 1/r^p with
// shape-function quotients s_k(r/d)/r^p, where the s_k are built from erf and
// Gaussian corrections so that the quotient is analytic at r = 0.  Each
// quotient switches to a truncated even Taylor series near r = 0; the switch
// points keep both branches near full precision (the worst spot, the direct
// s3 branch just above its switch, carries ~1e-12 relative error).
#pragma once

#include <array>
#include <cmath>

#include "geometry.hpp"

namespace nearsing {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoOverSqrtPi = 1.1283791670955125739;  // 2/sqrt(pi)
inline constexpr double kInvFourPi = 1.0 / (4.0 * kPi);
inline constexpr double kInvEightPi = 1.0 / (8.0 * kPi);

// ---------------------------------------------------------------------------
// Shape functions of the dimensionless radius q = r / delta.
//
//   s1(q) = erf(q)                                    ~ q    as q -> 0
//   s2(q) = erf(q) - (2/sqrt(pi)) q e^{-q^2}          ~ q^3
//   s3(q) = erf(q) - (2/sqrt(pi)) (q + 2q^3/3) e^{-q^2} ~ q^5
//
// plus the high-order on-surface variants s1#, s2#.  All tend to 1 as q -> inf.
// ---------------------------------------------------------------------------

inline double shape_s1(double q) { return std::erf(q); }

inline double shape_s2(double q) {
  return std::erf(q) - kTwoOverSqrtPi * q * std::exp(-q * q);
}

inline double shape_s3(double q) {
  return std::erf(q) - kTwoOverSqrtPi * (q + (2.0 / 3.0) * q * q * q) * std::exp(-q * q);
}

inline double shape_s1_sharp(double q) {
  return std::erf(q) + (kTwoOverSqrtPi / 3.0) * (5.0 * q - 2.0 * q * q * q) * std::exp(-q * q);
}

inline double shape_s2_sharp(double q) {
  return std::erf(q) - kTwoOverSqrtPi * (q - (2.0 / 3.0) * q * q * q) * std::exp(-q * q);
}

// Complementary tails 1 - s_k(q); these decay like e^{-q^2} and are what a
// truncated correction sum actually accumulates.
inline double shape_tail_s1(double q) { return std::erfc(q); }

inline double shape_tail_s2(double q) {
  return std::erfc(q) + kTwoOverSqrtPi * q * std::exp(-q * q);
}

inline double shape_tail_s3(double q) {
  return std::erfc(q) + kTwoOverSqrtPi * (q + (2.0 / 3.0) * q * q * q) * std::exp(-q * q);
}

// ---------------------------------------------------------------------------
// Analytic quotients s_k(q)/q^p with series branches near q = 0.
//
// The direct formulas lose relative accuracy like eps/q^2 (s2/q^3) and eps/q^4
// (s3/q^5) because s2, s3 are differences of nearly equal terms; the switch
// points below keep s2/q^3 at ~1e-13 and s3/q^5 at ~1e-12 (worst just above
// the switch, where the direct branch cancels about four leading digits).
// ---------------------------------------------------------------------------

inline double s1_over_q(double q) {
  if (q < 1e-4) {
    const double q2 = q * q;
    return kTwoOverSqrtPi *
           (1.0 + q2 * (-1.0 / 3.0 + q2 * (1.0 / 10.0 + q2 * (-1.0 / 42.0 + q2 / 216.0))));
  }
  return std::erf(q) / q;
}

inline double s2_over_q3(double q) {
  if (q < 0.05) {
    const double q2 = q * q;
    return kTwoOverSqrtPi *
           (2.0 / 3.0 +
            q2 * (-2.0 / 5.0 + q2 * (1.0 / 7.0 + q2 * (-1.0 / 27.0 + q2 / 132.0))));
  }
  return shape_s2(q) / (q * q * q);
}

inline double s3_over_q5(double q) {
  if (q < 0.15) {
    const double q2 = q * q;
    return kTwoOverSqrtPi *
           (4.0 / 15.0 +
            q2 * (-4.0 / 21.0 +
                  q2 * (2.0 / 27.0 + q2 * (-2.0 / 99.0 + q2 * (1.0 / 234.0 - q2 / 1350.0)))));
  }
  const double q2 = q * q;
  return shape_s3(q) / (q2 * q2 * q);
}

inline double s1_sharp_over_q(double q) {
  return s1_over_q(q) + (kTwoOverSqrtPi / 3.0) * (5.0 - 2.0 * q * q) * std::exp(-q * q);
}

inline double s2_sharp_over_q3(double q) {
  return s2_over_q3(q) + (2.0 * kTwoOverSqrtPi / 3.0) * std::exp(-q * q);
}

// Dimensioned quotients: s_k(r/delta) / r^p.
inline double s1_over_r(double r, double delta) { return s1_over_q(r / delta) / delta; }

inline double s2_over_r3(double r, double delta) {
  const double d3 = delta * delta * delta;
  return s2_over_q3(r / delta) / d3;
}

inline double s3_over_r5(double r, double delta) {
  const double d2 = delta * delta;
  return s3_over_q5(r / delta) / (d2 * d2 * delta);
}

// ---------------------------------------------------------------------------
// Regularized kernels (standalone entry points; evaluators use fused forms).
// ---------------------------------------------------------------------------

// Single-layer Laplace kernel G_delta(x - y) = -s1(r/delta) / (4 pi r).
inline double laplace_single_kernel_reg(const Vec3& r_vec, double delta) {
  return -kInvFourPi * s1_over_r(norm(r_vec), delta);
}

// Double-layer Laplace kernel (x - y).n(x) s2(r/delta) / (4 pi r^3),
// r_vec = x - y.
inline double laplace_double_kernel_reg(const Vec3& r_vec, const Vec3& n_x, double delta) {
  return kInvFourPi * dot(r_vec, n_x) * s2_over_r3(norm(r_vec), delta);
}

// Regularized Stokeslet: S_ij = delta_ij s1(q)/r + d_i d_j s2(q)/r^3 with
// d = y - x.  (The 1/(8 pi) prefactor is applied by the evaluators.)
inline Mat3 stokeslet_kernel_reg(const Vec3& y, const Vec3& x, double delta) {
  const Vec3 d = y - x;
  const double r = norm(d);
  const double a = s1_over_r(r, delta);
  const double c = s2_over_r3(r, delta);
  Mat3 s;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s(i, j) = c * d[i] * d[j];
    s(i, i) += a;
  }
  return s;
}

// Rank-3 stresslet tensor split relative to a target frame.
//
// With xh = x - x0 and n0 the normal at the closest point x0, the singular
// stresslet T_ijk(y,x) = -6 d_i d_j d_k / r^5 (d = y - x) decomposes as
//   T = -6 [ t1 / r^3 + (t2 - (r^2 - b^2) t1) / r^5 ],
//   t1_ijk = b n0_i n0_j n0_k - (xh_i n0_j n0_k + n0_i xh_j n0_k + n0_i n0_j xh_k),
//   t2_ijk = b (xh_i xh_j n0_k + xh_i n0_j xh_k + n0_i xh_j xh_k) - xh_i xh_j xh_k,
// where the 1/r^3 part carries the O(1/r^2) strength and the 1/r^5 part is a
// weaker O(1/r) remainder.  Regularization applies s2 to the first part and s3
// to the second.  r^2 - b^2 is evaluated as |xh|^2 - 2 b xh.n0, which is exact
// and avoids cancellation for y near the surface.
struct StressletSplit {
  std::array<double, 27> t;  // T^delta_ijk, index 9i + 3j + k
};

StressletSplit stresslet_kernel_split_reg(const Vec3& y, const Vec3& x, const Vec3& n_x,
                                          const NearFrame& frame, double delta);

// Singular (unregularized) counterparts used on the far path.
inline double laplace_single_kernel(const Vec3& r_vec) { return -kInvFourPi / norm(r_vec); }

inline double laplace_double_kernel(const Vec3& r_vec, const Vec3& n_x) {
  const double r2 = norm2(r_vec);
  return kInvFourPi * dot(r_vec, n_x) / (r2 * std::sqrt(r2));
}

}  // namespace nearsing
