#include "kernels.hpp"

namespace nearsing {

StressletSplit stresslet_kernel_split_reg(const Vec3& y, const Vec3& x, const Vec3& n_x,
                                          const NearFrame& frame, double delta) {
  (void)n_x;  // the node normal contracts with the tensor later, not here
  const Vec3 xh = x - frame.x0;
  const Vec3& n0 = frame.n0;
  const double b = frame.b;
  const Vec3 d = y - x;
  const double r = norm(d);
  const double r2mb2 = norm2(xh) - 2.0 * b * dot(xh, n0);  // r^2 - b^2, exact form

  const double f2 = s2_over_r3(r, delta);
  const double f3 = s3_over_r5(r, delta);

  StressletSplit out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const double t1 = b * n0[i] * n0[j] * n0[k] -
                          (xh[i] * n0[j] * n0[k] + n0[i] * xh[j] * n0[k] + n0[i] * n0[j] * xh[k]);
        const double t2 = b * (xh[i] * xh[j] * n0[k] + xh[i] * n0[j] * xh[k] + n0[i] * xh[j] * xh[k]) -
                          xh[i] * xh[j] * xh[k];
        out.t[9 * i + 3 * j + k] = -6.0 * (t1 * f2 + (t2 - r2mb2 * t1) * f3);
      }
    }
  }
  return out;
}

}  // namespace nearsing
