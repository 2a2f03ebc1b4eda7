#include "surface.hpp"

#include <cmath>

#include "errors.hpp"

namespace nearsing {

namespace {

class Sphere final : public ImplicitSurface {
 public:
  double phi(const Vec3& x) const override { return norm2(x) - 1.0; }
  Vec3 grad(const Vec3& x) const override { return 2.0 * x; }
  Box3 bounding_box() const override { return {{-1, -1, -1}, {1, 1, 1}}; }
  const char* name() const override { return "sphere"; }
};

// Ellipsoid with semi-axes (1, 0.8, 0.6) whose principal frame is reached by
// the rotation z = M x.
class RotatedEllipsoid final : public ImplicitSurface {
 public:
  RotatedEllipsoid() {
    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
    m_ = Mat3{{s2 / s6, 0.0, -2.0 / s6, s2 / s6, s3 / s6, 1.0 / s6, s2 / s6, -s3 / s6, 1.0 / s6}};
  }
  double phi(const Vec3& x) const override {
    const Vec3 z = m_ * x;
    return z.x * z.x * inv2_[0] + z.y * z.y * inv2_[1] + z.z * z.z * inv2_[2] - 1.0;
  }
  Vec3 grad(const Vec3& x) const override {
    const Vec3 z = m_ * x;
    const Vec3 gz{2.0 * z.x * inv2_[0], 2.0 * z.y * inv2_[1], 2.0 * z.z * inv2_[2]};
    return m_.transposed() * gz;
  }
  Box3 bounding_box() const override {
    const Vec3 half{std::sqrt(2.0 / 3.0), std::sqrt(0.5), std::sqrt(5.0 / 6.0)};
    return {-1.0 * half, half};
  }
  const char* name() const override { return "rotated-ellipsoid"; }

 private:
  Mat3 m_;
  std::array<double, 3> inv2_{1.0, 1.0 / (0.8 * 0.8), 1.0 / (0.6 * 0.6)};
};

class ProlateSpheroid final : public ImplicitSurface {
 public:
  double phi(const Vec3& x) const override {
    return x.x * x.x + 4.0 * (x.y * x.y + x.z * x.z) - 1.0;
  }
  Vec3 grad(const Vec3& x) const override { return {2.0 * x.x, 8.0 * x.y, 8.0 * x.z}; }
  Box3 bounding_box() const override { return {{-1, -0.5, -0.5}, {1, 0.5, 0.5}}; }
  const char* name() const override { return "prolate-spheroid"; }
};

// Surface of revolution (about the x3 axis) of a Cassini oval; a = 0.65,
// b = 0.7 gives a biconcave disc.  Extents: radius sqrt(a^2 + b^2) in the
// x1-x2 plane and b^2/(2a) along x3.
class CassiniOval final : public ImplicitSurface {
 public:
  double phi(const Vec3& x) const override {
    const double s = norm2(x);
    const double t = s + kA * kA;
    return t * t - 4.0 * kA * kA * (x.x * x.x + x.y * x.y) - kB4;
  }
  Vec3 grad(const Vec3& x) const override {
    const double s = norm2(x);
    const double c = 4.0 * (s + kA * kA);
    const double d = 8.0 * kA * kA;
    return {c * x.x - d * x.x, c * x.y - d * x.y, c * x.z};
  }
  Box3 bounding_box() const override {
    const double r = std::sqrt(kA * kA + kB * kB);
    const double z = kB * kB / (2.0 * kA);
    return {{-r, -r, -z}, {r, r, z}};
  }
  const char* name() const override { return "cassini"; }

 private:
  static constexpr double kA = 0.65;
  static constexpr double kB = 0.7;
  static constexpr double kB4 = kB * kB * kB * kB;
};

// Level set of a sum of four Gaussians placed at the vertices of a regular
// tetrahedron (a molecular-style blended surface).
class Molecular final : public ImplicitSurface {
 public:
  double phi(const Vec3& x) const override {
    double s = 0.0;
    for (const Vec3& c : kCenters) s += std::exp(-4.0 * norm2(x - c));
    return 0.6 - s;
  }
  Vec3 grad(const Vec3& x) const override {
    Vec3 g{};
    for (const Vec3& c : kCenters) {
      const Vec3 d = x - c;
      g += d * (8.0 * std::exp(-4.0 * norm2(d)));
    }
    return g;
  }
  Box3 bounding_box() const override {
    // Centers' extent inflated by the largest possible blended-offset radius.
    Box3 b{kCenters[0], kCenters[0]};
    for (const Vec3& c : kCenters) {
      for (int k = 0; k < 3; ++k) {
        b.lo[k] = std::min(b.lo[k], c[k]);
        b.hi[k] = std::max(b.hi[k], c[k]);
      }
    }
    const double r = std::sqrt(std::log(4.0 / 0.6) / 4.0);
    return {b.lo - Vec3{r, r, r}, b.hi + Vec3{r, r, r}};
  }
  const char* name() const override { return "molecular"; }

 private:
  static constexpr std::array<Vec3, 4> kCenters{
      Vec3{0.5773502691896257, 0.0, -0.20412414523193148},
      Vec3{-0.28867513459481287, 0.5, -0.20412414523193148},
      Vec3{-0.28867513459481287, -0.5, -0.20412414523193148},
      Vec3{0.0, 0.0, 0.6123724356957945}};
};

// Solves the n x n system A x = rhs in place with partial pivoting.
bool solve_dense(int n, double A[4][4], double rhs[4], double out[4]) {
  int perm[4] = {0, 1, 2, 3};
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[perm[r]][c]) > std::abs(A[perm[p]][c])) p = r;
    std::swap(perm[c], perm[p]);
    const double piv = A[perm[c]][c];
    if (piv == 0.0 || !std::isfinite(piv)) return false;
    for (int r = c + 1; r < n; ++r) {
      const double m = A[perm[r]][c] / piv;
      if (m == 0.0) continue;
      A[perm[r]][c] = 0.0;
      for (int k = c + 1; k < n; ++k) A[perm[r]][k] -= m * A[perm[c]][k];
      rhs[perm[r]] -= m * rhs[perm[c]];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[perm[r]];
    for (int k = r + 1; k < n; ++k) s -= A[perm[r]][k] * out[k];
    out[r] = s / A[perm[r]][r];
  }
  return true;
}

}  // namespace

std::unique_ptr<ImplicitSurface> make_surface(const std::string& name) {
  if (name == "sphere") return std::make_unique<Sphere>();
  if (name == "rotated-ellipsoid") return std::make_unique<RotatedEllipsoid>();
  if (name == "prolate-spheroid") return std::make_unique<ProlateSpheroid>();
  if (name == "cassini") return std::make_unique<CassiniOval>();
  if (name == "molecular") return std::make_unique<Molecular>();
  fail(ErrorCode::InvalidArgument, "surface", "unknown surface '" + name + "'");
}

NearFrame closest_point(const ImplicitSurface& surface, const Vec3& y,
                        const ClosestPointOptions& opts) {
  const double diam = surface.diameter();
  const double tol_len = opts.tolerance * diam;
  const double phi_y = surface.phi(y);

  Vec3 x = y;
  int iter = 0;
  const int stage1_max = std::max(1, (3 * opts.max_iterations) / 5);

  // Stage 1: gradient projection onto the zero level set.
  for (; iter < stage1_max; ++iter) {
    const double p = surface.phi(x);
    const Vec3 g = surface.grad(x);
    const double g2 = norm2(g);
    if (!(g2 > 1e-300))
      fail(ErrorCode::NonConvergence, "closest-point", "vanishing gradient at projection point");
    if (std::abs(p) <= opts.tolerance * std::sqrt(g2) * diam) break;
    Vec3 step = g * (p / g2);
    const double sn = norm(step);
    if (sn > 0.25 * diam) step *= 0.25 * diam / sn;  // keep the walk local
    x -= step;
  }

  // Stage 2: Gauss-Newton on F(x, mu) = [x - y + mu grad(x); phi(x)] so the
  // offset y - x0 ends up parallel to the surface normal.
  const double fd = 1e-6 * diam;
  Vec3 g = surface.grad(x);
  double mu = dot(y - x, g) / norm2(g);
  bool converged = false;

  const auto residual = [&](const Vec3& xx, double mm, Vec3& f_top, double& f_phi) {
    f_top = xx - y + mm * surface.grad(xx);
    f_phi = surface.phi(xx);
  };

  for (; iter < opts.max_iterations; ++iter) {
    g = surface.grad(x);
    const double g2 = norm2(g);
    if (!(g2 > 1e-300))
      fail(ErrorCode::NonConvergence, "closest-point", "vanishing gradient at polish point");
    const double p = surface.phi(x);
    const Vec3 nhat = g / std::sqrt(g2);
    const Vec3 off = x - y;
    const Vec3 tang = off - dot(off, nhat) * nhat;
    if (std::abs(p) <= opts.tolerance * std::sqrt(g2) * diam && norm(tang) <= tol_len) {
      converged = true;
      break;
    }

    // Hessian of phi by central differences of the analytic gradient.
    double H[3][3];
    for (int j = 0; j < 3; ++j) {
      Vec3 xp = x, xm = x;
      xp[j] += fd;
      xm[j] -= fd;
      const Vec3 gp = surface.grad(xp), gm = surface.grad(xm);
      for (int i = 0; i < 3; ++i) H[i][j] = (gp[i] - gm[i]) / (2.0 * fd);
    }

    double A[4][4], rhs[4], dz[4];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) A[i][j] = mu * H[i][j] + (i == j ? 1.0 : 0.0);
      A[i][3] = g[i];
      A[3][i] = g[i];
    }
    A[3][3] = 0.0;
    Vec3 f_top;
    double f_phi;
    residual(x, mu, f_top, f_phi);
    rhs[0] = -f_top.x;
    rhs[1] = -f_top.y;
    rhs[2] = -f_top.z;
    rhs[3] = -f_phi;
    if (!solve_dense(4, A, rhs, dz))
      fail(ErrorCode::NonConvergence, "closest-point", "singular polish system");

    const double res0 = norm(f_top) + std::abs(f_phi);
    double scale = 1.0;
    for (int bt = 0; bt < 8; ++bt) {
      const Vec3 xn = x + Vec3{dz[0], dz[1], dz[2]} * scale;
      const double mn = mu + dz[3] * scale;
      Vec3 ft;
      double fp;
      residual(xn, mn, ft, fp);
      if (norm(ft) + std::abs(fp) < res0 || scale < 1e-3) {
        x = xn;
        mu = mn;
        break;
      }
      scale *= 0.5;
    }
  }

  if (!converged) {
    // Final acceptance check (the loop may exit at max_iterations converged).
    g = surface.grad(x);
    const Vec3 nhat = g / norm(g);
    const Vec3 off = x - y;
    const Vec3 tang = off - dot(off, nhat) * nhat;
    if (!(std::abs(surface.phi(x)) <= opts.tolerance * norm(g) * diam && norm(tang) <= tol_len))
      fail(ErrorCode::NonConvergence, "closest-point",
           "no convergence after " + std::to_string(opts.max_iterations) + " iterations");
  }

  NearFrame frame;
  frame.x0 = x;
  frame.n0 = normalized(surface.grad(x));
  const double dist = norm(y - x);
  frame.b = phi_y < 0.0 ? -dist : (phi_y > 0.0 ? dist : 0.0);
  const double tol_chi = opts.tolerance * diam;
  frame.chi = frame.b < -tol_chi ? 1.0 : (frame.b > tol_chi ? 0.0 : 0.5);
  return frame;
}

Vec3 outward_normal(const ImplicitSurface& surface, const Vec3& x) {
  const Vec3 g = surface.grad(x);
  const double gn = norm(g);
  if (!(gn > 1e-300))
    fail(ErrorCode::InvalidArgument, "surface", "vanishing gradient; not a regular surface point");
  if (std::abs(surface.phi(x)) > 1e-6 * gn * surface.diameter())
    fail(ErrorCode::InvalidArgument, "surface", "point is not on the surface");
  return g / gn;
}

}  // namespace nearsing
