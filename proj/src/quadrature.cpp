#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "kernels.hpp"

namespace nearsing {

double partition_bump(double r, double sharpness) {
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  return std::exp(sharpness * r2 / (r2 - 1.0));
}

namespace {

struct LineContext {
  const ImplicitSurface* surface;
  Vec3 base;  // point on the line (varying coordinate set later)
  int axis;
};

double line_phi(const LineContext& lc, double t) {
  Vec3 p = lc.base;
  p[lc.axis] = t;
  return lc.surface->phi(p);
}

double line_dphi(const LineContext& lc, double t) {
  Vec3 p = lc.base;
  p[lc.axis] = t;
  return lc.surface->grad(p)[lc.axis];
}

// Refines a bracket [t0, t1] with phi(t0) phi(t1) < 0 to a root: bisection to
// shrink the bracket, then bracket-guarded Newton, then more bisection if the
// derivative is too shallow for Newton.  Returns the best point found.
void refine_root(const LineContext& lc, double t0, double t1, double f0, double f1, double& t_out,
                 double& phi_out) {
  const auto bisect = [&](int steps) {
    for (int k = 0; k < steps; ++k) {
      const double tm = 0.5 * (t0 + t1);
      const double fm = line_phi(lc, tm);
      if (fm == 0.0) {
        t0 = t1 = tm;
        f0 = f1 = 0.0;
        return;
      }
      if ((fm < 0.0) == (f0 < 0.0)) {
        t0 = tm;
        f0 = fm;
      } else {
        t1 = tm;
        f1 = fm;
      }
    }
  };

  bisect(10);
  double t = 0.5 * (t0 + t1);
  double ft = line_phi(lc, t);
  for (int k = 0; k < 15 && ft != 0.0; ++k) {
    const double dt = line_dphi(lc, t);
    if (dt == 0.0) break;
    const double tn = t - ft / dt;
    if (tn < t0 || tn > t1) break;
    const double fn = line_phi(lc, tn);
    if (std::abs(fn) >= std::abs(ft)) break;
    t = tn;
    ft = fn;
  }
  if (ft != 0.0) {
    bisect(30);
    const double tm = 0.5 * (t0 + t1);
    const double fm = line_phi(lc, tm);
    if (std::abs(fm) < std::abs(ft)) {
      t = tm;
      ft = fm;
    }
  }
  t_out = t;
  phi_out = ft;
}

}  // namespace

QuadratureRule generate_rule(const ImplicitSurface& surface, double h,
                             const QuadratureOptions& opts) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "quadrature", "spacing must be positive");
  if (opts.membership_angle_deg < opts.partition_angle_deg)
    fail(ErrorCode::InvalidArgument, "quadrature",
         "membership angle must not be narrower than the partition angle");

  const Box3 box = surface.bounding_box();
  const double diam = box.diameter();
  const double theta = opts.partition_angle_deg * kPi / 180.0;
  const double cos_membership = std::cos(opts.membership_angle_deg * kPi / 180.0);
  const double step = opts.sample_step * h;

  QuadratureRule rule;
  rule.h = h;

  for (int axis = 0; axis < 3; ++axis) {
    const int t1 = (axis + 1) % 3, t2 = (axis + 2) % 3;
    const int i_min = static_cast<int>(std::ceil(box.lo[t1] / h)) - 2;
    const int i_max = static_cast<int>(std::floor(box.hi[t1] / h)) + 2;
    const int j_min = static_cast<int>(std::ceil(box.lo[t2] / h)) - 2;
    const int j_max = static_cast<int>(std::floor(box.hi[t2] / h)) + 2;
    const double lo = box.lo[axis] - 2.0 * h;
    const double hi = box.hi[axis] + 2.0 * h;
    const int n_samples = static_cast<int>(std::ceil((hi - lo) / step)) + 1;

    LineContext lc{&surface, Vec3{}, axis};
    std::vector<double> roots;

    for (int i = i_min; i <= i_max; ++i) {
      for (int j = j_min; j <= j_max; ++j) {
        lc.base[t1] = i * h;
        lc.base[t2] = j * h;
        roots.clear();

        double t_prev = lo;
        double f_prev = line_phi(lc, t_prev);
        for (int k = 1; k <= n_samples; ++k) {
          const double t_cur = std::min(lo + k * step, hi);
          const double f_cur = line_phi(lc, t_cur);
          if (f_prev == 0.0) {
            roots.push_back(t_prev);
          } else if (f_prev * f_cur < 0.0) {
            double r, fr;
            refine_root(lc, t_prev, t_cur, f_prev, f_cur, r, fr);
            Vec3 p = lc.base;
            p[axis] = r;
            const Vec3 g = surface.grad(p);
            const double gn = norm(g);
            if (!(std::abs(fr) <= 1e-12 * std::max(gn * diam, 1e-30))) {
              // A crossing this oblique is rejected by membership anyway.
              if (gn > 0.0 && std::abs(g[axis]) / gn >= cos_membership)
                fail(ErrorCode::RootRefinementFailure, "quadrature",
                     "crossing did not refine to surface tolerance");
              f_prev = f_cur;
              t_prev = t_cur;
              continue;
            }
            roots.push_back(r);
          }
          if (k == n_samples && f_cur == 0.0) roots.push_back(t_cur);
          f_prev = f_cur;
          t_prev = t_cur;
        }

        std::sort(roots.begin(), roots.end());
        double last = -1e300;
        for (double r : roots) {
          if (r - last < 1e-8 * h) continue;  // merged duplicate crossing
          last = r;

          Vec3 p = lc.base;
          p[axis] = r;
          const Vec3 g = surface.grad(p);
          const double gn = norm(g);
          if (!(gn > 0.0)) continue;
          const Vec3 n = g / gn;
          const double nd = std::abs(n[axis]);
          if (nd < cos_membership) continue;

          double beta[3];
          double beta_sum = 0.0;
          for (int e = 0; e < 3; ++e) {
            const double ang = std::acos(std::min(1.0, std::abs(n[e])));
            beta[e] = partition_bump(ang / theta, opts.bump_sharpness);
            beta_sum += beta[e];
          }
          const double psi = beta[axis] / beta_sum;
          if (!(psi > 0.0)) continue;

          rule.nodes.push_back({axis, i, j, p, n, psi * h * h / nd});
        }
      }
    }
  }

  std::sort(rule.nodes.begin(), rule.nodes.end(),
            [](const QuadratureNode& a, const QuadratureNode& b) {
              if (a.axis != b.axis) return a.axis < b.axis;
              if (a.i != b.i) return a.i < b.i;
              if (a.j != b.j) return a.j < b.j;
              return a.x[a.axis] < b.x[b.axis];
            });
  return rule;
}

void dump_nodes_csv(const QuadratureRule& rule, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::Io, "quadrature", "cannot open '" + path + "' for writing");
  std::fprintf(f, "axis,i,j,x1,x2,x3,n1,n2,n3,w\n");
  for (const QuadratureNode& n : rule.nodes)
    std::fprintf(f, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", n.axis, n.i, n.j,
                 n.x.x, n.x.y, n.x.z, n.n.x, n.n.y, n.n.z, n.w);
  std::fclose(f);
}

}  // namespace nearsing
