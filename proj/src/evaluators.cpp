#include "evaluators.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "errors.hpp"
#include "kernels.hpp"

namespace nearsing {

namespace {

// Nodes farther than this many widths from the target keep the singular
// kernel: the dropped shape-function tails are ~erfc(6) ~ 2e-17 of the local
// kernel scale, far below the regularization errors being extrapolated away.
constexpr double kCorrectionRadiusWidths = 6.0;

struct BatchData {
  size_t n = 0;
  std::vector<double> x1, x2, x3;     // node positions
  std::vector<double> nx, ny, nz;     // node normals
  std::vector<double> w;              // weights
  std::vector<double> cf, cg;         // w*f, w*g (Laplace)
  std::vector<double> wf1, wf2, wf3;  // w*f (Stokes single)
  std::vector<double> wn1, wn2, wn3;  // w*n
  std::vector<double> q1, q2, q3;     // q (Stokes double, unweighted)
};

struct Scratch {
  std::vector<int> near;
};

bool needs_f_scalar(KernelFamily f) {
  return f == KernelFamily::LaplaceSingle || f == KernelFamily::LaplaceCombined;
}
bool needs_g_scalar(KernelFamily f) {
  return f == KernelFamily::LaplaceDouble || f == KernelFamily::LaplaceCombined;
}
bool needs_f_vector(KernelFamily f) {
  return f == KernelFamily::StokesSingle || f == KernelFamily::StokesCombined;
}
bool needs_q_vector(KernelFamily f) {
  return f == KernelFamily::StokesDouble || f == KernelFamily::StokesCombined;
}
bool is_stokes(KernelFamily f) {
  return f == KernelFamily::StokesSingle || f == KernelFamily::StokesDouble ||
         f == KernelFamily::StokesCombined;
}

void build_batch_data(const BatchProblem& p, BatchData& d) {
  const auto& nodes = p.rule->nodes;
  d.n = nodes.size();
  d.x1.resize(d.n);
  d.x2.resize(d.n);
  d.x3.resize(d.n);
  d.nx.resize(d.n);
  d.ny.resize(d.n);
  d.nz.resize(d.n);
  d.w.resize(d.n);
  for (size_t k = 0; k < d.n; ++k) {
    const QuadratureNode& q = nodes[k];
    d.x1[k] = q.x.x;
    d.x2[k] = q.x.y;
    d.x3[k] = q.x.z;
    d.nx[k] = q.n.x;
    d.ny[k] = q.n.y;
    d.nz[k] = q.n.z;
    d.w[k] = q.w;
  }

  if (needs_f_scalar(p.family)) {
    if (!p.f_scalar)
      fail(ErrorCode::InvalidArgument, "evaluator", "scalar density f is required but missing");
    d.cf.resize(d.n);
    for (size_t k = 0; k < d.n; ++k) d.cf[k] = d.w[k] * p.f_scalar(nodes[k].x);
  }
  if (needs_g_scalar(p.family)) {
    if (!p.g_scalar)
      fail(ErrorCode::InvalidArgument, "evaluator", "scalar density g is required but missing");
    d.cg.resize(d.n);
    for (size_t k = 0; k < d.n; ++k) d.cg[k] = d.w[k] * p.g_scalar(nodes[k].x);
  }
  if (needs_f_vector(p.family)) {
    if (!p.f_vector)
      fail(ErrorCode::InvalidArgument, "evaluator", "vector density f is required but missing");
    d.wf1.resize(d.n);
    d.wf2.resize(d.n);
    d.wf3.resize(d.n);
    for (size_t k = 0; k < d.n; ++k) {
      const Vec3 f = p.f_vector(nodes[k].x);
      d.wf1[k] = d.w[k] * f.x;
      d.wf2[k] = d.w[k] * f.y;
      d.wf3[k] = d.w[k] * f.z;
    }
  }
  if (needs_q_vector(p.family)) {
    if (!p.q_vector)
      fail(ErrorCode::InvalidArgument, "evaluator", "vector density q is required but missing");
    d.q1.resize(d.n);
    d.q2.resize(d.n);
    d.q3.resize(d.n);
    for (size_t k = 0; k < d.n; ++k) {
      const Vec3 q = p.q_vector(nodes[k].x);
      d.q1[k] = q.x;
      d.q2[k] = q.y;
      d.q3[k] = q.z;
    }
  }
  if (is_stokes(p.family)) {
    d.wn1.resize(d.n);
    d.wn2.resize(d.n);
    d.wn3.resize(d.n);
    for (size_t k = 0; k < d.n; ++k) {
      d.wn1[k] = d.w[k] * d.nx[k];
      d.wn2[k] = d.w[k] * d.ny[k];
      d.wn3[k] = d.w[k] * d.nz[k];
    }
  }
}

// Splits the node set for one target into far nodes (singular-kernel partial
// sums handled by the callers below) and the near set, collected in order.
double max_width(const WeightSolution& ws, bool far) {
  if (far) return 0.0;
  double m = 0.0;
  for (int i = 0; i < ws.count; ++i) m = std::max(m, ws.deltas[i]);
  return m;
}

// ---- Laplace single ----

void eval_laplace_single(const BatchData& d, const Vec3& y, const WeightSolution& ws, bool far,
                         Scratch& sc, std::array<Vec3, 4>& raw) {
  const double* X1 = d.x1.data();
  const double* X2 = d.x2.data();
  const double* X3 = d.x3.data();
  const double* CF = d.cf.data();
  const size_t n = d.n;

  if (far) {
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) {
      const double dx = y.x - X1[k], dy = y.y - X2[k], dz = y.z - X3[k];
      acc += CF[k] / std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    raw[0].x = -kInvFourPi * acc;
    return;
  }

  const double R = kCorrectionRadiusWidths * max_width(ws, false);
  const double R2 = R * R;
  sc.near.clear();
  double plain = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double dx = y.x - X1[k], dy = y.y - X2[k], dz = y.z - X3[k];
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 >= R2)
      plain += CF[k] / std::sqrt(r2);
    else
      sc.near.push_back(static_cast<int>(k));
  }
  for (int i = 0; i < ws.count; ++i) {
    const double delta = ws.deltas[i];
    double acc = plain;
    for (int k : sc.near) {
      const double dx = y.x - X1[k], dy = y.y - X2[k], dz = y.z - X3[k];
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      acc += CF[k] * s1_over_r(r, delta);
    }
    raw[i].x = -kInvFourPi * acc;
  }
}

// ---- Laplace double (and combined: optional single-layer accumulator) ----

void eval_laplace_double_or_combined(const BatchData& d, const Vec3& y, const NearFrame& frame,
                                     const WeightSolution& ws, bool far, bool with_single,
                                     double g0, Scratch& sc, std::array<Vec3, 4>& raw) {
  const double* X1 = d.x1.data();
  const double* X2 = d.x2.data();
  const double* X3 = d.x3.data();
  const double* NX = d.nx.data();
  const double* NY = d.ny.data();
  const double* NZ = d.nz.data();
  const double* W = d.w.data();
  const double* CG = d.cg.data();
  const double* CF = with_single ? d.cf.data() : nullptr;
  const size_t n = d.n;
  const double chi_g0 = frame.chi * g0;

  if (far) {
    double A = 0.0, B = 0.0, S = 0.0;
    for (size_t k = 0; k < n; ++k) {
      const double dx = X1[k] - y.x, dy = X2[k] - y.y, dz = X3[k] - y.z;
      const double r2 = dx * dx + dy * dy + dz * dz;
      const double inv_r = 1.0 / std::sqrt(r2);
      const double dn = dx * NX[k] + dy * NY[k] + dz * NZ[k];
      const double t = dn * inv_r / r2;
      A += CG[k] * t;
      B += W[k] * t;
      if (with_single) S += CF[k] * inv_r;
    }
    raw[0].x = kInvFourPi * (A - g0 * B) + chi_g0;
    if (with_single) raw[0].x -= kInvFourPi * S;
    return;
  }

  const double R = kCorrectionRadiusWidths * max_width(ws, false);
  const double R2 = R * R;
  sc.near.clear();
  double A = 0.0, B = 0.0, S = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double dx = X1[k] - y.x, dy = X2[k] - y.y, dz = X3[k] - y.z;
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 >= R2) {
      const double inv_r = 1.0 / std::sqrt(r2);
      const double dn = dx * NX[k] + dy * NY[k] + dz * NZ[k];
      const double t = dn * inv_r / r2;
      A += CG[k] * t;
      B += W[k] * t;
      if (with_single) S += CF[k] * inv_r;
    } else {
      sc.near.push_back(static_cast<int>(k));
    }
  }
  for (int i = 0; i < ws.count; ++i) {
    const double delta = ws.deltas[i];
    double Ai = A, Bi = B, Si = S;
    for (int k : sc.near) {
      const double dx = X1[k] - y.x, dy = X2[k] - y.y, dz = X3[k] - y.z;
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      const double dn = dx * NX[k] + dy * NY[k] + dz * NZ[k];
      const double t = dn * s2_over_r3(r, delta);
      Ai += CG[k] * t;
      Bi += W[k] * t;
      if (with_single) Si += CF[k] * s1_over_r(r, delta);
    }
    raw[i].x = kInvFourPi * (Ai - g0 * Bi) + chi_g0;
    if (with_single) raw[i].x -= kInvFourPi * Si;
  }
}

// ---- Stokes kernels ----

// Contraction of the split regularized stresslet with (q - q0) and the node
// normal, times the node weight, accumulated into acc.
inline void stresslet_split_accum(double r, const Vec3& xh, const Vec3& node_n, const Vec3& dq,
                                  double w, double b, const Vec3& n0, double r2mb2, double delta,
                                  Vec3& acc) {
  const double n0n = dot(n0, node_n);
  const double n0dq = dot(n0, dq);
  const double xhn = dot(xh, node_n);
  const double xhdq = dot(xh, dq);
  const double f2 = s2_over_r3(r, delta);
  const double f3 = s3_over_r5(r, delta);
  const double A = n0dq * n0n, B = xhdq * n0n, C = n0dq * xhn, D = xhdq * xhn;
  for (int i = 0; i < 3; ++i) {
    const double t1 = -xh[i] * A + n0[i] * (b * A - B - C);
    const double t2 = xh[i] * (b * (B + C) - D) + n0[i] * b * D;
    acc[i] += w * -6.0 * (t1 * f2 + (t2 - r2mb2 * t1) * f3);
  }
}

void eval_stokes(const BatchData& d, const Vec3& y, const NearFrame& frame,
                 const WeightSolution& ws, bool far, bool with_single, bool with_double,
                 double c0, const Vec3& q0, Scratch& sc, std::array<Vec3, 4>& raw) {
  const double* X1 = d.x1.data();
  const double* X2 = d.x2.data();
  const double* X3 = d.x3.data();
  const double* WN1 = d.wn1.data();
  const double* WN2 = d.wn2.data();
  const double* WN3 = d.wn3.data();
  const double* WF1 = with_single ? d.wf1.data() : nullptr;
  const double* WF2 = with_single ? d.wf2.data() : nullptr;
  const double* WF3 = with_single ? d.wf3.data() : nullptr;
  const double* Q1 = with_double ? d.q1.data() : nullptr;
  const double* Q2 = with_double ? d.q2.data() : nullptr;
  const double* Q3 = with_double ? d.q3.data() : nullptr;
  const size_t n = d.n;

  const double R = far ? 0.0 : kCorrectionRadiusWidths * max_width(ws, false);
  const double R2 = R * R;
  if (!far) sc.near.clear();

  // Plain singular sums over the far set (everything, when far).
  Vec3 P1{}, P2{};                        // single layer: S f, S n
  Vec3 V{};                               // double layer: T (.,q,n)
  double m11 = 0, m22 = 0, m33 = 0, m12 = 0, m13 = 0, m23 = 0;  // T (.,.,n)
  for (size_t k = 0; k < n; ++k) {
    const double dx = y.x - X1[k], dy = y.y - X2[k], dz = y.z - X3[k];
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (!far && r2 < R2) {
      sc.near.push_back(static_cast<int>(k));
      continue;
    }
    const double inv_r = 1.0 / std::sqrt(r2);
    const double inv_r3 = inv_r / r2;
    const double dwn = dx * WN1[k] + dy * WN2[k] + dz * WN3[k];
    if (with_single) {
      const double dwf = dx * WF1[k] + dy * WF2[k] + dz * WF3[k];
      const double cf3 = dwf * inv_r3;
      P1.x += WF1[k] * inv_r + dx * cf3;
      P1.y += WF2[k] * inv_r + dy * cf3;
      P1.z += WF3[k] * inv_r + dz * cf3;
      const double cn3 = dwn * inv_r3;
      P2.x += WN1[k] * inv_r + dx * cn3;
      P2.y += WN2[k] * inv_r + dy * cn3;
      P2.z += WN3[k] * inv_r + dz * cn3;
    }
    if (with_double) {
      const double s = -6.0 * dwn * inv_r3 / r2;  // -6 (d.wn) / r^5
      const double dq = dx * Q1[k] + dy * Q2[k] + dz * Q3[k];
      const double sq = s * dq;
      V.x += sq * dx;
      V.y += sq * dy;
      V.z += sq * dz;
      m11 += s * dx * dx;
      m22 += s * dy * dy;
      m33 += s * dz * dz;
      m12 += s * dx * dy;
      m13 += s * dx * dz;
      m23 += s * dy * dz;
    }
  }
  const Vec3 Mq0{m11 * q0.x + m12 * q0.y + m13 * q0.z, m12 * q0.x + m22 * q0.y + m23 * q0.z,
                 m13 * q0.x + m23 * q0.y + m33 * q0.z};
  const Vec3 chi_q0 = frame.chi * q0;

  if (far) {
    Vec3 val{};
    if (with_single) val += kInvEightPi * (P1 - c0 * P2);
    if (with_double) val += kInvEightPi * (V - Mq0) + chi_q0;
    raw[0] = val;
    return;
  }

  for (int i = 0; i < ws.count; ++i) {
    const double delta = ws.deltas[i];
    Vec3 P1i = P1, P2i = P2, Di = V - Mq0;
    for (int k : sc.near) {
      const double dx = y.x - X1[k], dy = y.y - X2[k], dz = y.z - X3[k];
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (with_single) {
        const double a1 = s1_over_r(r, delta);
        const double a2 = s2_over_r3(r, delta);
        const double dwf = dx * WF1[k] + dy * WF2[k] + dz * WF3[k];
        const double cf3 = dwf * a2;
        P1i.x += WF1[k] * a1 + dx * cf3;
        P1i.y += WF2[k] * a1 + dy * cf3;
        P1i.z += WF3[k] * a1 + dz * cf3;
        const double dwn = dx * WN1[k] + dy * WN2[k] + dz * WN3[k];
        const double cn3 = dwn * a2;
        P2i.x += WN1[k] * a1 + dx * cn3;
        P2i.y += WN2[k] * a1 + dy * cn3;
        P2i.z += WN3[k] * a1 + dz * cn3;
      }
      if (with_double) {
        const Vec3 x{X1[k], X2[k], X3[k]};
        const Vec3 nxv{d.nx[k], d.ny[k], d.nz[k]};
        const Vec3 xh = x - frame.x0;
        const Vec3 dq{Q1[k] - q0.x, Q2[k] - q0.y, Q3[k] - q0.z};
        const double r2mb2 = norm2(xh) - 2.0 * frame.b * dot(xh, frame.n0);
        stresslet_split_accum(r, xh, nxv, dq, d.w[k], frame.b, frame.n0, r2mb2, delta, Di);
      }
    }
    Vec3 val{};
    if (with_single) val += kInvEightPi * (P1i - c0 * P2i);
    if (with_double) val += kInvEightPi * Di + chi_q0;
    raw[i] = val;
  }
}

TargetResult eval_one(const BatchProblem& pb, const BatchData& d, const Vec3& y, Scratch& sc) {
  TargetResult out;
  out.frame = closest_point(*pb.surface, y);
  out.weights = solve_weights(pb.plan, out.frame.b, pb.rule->h);
  const bool far = pb.baseline || out.weights.degenerate_far;
  if (far) {
    out.weights.weights = {1.0, 0.0, 0.0, 0.0};
    out.weights.degenerate_far = true;
    out.path = EvalPath::FarUnregularized;
  } else {
    out.path = EvalPath::NearExtrapolated;
  }

  switch (pb.family) {
    case KernelFamily::LaplaceSingle:
      eval_laplace_single(d, y, out.weights, far, sc, out.raw);
      break;
    case KernelFamily::LaplaceDouble:
    case KernelFamily::LaplaceCombined: {
      const double g0 = pb.g_scalar(out.frame.x0);
      eval_laplace_double_or_combined(d, y, out.frame, out.weights, far,
                                      pb.family == KernelFamily::LaplaceCombined, g0, sc, out.raw);
      break;
    }
    case KernelFamily::StokesSingle:
    case KernelFamily::StokesDouble:
    case KernelFamily::StokesCombined: {
      const bool ws_ = needs_f_vector(pb.family);
      const bool wd = needs_q_vector(pb.family);
      const double c0 = ws_ ? dot(pb.f_vector(out.frame.x0), out.frame.n0) : 0.0;
      const Vec3 q0 = wd ? pb.q_vector(out.frame.x0) : Vec3{};
      eval_stokes(d, y, out.frame, out.weights, far, ws_, wd, c0, q0, sc, out.raw);
      break;
    }
  }

  const int m = far ? 1 : out.weights.count;
  Vec3 val{};
  for (int i = 0; i < m; ++i) val += out.weights.weights[i] * out.raw[i];
  out.value = val;
  return out;
}

}  // namespace

std::vector<TargetResult> evaluate_batch(const BatchProblem& problem,
                                         std::span<const Vec3> targets) {
  if (!problem.surface || !problem.rule)
    fail(ErrorCode::InvalidArgument, "evaluator", "surface and rule are required");
  problem.plan.validate();

  BatchData data;
  build_batch_data(problem, data);

  std::vector<TargetResult> results(targets.size());
  const int threads = std::max(1, problem.threads);
  if (threads == 1 || targets.size() < 2) {
    Scratch sc;
    for (size_t t = 0; t < targets.size(); ++t) results[t] = eval_one(problem, data, targets[t], sc);
    return results;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const size_t chunk = (targets.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const size_t begin = t * chunk;
    if (begin >= targets.size()) break;
    const size_t end = std::min(targets.size(), begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        Scratch sc;
        for (size_t i = begin; i < end; ++i) results[i] = eval_one(problem, data, targets[i], sc);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

namespace {

TargetResult eval_single_target(KernelFamily family, const Vec3& y, const ImplicitSurface& surface,
                                const QuadratureRule& rule, ScalarField fs, ScalarField gs,
                                VectorField fv, VectorField qv, const ExtrapolationPlan& plan) {
  BatchProblem pb;
  pb.family = family;
  pb.surface = &surface;
  pb.rule = &rule;
  pb.plan = plan;
  pb.f_scalar = std::move(fs);
  pb.g_scalar = std::move(gs);
  pb.f_vector = std::move(fv);
  pb.q_vector = std::move(qv);
  const Vec3 ys[1] = {y};
  return evaluate_batch(pb, ys)[0];
}

}  // namespace

TargetResult laplace_single(const Vec3& y, const ImplicitSurface& surface,
                            const QuadratureRule& rule, const ScalarField& f,
                            const ExtrapolationPlan& plan) {
  return eval_single_target(KernelFamily::LaplaceSingle, y, surface, rule, f, {}, {}, {}, plan);
}

TargetResult laplace_double(const Vec3& y, const ImplicitSurface& surface,
                            const QuadratureRule& rule, const ScalarField& g,
                            const ExtrapolationPlan& plan) {
  return eval_single_target(KernelFamily::LaplaceDouble, y, surface, rule, {}, g, {}, {}, plan);
}

TargetResult stokes_single(const Vec3& y, const ImplicitSurface& surface,
                           const QuadratureRule& rule, const VectorField& f,
                           const ExtrapolationPlan& plan) {
  return eval_single_target(KernelFamily::StokesSingle, y, surface, rule, {}, {}, f, {}, plan);
}

TargetResult stokes_double(const Vec3& y, const ImplicitSurface& surface,
                           const QuadratureRule& rule, const VectorField& q,
                           const ExtrapolationPlan& plan) {
  return eval_single_target(KernelFamily::StokesDouble, y, surface, rule, {}, {}, {}, q, plan);
}

double laplace_single_on(const Vec3& x0, const ImplicitSurface& surface,
                         const QuadratureRule& rule, const ScalarField& f, double delta_factor) {
  if (!f) fail(ErrorCode::InvalidArgument, "evaluator", "scalar density f is required");
  (void)outward_normal(surface, x0);  // validates that x0 lies on the surface
  const double delta = delta_factor * rule.h;
  double acc = 0.0;
  for (const QuadratureNode& nd : rule.nodes) {
    const double r = norm(nd.x - x0);
    acc += nd.w * f(nd.x) * s1_sharp_over_q(r / delta);
  }
  return -kInvFourPi * acc / delta;
}

double laplace_double_on(const Vec3& x0, const ImplicitSurface& surface,
                         const QuadratureRule& rule, const ScalarField& g, double delta_factor) {
  if (!g) fail(ErrorCode::InvalidArgument, "evaluator", "scalar density g is required");
  (void)outward_normal(surface, x0);
  const double delta = delta_factor * rule.h;
  const double d3 = delta * delta * delta;
  const double g0 = g(x0);
  double acc = 0.0;
  for (const QuadratureNode& nd : rule.nodes) {
    const Vec3 d = nd.x - x0;
    const double r = norm(d);
    acc += nd.w * (g(nd.x) - g0) * dot(d, nd.n) * s2_sharp_over_q3(r / delta) / d3;
  }
  return kInvFourPi * acc + 0.5 * g0;
}

}  // namespace nearsing
