#include "nearsing.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "errors.hpp"
#include "extrapolation.hpp"
#include "harness.hpp"
#include "quadrature.hpp"
#include "surface.hpp"

using nearsing::Error;
using nearsing::ErrorCode;

extern "C" {
struct nearsing_surface {
  std::unique_ptr<nearsing::ImplicitSurface> impl;
};
struct nearsing_rule {
  nearsing::QuadratureRule impl;
};
}

namespace {

thread_local std::string t_last_error;

nearsing_status map_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return NEARSING_ERR_INVALID_ARGUMENT;
    case ErrorCode::NonConvergence: return NEARSING_ERR_NON_CONVERGENCE;
    case ErrorCode::SingularSystem: return NEARSING_ERR_SINGULAR_SYSTEM;
    case ErrorCode::EmptySelection: return NEARSING_ERR_EMPTY_SELECTION;
    case ErrorCode::RootRefinementFailure: return NEARSING_ERR_ROOT_REFINEMENT;
    case ErrorCode::OutOfRegion: return NEARSING_ERR_OUT_OF_REGION;
    case ErrorCode::RelationViolated: return NEARSING_ERR_RELATION_VIOLATED;
    case ErrorCode::PositivityViolated: return NEARSING_ERR_POSITIVITY_VIOLATED;
    case ErrorCode::Io: return NEARSING_ERR_IO;
    case ErrorCode::Config: return NEARSING_ERR_CONFIG;
  }
  return NEARSING_ERR_UNKNOWN;
}

template <typename F>
nearsing_status guarded(F&& f) {
  t_last_error.clear();
  try {
    f();
    return NEARSING_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return NEARSING_ERR_UNKNOWN;
  } catch (...) {
    t_last_error = "unknown error";
    return NEARSING_ERR_UNKNOWN;
  }
}

void require(bool cond, const char* message) {
  if (!cond) nearsing::fail(ErrorCode::InvalidArgument, "api", message);
}

}  // namespace

extern "C" {

const char* nearsing_version(void) { return "0.1.0"; }

const char* nearsing_last_error(void) { return t_last_error.c_str(); }

nearsing_status nearsing_surface_create(const char* name, nearsing_surface** out) {
  return guarded([&] {
    require(name && out, "name and out must be non-null");
    auto impl = nearsing::make_surface(name);
    *out = new nearsing_surface{std::move(impl)};
  });
}

void nearsing_surface_destroy(nearsing_surface* s) { delete s; }

nearsing_status nearsing_surface_phi(const nearsing_surface* s, const double y[3], double* out) {
  return guarded([&] {
    require(s && y && out, "surface, y, and out must be non-null");
    *out = s->impl->phi({y[0], y[1], y[2]});
  });
}

nearsing_status nearsing_surface_grad(const nearsing_surface* s, const double y[3],
                                      double out[3]) {
  return guarded([&] {
    require(s && y && out, "surface, y, and out must be non-null");
    const nearsing::Vec3 g = s->impl->grad({y[0], y[1], y[2]});
    out[0] = g.x;
    out[1] = g.y;
    out[2] = g.z;
  });
}

nearsing_status nearsing_surface_closest_point(const nearsing_surface* s, const double y[3],
                                               double out_x0[3], double* out_b, double out_n0[3],
                                               double* out_chi) {
  return guarded([&] {
    require(s && y, "surface and y must be non-null");
    const nearsing::NearFrame frame = nearsing::closest_point(*s->impl, {y[0], y[1], y[2]});
    if (out_x0) {
      out_x0[0] = frame.x0.x;
      out_x0[1] = frame.x0.y;
      out_x0[2] = frame.x0.z;
    }
    if (out_b) *out_b = frame.b;
    if (out_n0) {
      out_n0[0] = frame.n0.x;
      out_n0[1] = frame.n0.y;
      out_n0[2] = frame.n0.z;
    }
    if (out_chi) *out_chi = frame.chi;
  });
}

nearsing_status nearsing_rule_build(const nearsing_surface* s, double h, nearsing_rule** out) {
  return guarded([&] {
    require(s && out, "surface and out must be non-null");
    auto rule = std::make_unique<nearsing_rule>();
    rule->impl = nearsing::generate_rule(*s->impl, h);
    *out = rule.release();
  });
}

void nearsing_rule_destroy(nearsing_rule* r) { delete r; }

size_t nearsing_rule_node_count(const nearsing_rule* r) { return r ? r->impl.nodes.size() : 0; }

nearsing_status nearsing_rule_get_nodes(const nearsing_rule* r, double* x, double* n, double* w) {
  return guarded([&] {
    require(r, "rule must be non-null");
    const auto& nodes = r->impl.nodes;
    for (size_t k = 0; k < nodes.size(); ++k) {
      if (x) {
        x[3 * k + 0] = nodes[k].x.x;
        x[3 * k + 1] = nodes[k].x.y;
        x[3 * k + 2] = nodes[k].x.z;
      }
      if (n) {
        n[3 * k + 0] = nodes[k].n.x;
        n[3 * k + 1] = nodes[k].n.y;
        n[3 * k + 2] = nodes[k].n.z;
      }
      if (w) w[k] = nodes[k].w;
    }
  });
}

nearsing_status nearsing_rule_area(const nearsing_rule* r, double* out) {
  return guarded([&] {
    require(r && out, "rule and out must be non-null");
    *out = nearsing::surface_area(r->impl);
  });
}

nearsing_status nearsing_rule_dump_csv(const nearsing_rule* r, const char* path) {
  return guarded([&] {
    require(r && path, "rule and path must be non-null");
    nearsing::dump_nodes_csv(r->impl, path);
  });
}

double nearsing_i0(double lambda) { return nearsing::moment_i0(lambda); }
double nearsing_i2(double lambda) { return nearsing::moment_i2(lambda); }
double nearsing_i4(double lambda) { return nearsing::moment_i4(lambda); }

nearsing_status nearsing_weights(const double* rhos, int n, int order, double b, double h,
                                 int fractional, double q, double anchor_h, double far_cutoff,
                                 double* a, double* lambdas, int* degenerate) {
  return guarded([&] {
    require(rhos, "rhos must be non-null");
    require(n >= 1 && n <= 4, "n must be between 1 and 4");
    nearsing::ExtrapolationPlan plan;
    plan.rhos.assign(rhos, rhos + n);
    plan.order = order;
    plan.rule = fractional ? nearsing::DeltaRule::Fractional : nearsing::DeltaRule::Proportional;
    plan.fractional_q = q;
    plan.anchor_h = anchor_h;
    plan.far_cutoff = far_cutoff;
    const nearsing::WeightSolution ws = nearsing::solve_weights(plan, b, h);
    for (int i = 0; i < ws.count; ++i) {
      if (a) a[i] = ws.weights[i];
      if (lambdas) lambdas[i] = ws.lambdas[i];
    }
    if (degenerate) *degenerate = ws.degenerate_far ? 1 : 0;
  });
}

nearsing_status nearsing_run_json(const char* config_json, char** report_json) {
  return guarded([&] {
    require(config_json, "config_json must be non-null");
    const nearsing::RunConfig cfg = nearsing::parse_config_json(config_json);
    const nearsing::ErrorReport report = nearsing::run(cfg);
    if (report_json) {
      const std::string text = report.to_json();
      char* buf = static_cast<char*>(std::malloc(text.size() + 1));
      require(buf != nullptr, "out of memory");
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *report_json = buf;
    }
  });
}

void nearsing_string_free(char* s) { std::free(s); }

}  // extern "C"
