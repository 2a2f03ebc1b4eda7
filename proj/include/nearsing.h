/* nearsing: evaluation of nearly singular Laplace / Stokes layer potentials
 * on implicitly defined closed surfaces, by regularized kernels with
 * extrapolation across regularization widths.
 *
 * All functions are thread-safe.  Functions returning nearsing_status leave a
 * thread-local message retrievable via nearsing_last_error() on failure.
 */
#ifndef NEARSING_H
#define NEARSING_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef NEARSING_API
#define NEARSING_API __attribute__((visibility("default")))
#endif

typedef enum nearsing_status {
  NEARSING_OK = 0,
  NEARSING_ERR_INVALID_ARGUMENT = 1,
  NEARSING_ERR_NON_CONVERGENCE = 2,
  NEARSING_ERR_SINGULAR_SYSTEM = 3,
  NEARSING_ERR_EMPTY_SELECTION = 4,
  NEARSING_ERR_ROOT_REFINEMENT = 5,
  NEARSING_ERR_OUT_OF_REGION = 6,
  NEARSING_ERR_RELATION_VIOLATED = 7,
  NEARSING_ERR_POSITIVITY_VIOLATED = 8,
  NEARSING_ERR_IO = 9,
  NEARSING_ERR_CONFIG = 10,
  NEARSING_ERR_UNKNOWN = 99
} nearsing_status;

/* Opaque handles. */
typedef struct nearsing_surface nearsing_surface;
typedef struct nearsing_rule nearsing_rule;

NEARSING_API const char* nearsing_version(void);

/* Message for the most recent failed call on this thread ("" if none). */
NEARSING_API const char* nearsing_last_error(void);

/* ---- Surfaces ----------------------------------------------------------- */

/* Built-in names: "sphere", "rotated-ellipsoid", "prolate-spheroid",
 * "cassini", "molecular". */
NEARSING_API nearsing_status nearsing_surface_create(const char* name, nearsing_surface** out);
NEARSING_API void nearsing_surface_destroy(nearsing_surface* s);

NEARSING_API nearsing_status nearsing_surface_phi(const nearsing_surface* s, const double y[3],
                                                  double* out);
NEARSING_API nearsing_status nearsing_surface_grad(const nearsing_surface* s, const double y[3],
                                                   double out[3]);

/* Closest surface point x0, signed distance b (negative inside), outward
 * normal n0 at x0, and chi (1 inside, 0.5 on the surface, 0 outside).  Output
 * pointers may be NULL to skip. */
NEARSING_API nearsing_status nearsing_surface_closest_point(const nearsing_surface* s,
                                                            const double y[3], double out_x0[3],
                                                            double* out_b, double out_n0[3],
                                                            double* out_chi);

/* ---- Surface quadrature ------------------------------------------------- */

NEARSING_API nearsing_status nearsing_rule_build(const nearsing_surface* s, double h,
                                                 nearsing_rule** out);
NEARSING_API void nearsing_rule_destroy(nearsing_rule* r);

NEARSING_API size_t nearsing_rule_node_count(const nearsing_rule* r);

/* Copies node data into caller arrays: x and n of length 3*count (xyz
 * triples), w of length count.  Any output pointer may be NULL to skip. */
NEARSING_API nearsing_status nearsing_rule_get_nodes(const nearsing_rule* r, double* x, double* n,
                                                     double* w);

NEARSING_API nearsing_status nearsing_rule_area(const nearsing_rule* r, double* out);

/* CSV columns: axis,i,j,x1,x2,x3,n1,n2,n3,w */
NEARSING_API nearsing_status nearsing_rule_dump_csv(const nearsing_rule* r, const char* path);

/* ---- Width extrapolation ------------------------------------------------ */

/* Moment integrals I_n(lambda) of the regularization error expansion. */
NEARSING_API double nearsing_i0(double lambda);
NEARSING_API double nearsing_i2(double lambda);
NEARSING_API double nearsing_i4(double lambda);

/* Extrapolation weights for a target at signed distance b and spacing h.
 * rhos: n distinct positive width multipliers; n must be 3 (order 5) or
 * 4 (order 7).  fractional != 0 selects delta_i = rho_i h^q anchor_h^(1-q)
 * instead of rho_i h.  On return a[0..n-1] are the weights, lambdas[0..n-1]
 * the signed b/delta_i, and *degenerate is 1 when |b| lay beyond
 * far_cutoff * max(delta) so no extrapolation applies (a = 1,0,...).  Output
 * pointers may be NULL to skip. */
NEARSING_API nearsing_status nearsing_weights(const double* rhos, int n, int order, double b,
                                              double h, int fractional, double q, double anchor_h,
                                              double far_cutoff, double* a, double* lambdas,
                                              int* degenerate);

/* ---- Convergence harness ------------------------------------------------ */

/* Runs a full convergence study from a flat JSON config (same schema as the
 * CLI; see README).  On success and when report_json is non-NULL, it receives
 * a newly allocated JSON report; release it with nearsing_string_free. */
NEARSING_API nearsing_status nearsing_run_json(const char* config_json, char** report_json);

NEARSING_API void nearsing_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* NEARSING_H */
