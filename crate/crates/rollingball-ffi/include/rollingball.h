#ifndef ROLLINGBALL_H
#define ROLLINGBALL_H

/* Generated by cbindgen from rollingball-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  RB_STATUS_UTF8_ERROR = 2,
  RB_STATUS_PARSE_ERROR = 3,
  RB_STATUS_INVALID_ARGUMENT = 4,
  RB_STATUS_INFEASIBLE_BODY = 5,
  RB_STATUS_UNBOUNDED_BODY = 6,
  RB_STATUS_DEGENERATE_BODY = 7,
  RB_STATUS_CONVERGENCE_FAILURE = 8,
  RB_STATUS_DOMAIN_EXCEEDED = 9,
  RB_STATUS_NOT_TOUCH_POINT = 10,
  RB_STATUS_KINK_AT_CENTER = 11,
  RB_STATUS_RUNTIME_ERROR = 12,
} RbStatus;

// Opaque convex body (halfspace intersection or polygon).
typedef struct RbBody RbBody;

// Opaque piecewise-quadratic convex function.
typedef struct RbFunction RbFunction;

// Opaque epigraph-opening regularization of a function.
typedef struct RbRegularized RbRegularized;

// Exact 2D opening measures plus the dilation factor.
typedef struct RbOpeningMeasures {
  double boundary_len;
  double contact_len;
  double lost_len;
  double gained_len;
  double sym_diff_len;
  double lambda;
} RbOpeningMeasures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rb_version(void);

// Thread-local message describing the most recent failure.
const char *rb_last_error_message(void);

// Parse a body JSON document into a handle.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum RbStatus rb_body_parse_json(const char *json, struct RbBody **out);

// Release a body handle.
//
// # Safety
// `body` must come from `rb_body_parse_json` and not be freed twice.
void rb_body_free(struct RbBody *body);

// Ambient dimension of the body.
//
// # Safety
// Valid `body` handle and non-null `out`.
enum RbStatus rb_body_dim(const struct RbBody *body, uintptr_t *out);

// Chebyshev center and radius; `out_center` must hold `dim` doubles.
//
// # Safety
// Valid handle and output buffers of sufficient length.
enum RbStatus rb_body_chebyshev(const struct RbBody *body, double *out_center, double *out_radius);

// Nearest-point projection; `x` and `out` hold `len = dim` doubles.
//
// # Safety
// Valid handle and buffers of length `len`.
enum RbStatus rb_body_project(const struct RbBody *body,
                              const double *x,
                              uintptr_t len,
                              double *out);

// Support value in a unit direction.
//
// # Safety
// Valid handle, `dir` of length `len`, non-null `out_value`.
enum RbStatus rb_body_support(const struct RbBody *body,
                              const double *dir,
                              uintptr_t len,
                              double *out_value);

// Exact 2D opening measures and the dilation factor for radius `r`.
//
// # Safety
// Valid handle and non-null `out`.
enum RbStatus rb_body_opening_measures(const struct RbBody *body,
                                       double radius,
                                       struct RbOpeningMeasures *out);

// Monte Carlo estimate of the lost boundary measure.
//
// # Safety
// Valid handle and non-null outputs.
enum RbStatus rb_body_boundary_mc(const struct RbBody *body,
                                  double radius,
                                  uint64_t samples,
                                  uint64_t seed,
                                  double *out_estimate,
                                  double *out_std_error);

// Parse a function JSON document into a handle.
//
// # Safety
// `json` must be NUL-terminated; `out` non-null.
enum RbStatus rb_function_parse_json(const char *json, struct RbFunction **out);

// Release a function handle.
//
// # Safety
// `f` must come from `rb_function_parse_json` and not be freed twice.
void rb_function_free(struct RbFunction *f);

// Evaluate the function at `x` (length `len`).
//
// # Safety
// Valid handle and buffers.
enum RbStatus rb_function_eval(const struct RbFunction *f,
                               const double *x,
                               uintptr_t len,
                               double *out);

// Build the epigraph-opening regularizer `g` of `f` for radius `delta`,
// evaluable on `|x| <= domain_radius`.
//
// # Safety
// Valid function handle, non-null `out`.
enum RbStatus rb_regularize(const struct RbFunction *f,
                            double delta,
                            double domain_radius,
                            struct RbRegularized **out);

// Release a regularizer handle.
//
// # Safety
// `g` must come from `rb_regularize` and not be freed twice.
void rb_regularized_free(struct RbRegularized *g);

// Evaluate `g(x)`.
//
// # Safety
// Valid handle and buffers.
enum RbStatus rb_regularized_value(const struct RbRegularized *g,
                                   const double *x,
                                   uintptr_t len,
                                   double *out);

// Evaluate `grad g(x)` into `out` (length `len`).
//
// # Safety
// Valid handle and buffers of length `len`.
enum RbStatus rb_regularized_gradient(const struct RbRegularized *g,
                                      const double *x,
                                      uintptr_t len,
                                      double *out);

// Whether `g(x) = f(x)` within `tol`; writes 1 or 0 into `out`.
//
// # Safety
// Valid handle and buffers.
enum RbStatus rb_regularized_is_touch(const struct RbRegularized *g,
                                      const double *x,
                                      uintptr_t len,
                                      double tol,
                                      int32_t *out);

// Grid measure of `{ g > f }` over the box `[lo, hi]^len` given
// coordinatewise bounds.
//
// # Safety
// `lo`, `hi` of length `len`; non-null outputs.
enum RbStatus rb_disagreement_measure_grid(const struct RbRegularized *g,
                                           const double *lo,
                                           const double *hi,
                                           uintptr_t len,
                                           uintptr_t per_axis,
                                           double *out_measure,
                                           double *out_error);

// Candidate Hessian of `f` at a touch point; writes `len * len` doubles
// row-major.
//
// # Safety
// Valid handle and output buffer of length `len * len`.
enum RbStatus rb_hessian_at_touch(const struct RbRegularized *g,
                                  const double *x,
                                  uintptr_t len,
                                  double *out);

// Smooth maximum with the C^{1,1} cap; equals `fmax(x, y)` exactly when
// `|x - y| >= 1`.
double rb_smooth_max(double x, double y);

// Lower convex hull of 1D samples: writes the envelope values at the
// input nodes into `out` (length `len`).
//
// # Safety
// `xs`, `phi`, `out` of length `len`.
enum RbStatus rb_envelope_1d(const double *xs, const double *phi, uintptr_t len, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ROLLINGBALL_H */
