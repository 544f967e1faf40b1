#ifndef HOPF_BERGER_H
#define HOPF_BERGER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HbStatus {
  HB_STATUS_OK = 0,
  HB_STATUS_NULL_POINTER = 1,
  HB_STATUS_INVALID_ARGUMENT = 2,
  HB_STATUS_DIMENSION_MISMATCH = 3,
  HB_STATUS_GEOMETRY_ERROR = 4,
  HB_STATUS_PANIC = 5,
} HbStatus;

typedef enum HbFamily {
  HB_FAMILY_COMPLEX = 0,
  HB_FAMILY_QUATERNIONIC = 1,
  HB_FAMILY_OCTONIONIC = 2,
} HbFamily;

// Outcome of a totally geodesic certificate.
typedef enum HbVerdict {
  HB_VERDICT_WELL_POSITIONED = 0,
  HB_VERDICT_NOT_WELL_POSITIONED = 1,
  HB_VERDICT_NOT_TOTALLY_GEODESIC = 2,
} HbVerdict;

// A presentation together with its curvature tensors.
typedef struct HbModel HbModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string. Do not free.
const char *hb_version(void);

// Copy of the message for the last failure on this thread, or NULL.
// Release with [`hb_string_free`].
char *hb_last_error_message(void);

// Release a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer returned by a function of this library
// that is documented as caller-owned, and must not be used afterwards.
void hb_string_free(char *s);

// Build the sphere `S_{F,tau}` and its curvature tensors.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle. On
// success the handle must be released with [`hb_model_free`].
enum HbStatus hb_model_new(enum HbFamily family, size_t n, double tau, struct HbModel **out);

// # Safety
// `m` must be NULL or a handle from [`hb_model_new`] not yet freed.
void hb_model_free(struct HbModel *m);

// Dimension of p and of its vertical part.
//
// # Safety
// `m` must be a live handle; `dim` and `dim_p1` must be writable or NULL.
enum HbStatus hb_model_dims(const struct HbModel *m, size_t *dim, size_t *dim_p1);

// `out = R(x, y) z`; all buffers have length `len`, which must equal the
// dimension of p.
//
// # Safety
// `m` must be a live handle; `x`, `y`, `z` must point to `len` readable
// doubles and `out` to `len` writable doubles.
enum HbStatus hb_curvature(const struct HbModel *m,
                           const double *x,
                           const double *y,
                           const double *z,
                           size_t len,
                           double *out);

// Sectional curvature of the plane spanned by `x` and `y`.
//
// # Safety
// `m` must be a live handle; `x`, `y` must point to `len` readable doubles
// and `out` to one writable double.
enum HbStatus hb_sectional(const struct HbModel *m,
                           const double *x,
                           const double *y,
                           size_t len,
                           double *out);

// Eigenvalues of the Jacobi operator `y -> R(y,x)x`, ascending, written to
// `out` (length `len`).
//
// # Safety
// `m` must be a live handle; `x` must point to `len` readable doubles and
// `out` to `len` writable doubles.
enum HbStatus hb_jacobi_eigenvalues(const struct HbModel *m,
                                    const double *x,
                                    size_t len,
                                    double *out);

// Certify the span of `k` vectors stored consecutively in `frame`
// (`k * len` doubles).
//
// # Safety
// `m` must be a live handle; `frame` must point to `k * len` readable
// doubles and `verdict` to writable storage.
enum HbStatus hb_tg_certificate(const struct HbModel *m,
                                const double *frame,
                                size_t len,
                                size_t k,
                                enum HbVerdict *verdict);

// JSON array of the catalog subspaces of the model, with frames.
// Release with [`hb_string_free`]; NULL on failure.
//
// # Safety
// `m` must be a live handle.
char *hb_catalog_json(const struct HbModel *m);

// Point of the Berger 3-sphere geodesic with unit coefficients
// `(a1, a2, a3)` at time `s`, as `(re z1, im z1, re z2, im z2)`.
//
// # Safety
// `out` must point to 4 writable doubles.
enum HbStatus hb_geodesic_point(double a1, double a2, double a3, double tau, double s, double *out);

// Run a command line of the `hopf-berger` tool (without the program name,
// arguments separated by single spaces) and return its JSON report.
// `exit_code` receives the tool's exit status. Release the result with
// [`hb_string_free`].
//
// # Safety
// `args` must be a valid NUL-terminated string; `exit_code` must be
// writable or NULL.
char *hb_run_json(const char *args, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOPF_BERGER_H */
