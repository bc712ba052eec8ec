/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PEGO_LAB_H
#define PEGO_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PegoStatus {
  PegoStatus_Ok = 0,
  PegoStatus_NullPointer = 1,
  PegoStatus_InvalidUtf8 = 2,
  PegoStatus_NonFinite = 3,
  PegoStatus_NotPego = 4,
  PegoStatus_Grid = 5,
  PegoStatus_GridMismatch = 6,
  PegoStatus_Scale = 7,
  PegoStatus_Parameter = 8,
  PegoStatus_Invariant = 9,
  PegoStatus_Refused = 10,
  PegoStatus_Dsl = 11,
  PegoStatus_UnknownFamily = 12,
  PegoStatus_Io = 13,
  PegoStatus_Panic = 14,
} PegoStatus;

typedef struct PegoFamilyHandle PegoFamilyHandle;

typedef struct PegoFunction PegoFunction;

/*
 Time grid `(0, t_max)` with step `dt`.
 */
typedef struct PegoGrid {
  double dt;
  double t_max;
} PegoGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 `dt = 1e-3`, `t_max = 40`.
 */
struct PegoGrid pego_grid_default(void);

/*
 Library version, static storage.
 */
const char *pego_version(void);

/*
 Message for the last failed call on this thread, or null. Free with
 `pego_string_free`.
 */
char *pego_last_error_message(void);

/*
 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void pego_string_free(char *s);

/*
 Parses a function from the JSON DSL.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PegoStatus pego_function_from_json(const char *json, struct PegoFunction **out);

/*
 Serializes a function back to the JSON DSL.

 # Safety
 `f` must be a live handle; `out` must be writable.
 */
enum PegoStatus pego_function_to_json(const struct PegoFunction *f, char **out);

/*
 # Safety
 `f` must be null or a handle from `pego_function_from_json`, not yet freed.
 */
void pego_function_free(struct PegoFunction *f);

/*
 Truncated `||e^{-xt} f||_1` and `||e^{-xt} f||_2` on `grid`.

 # Safety
 `f` must be a live handle; `l1`, `l2` must be writable.
 */
enum PegoStatus pego_function_norms(const struct PegoFunction *f,
                                    double x,
                                    struct PegoGrid grid,
                                    double *l1,
                                    double *l2);

/*
 Closed-form `L{f}(re + i im)`. Fails with `Parameter` for sampled
 functions or points left of the abscissa of convergence.

 # Safety
 `f` must be a live handle; `out_re`, `out_im` must be writable.
 */
enum PegoStatus pego_function_laplace(const struct PegoFunction *f,
                                      double re,
                                      double im,
                                      double *out_re,
                                      double *out_im);

/*
 Both sides of the Plancherel identity on the line `Re z = x`, using the
 frequency grid native to `grid`.

 # Safety
 `f` must be a live handle; `lhs`, `rhs` must be writable.
 */
enum PegoStatus pego_plancherel(const struct PegoFunction *f,
                                double x,
                                struct PegoGrid grid,
                                double *lhs,
                                double *rhs);

/*
 JSON array of catalog family specs.

 # Safety
 `out` must be writable.
 */
enum PegoStatus pego_catalog_json(char **out);

/*
 Instantiates a catalog family by name. A negative `x` keeps the
 family's own order.

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum PegoStatus pego_family_catalog(const char *name,
                                    double x,
                                    struct PegoGrid grid,
                                    struct PegoFamilyHandle **out);

/*
 Instantiates a family from a JSON family spec.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PegoStatus pego_family_from_json(const char *json,
                                      struct PegoGrid grid,
                                      struct PegoFamilyHandle **out);

/*
 Number of members, or 0 for a null handle.

 # Safety
 `fam` must be null or a live handle.
 */
uintptr_t pego_family_len(const struct PegoFamilyHandle *fam);

/*
 # Safety
 `fam` must be null or a handle from this library, not yet freed.
 */
void pego_family_free(struct PegoFamilyHandle *fam);

/*
 Full diagnosis at tolerance `eps` with the default sweep, as a
 `pego-lab/1` JSON report.

 # Safety
 `fam` must be a live handle; `out` must be writable.
 */
enum PegoStatus pego_diagnose_json(const struct PegoFamilyHandle *fam, double eps, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEGO_LAB_H */
