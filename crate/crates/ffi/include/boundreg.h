#ifndef BOUNDREG_H
#define BOUNDREG_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BrCriterion {
  BR_CRITERION_TKS = 0,
  BR_CRITERION_TCM = 1,
  BR_CRITERION_TKSCM = 2,
  BR_CRITERION_TCMKS = 3,
} BrCriterion;

typedef enum BrDesign {
  BR_DESIGN_RANDOM = 0,
  BR_DESIGN_FIXED = 1,
} BrDesign;

typedef enum BrFamily {
  BR_FAMILY_YEO_JOHNSON = 0,
  BR_FAMILY_SINH_ARCSINH = 1,
  BR_FAMILY_IDENTITY = 2,
} BrFamily;

/*
 Result codes.
 */
typedef enum BrStatus {
  BR_STATUS_OK = 0,
  BR_STATUS_NULL_POINTER = 1,
  BR_STATUS_INVALID_ARGUMENT = 2,
  BR_STATUS_DOMAIN = 3,
  BR_STATUS_RANGE = 4,
  BR_STATUS_PARAMETER = 5,
  BR_STATUS_ESTIMATION = 6,
  BR_STATUS_GENERATION = 7,
  BR_STATUS_UNDEFINED = 8,
  BR_STATUS_PANIC = 99,
} BrStatus;

/*
 Opaque boundary-fit handle (local-constant fit plus its smoothing).
 */
typedef struct BrBoundary BrBoundary;

/*
 Opaque dataset handle.
 */
typedef struct BrDataset BrDataset;

/*
 Outcome of [`br_estimate`]. Only the first `dim` entries of `theta` are set.
 */
typedef struct BrEstimate {
  double theta[2];
  size_t dim;
  double criterion_value;
  size_t evaluations;
} BrEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the calling thread's last error message into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length excluding the NUL,
 or 0 when no error has been recorded.
 */
size_t br_last_error(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *br_version(void);

enum BrStatus br_yj_forward(double theta, double y, double *out);

enum BrStatus br_yj_inverse(double theta, double z, double *out);

enum BrStatus br_sas_forward(double tailweight, double skewness, double y, double *out);

/*
 `G_n(y, s)` for residuals `r` and covariates `xs` of length `n`.
 */
enum BrStatus br_gn_eval(const double *r,
                         const double *xs,
                         size_t n,
                         double y,
                         double s,
                         double *out);

/*
 Creates a dataset from `n` covariate/response pairs. Rows are sorted by covariate.
 */
enum BrStatus br_dataset_new(const double *xs,
                             const double *ys,
                             size_t n,
                             enum BrDesign design,
                             struct BrDataset **out);

/*
 Generates a dataset from simulation model `model` (1 to 4).
 */
enum BrStatus br_dataset_generate(uint8_t model,
                                  double theta0,
                                  size_t n,
                                  enum BrDesign design,
                                  uint64_t seed,
                                  struct BrDataset **out);

size_t br_dataset_len(const struct BrDataset *data);

/*
 Copies the sorted samples into caller buffers of capacity `cap`.
 */
enum BrStatus br_dataset_copy(const struct BrDataset *data, double *xs, double *ys, size_t cap);

void br_dataset_free(struct BrDataset *data);

/*
 Fits the boundary for transformation `family(params)` with window `b` and smoothing `a`.
 */
enum BrStatus br_boundary_fit(const struct BrDataset *data,
                              enum BrFamily family,
                              const double *params,
                              size_t n_params,
                              double b,
                              double a,
                              struct BrBoundary **out);

/*
 Local-constant (windowed maximum) boundary at `x`.
 */
enum BrStatus br_boundary_eval_raw(const struct BrBoundary *fit, double x, double *out);

/*
 Smoothed boundary at `x`; `fallback` (optional) is set to 1 when the
 kernel window was empty and the nearest knot value was used.
 */
enum BrStatus br_boundary_eval_smooth(const struct BrBoundary *fit,
                                      double x,
                                      double *out,
                                      int32_t *fallback);

void br_boundary_free(struct BrBoundary *fit);

/*
 Minimum-distance estimate of the transformation parameter.

 `lower`/`upper` give the search box (`dim` entries, matching the family);
 pass null for both to use the family default. `b <= 0` selects
 `n^(-1/3)`, `a <= 0` selects `b / 2`.
 */
enum BrStatus br_estimate(const struct BrDataset *data,
                          enum BrFamily family,
                          enum BrCriterion criterion,
                          double b,
                          double a,
                          const double *lower,
                          const double *upper,
                          size_t dim,
                          size_t y_grid_size,
                          int32_t raw_boundary,
                          struct BrEstimate *out);

/*
 Residuals `Lambda(Y_i) - h(x_i)` in sorted sample order, written to `out`
 (capacity `cap`).
 */
enum BrStatus br_residuals(const struct BrDataset *data,
                           enum BrFamily family,
                           const double *params,
                           size_t n_params,
                           double b,
                           double a,
                           int32_t raw_boundary,
                           double *out,
                           size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOUNDREG_H */
