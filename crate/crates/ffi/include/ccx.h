#ifndef CCX_H
#define CCX_H

/* C interface to ccx-core. Handles are opaque and owned by the caller;
 * release them with the matching _free function. On a nonzero status,
 * ccx_last_error_message() describes the failure until the next call on
 * the same thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum CcxStatus {
  CCX_STATUS_OK = 0,
  CCX_STATUS_NULL_POINTER = 1,
  CCX_STATUS_INPUT = 2,
  CCX_STATUS_INVARIANT = 3,
  CCX_STATUS_PARAMETER = 4,
  CCX_STATUS_PANIC = 5,
} CcxStatus;

typedef enum CcxTransformKind {
  CCX_TRANSFORM_LOWER = 0,
  CCX_TRANSFORM_UPPER = 1,
  /* C^u_tau(C^l_lambda f) */
  CCX_TRANSFORM_MIXED_UPPER_OF_LOWER = 2,
  /* C^l_tau(C^u_lambda f) */
  CCX_TRANSFORM_MIXED_LOWER_OF_UPPER = 3,
} CcxTransformKind;

typedef enum CcxApproxKind {
  CCX_APPROX_LOWER = 0,
  CCX_APPROX_UPPER = 1,
  /* s L + (1 - s) U */
  CCX_APPROX_WEIGHTED = 2,
  CCX_APPROX_MIXED = 3,
} CcxApproxKind;

typedef enum CcxExterior {
  CCX_EXTERIOR_UNSAMPLED = 0,
  CCX_EXTERIOR_CLIPPED = 1,
  /* in K with the constant c0 */
  CCX_EXTERIOR_SAMPLED = 2,
} CcxExterior;

typedef struct CcxGrid CcxGrid;
typedef struct CcxMask CcxMask;

const char *ccx_last_error_message(void);
const char *ccx_version(void);

/* values are row-major with prod(shape) entries */
CcxStatus ccx_grid_new(size_t dim, const size_t *shape, const double *spacing,
                       const double *origin, const double *values, CcxGrid **out);
void ccx_grid_free(CcxGrid *grid);
size_t ccx_grid_len(const CcxGrid *grid);
size_t ccx_grid_dim(const CcxGrid *grid);
CcxStatus ccx_grid_shape(const CcxGrid *grid, size_t *shape_out);
CcxStatus ccx_grid_values(const CcxGrid *grid, double *values_out, size_t len);
CcxStatus ccx_grid_read(const char *path, CcxGrid **out);
CcxStatus ccx_grid_write(const CcxGrid *grid, const char *path);

/* member is row-major, nonzero = member */
CcxStatus ccx_mask_new(size_t dim, const size_t *shape, const double *spacing,
                       const double *origin, const uint8_t *member, CcxMask **out);
CcxStatus ccx_mask_from_grid(const CcxGrid *grid, CcxMask **out);
void ccx_mask_free(CcxMask *mask);
size_t ccx_mask_count(const CcxMask *mask);

/* tau is read by the mixed kinds only */
CcxStatus ccx_transform(const CcxGrid *grid, CcxTransformKind kind, double lambda,
                        double tau, CcxGrid **out);
/* s is read by the weighted kind, tau by the mixed kind, c0 by the sampled exterior */
CcxStatus ccx_approximate(const CcxGrid *grid, const CcxMask *mask, CcxApproxKind kind,
                          double lambda, double m, double s, double tau,
                          CcxExterior exterior, double c0, CcxGrid **out);

CcxStatus ccx_hausdorff_distance(const CcxMask *a, const CcxMask *b, double *out);
/* CCX_STATUS_INVARIANT when the node lies outside co[K] */
CcxStatus ccx_convex_density_radius(const CcxMask *mask, size_t node, double *out);
double ccx_locality_radius(double m, double lambda);
double ccx_validation_threshold(double a0, double lambda, double d);

#ifdef __cplusplus
}
#endif

#endif /* CCX_H */
