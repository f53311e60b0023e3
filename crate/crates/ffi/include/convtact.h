#ifndef CONVTACT_H
#define CONVTACT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_DIMENSION = 2,
  CT_STATUS_RANK = 3,
  CT_STATUS_SHAPE = 4,
  CT_STATUS_FORMAT = 5,
  CT_STATUS_UNKNOWN_KERNEL = 6,
  CT_STATUS_DOMAIN = 7,
  CT_STATUS_SCALE = 8,
  CT_STATUS_CONFIG = 9,
  CT_STATUS_INPUT = 10,
  CT_STATUS_SCORING = 11,
  CT_STATUS_IO = 12,
  CT_STATUS_BUFFER_TOO_SMALL = 13,
  CT_STATUS_PANIC = 14,
} CtStatus;

typedef enum CtMethod {
  CT_METHOD_AUTO = 0,
  CT_METHOD_DIRECT = 1,
  CT_METHOD_FFT = 2,
} CtMethod;

typedef enum CtShape {
  CT_SHAPE_FULL = 0,
  CT_SHAPE_SAME = 1,
  CT_SHAPE_VALID = 2,
} CtShape;

typedef enum CtBoundary {
  CT_BOUNDARY_ZERO = 0,
  CT_BOUNDARY_REPLICATE = 1,
} CtBoundary;

typedef enum CtBackend {
  CT_BACKEND_DIRECT = 0,
  CT_BACKEND_FFT = 1,
} CtBackend;

typedef enum CtKernel {
  CT_KERNEL_ROBERTS = 0,
  CT_KERNEL_PREWITT2 = 1,
  CT_KERNEL_PREWITT3 = 2,
  CT_KERNEL_SOBEL = 3,
} CtKernel;

/**
 * Opaque tensor handle.
 */
typedef struct CtTensor CtTensor;

/**
 * One time-to-contact estimate. FOE is in absolute pixel coordinates.
 */
typedef struct CtTtcEstimate {
  double a;
  double b;
  double c;
  double foe_x;
  double foe_y;
  double ttc;
  double residual;
  size_t level;
  bool degenerate;
} CtTtcEstimate;

/**
 * Synthetic sequence parameters. `foe_x`, `foe_y` are fractions of the
 * frame extent.
 */
typedef struct CtSynthConfig {
  size_t width;
  size_t height;
  size_t frames;
  double t0;
  double foe_x;
  double foe_y;
  uint64_t seed;
  double noise_sigma;
} CtSynthConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *convtact_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *convtact_version(void);

/**
 * New tensor with extents `dims[0..ndim]`, filled from `data` (which must
 * hold the product of the extents) or with zeros when `data` is NULL.
 */
enum CtStatus convtact_tensor_new(const size_t *dims,
                                  size_t ndim,
                                  const double *data,
                                  struct CtTensor **out);

/**
 * Releases a handle. NULL is ignored.
 */
void convtact_tensor_free(struct CtTensor *t);

/**
 * Number of axes, or 0 for NULL.
 */
size_t convtact_tensor_ndim(const struct CtTensor *t);

/**
 * Number of elements, or 0 for NULL.
 */
size_t convtact_tensor_len(const struct CtTensor *t);

/**
 * Copies the extents into `dims`, which holds `cap` entries.
 */
enum CtStatus convtact_tensor_dims(const struct CtTensor *t, size_t *dims, size_t cap);

/**
 * Borrowed pointer to the elements; valid while the handle lives.
 */
const double *convtact_tensor_data(const struct CtTensor *t);

/**
 * Reads an NDT file.
 */
enum CtStatus convtact_tensor_read(const char *path, struct CtTensor **out);

/**
 * Writes an NDT file.
 */
enum CtStatus convtact_tensor_write(const struct CtTensor *t, const char *path);

/**
 * Reads a binary PGM as a `[height, width]` tensor scaled to `[0, 1]`.
 */
enum CtStatus convtact_pgm_read(const char *path, struct CtTensor **out);

/**
 * Writes a `[height, width]` tensor with values in `[0, 1]` as 8-bit PGM.
 */
enum CtStatus convtact_pgm_write(const struct CtTensor *t, const char *path);

/**
 * Convolution, or cross-correlation when `correlate` is set. With
 * `CT_METHOD_AUTO` kernels of fewer than `auto_threshold` elements run
 * direct. `backend` may be NULL.
 */
enum CtStatus convtact_conv(const struct CtTensor *signal,
                            const struct CtTensor *kernel,
                            enum CtMethod method,
                            size_t auto_threshold,
                            enum CtShape shape,
                            enum CtBoundary boundary,
                            bool correlate,
                            struct CtTensor **out,
                            enum CtBackend *backend);

/**
 * Gradient fields of a 2-D image. Each output pointer may be NULL to skip
 * that field.
 */
enum CtStatus convtact_gradient(const struct CtTensor *image,
                                enum CtKernel kernel,
                                struct CtTensor **ex,
                                struct CtTensor **ey,
                                struct CtTensor **mag,
                                struct CtTensor **dir);

/**
 * Estimate for one frame pair. `level` is the fixed pyramid level, or the
 * deepest level searched when `multiscale` is set.
 */
enum CtStatus convtact_ttc_estimate(const struct CtTensor *e0,
                                    const struct CtTensor *e1,
                                    bool multiscale,
                                    size_t level,
                                    struct CtTtcEstimate *out);

/**
 * Default synthetic configuration.
 */
struct CtSynthConfig convtact_synth_default(void);

/**
 * Synthetic zoom sequence as a `[frames, height, width]` tensor.
 */
enum CtStatus convtact_synth_generate(const struct CtSynthConfig *cfg, struct CtTensor **out);

/**
 * Plane `index` of a tensor with at least two axes.
 */
enum CtStatus convtact_tensor_plane(const struct CtTensor *t, size_t index, struct CtTensor **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONVTACT_H */
