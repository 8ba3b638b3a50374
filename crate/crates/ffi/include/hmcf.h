#ifndef HMCF_H
#define HMCF_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HmcfStatus {
  HMCF_STATUS_OK = 0,
  HMCF_STATUS_NULL_POINTER = 1,
  HMCF_STATUS_INVALID_ARGUMENT = 2,
  HMCF_STATUS_GRID_MISMATCH = 3,
  HMCF_STATUS_CONTOUR_VANISHED = 4,
  HMCF_STATUS_STABILITY = 5,
  HMCF_STATUS_FORMAT = 6,
  HMCF_STATUS_CONFIG = 7,
  HMCF_STATUS_IO = 8,
  HMCF_STATUS_BUFFER_TOO_SMALL = 9,
  HMCF_STATUS_PANIC = 10,
} HmcfStatus;

/**
 * Run configuration.
 */
typedef struct HmcfConfig HmcfConfig;

/**
 * Grayscale image with intensities in `[0, 1]`.
 */
typedef struct HmcfImage HmcfImage;

/**
 * Outcome of a segmentation run.
 */
typedef struct HmcfResult HmcfResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *hmcf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hmcf_version(void);

/**
 * Copies `width * height` row-major intensities into a new image.
 *
 * # Safety
 * `data` must point to `width * height` readable doubles and `out` must be
 * writable.
 */
enum HmcfStatus hmcf_image_new(size_t width,
                               size_t height,
                               const double *data,
                               struct HmcfImage **out);

/**
 * Loads a PGM image.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum HmcfStatus hmcf_image_load(const char *path, struct HmcfImage **out);

/**
 * # Safety
 * `image` must be null or a handle from this library not yet freed.
 */
void hmcf_image_free(struct HmcfImage *image);

/**
 * Default configuration for a model name such as `"hmcf-cv"`.
 *
 * # Safety
 * `model` must be a NUL-terminated string and `out` writable.
 */
enum HmcfStatus hmcf_config_new(const char *model, struct HmcfConfig **out);

/**
 * Parses configuration text in the `key = value` grammar.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum HmcfStatus hmcf_config_parse(const char *text, struct HmcfConfig **out);

/**
 * Reads a configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum HmcfStatus hmcf_config_load(const char *path, struct HmcfConfig **out);

/**
 * Sets the initial contour to a circle in world units.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum HmcfStatus hmcf_config_set_init_circle(struct HmcfConfig *config,
                                            double cx,
                                            double cy,
                                            double r);

/**
 * Sets the scalar curvature coefficient `b`.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum HmcfStatus hmcf_config_set_b(struct HmcfConfig *config, double b);

/**
 * # Safety
 * `config` must be null or a handle from this library not yet freed.
 */
void hmcf_config_free(struct HmcfConfig *config);

/**
 * Runs a single-field model. A vanished contour is reported through
 * [`hmcf_result_vanished`], not as an error.
 *
 * # Safety
 * `image` and `config` must be live handles and `out` writable.
 */
enum HmcfStatus hmcf_segment(const struct HmcfImage *image,
                             const struct HmcfConfig *config,
                             struct HmcfResult **out);

/**
 * # Safety
 * `result` must be a live handle.
 */
size_t hmcf_result_iterations(const struct HmcfResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
bool hmcf_result_converged(const struct HmcfResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
bool hmcf_result_vanished(const struct HmcfResult *result);

/**
 * Copies the final level set (row-major) into `buf` of `len` doubles.
 *
 * # Safety
 * `result` must be a live handle and `buf` writable for `len` doubles.
 */
enum HmcfStatus hmcf_result_copy_phi(const struct HmcfResult *result, double *buf, size_t len);

/**
 * # Safety
 * `result` must be null or a handle from this library not yet freed.
 */
void hmcf_result_free(struct HmcfResult *result);

/**
 * Replaces a level-set function with the signed distance to its zero set.
 * `input` and `output` hold `width * height` doubles and may alias.
 *
 * # Safety
 * Both pointers must be valid for `width * height` doubles.
 */
enum HmcfStatus hmcf_reinitialize(size_t width, size_t height, const double *input, double *output);

/**
 * Dice coefficient of two masks given as `width * height` bytes, non-zero
 * meaning inside.
 *
 * # Safety
 * `a` and `b` must be valid for `width * height` bytes and `out` writable.
 */
enum HmcfStatus hmcf_dice(size_t width,
                          size_t height,
                          const uint8_t *a,
                          const uint8_t *b,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HMCF_H */
