#ifndef SCMA_H
#define SCMA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScmaStatus {
  SCMA_STATUS_OK = 0,
  SCMA_STATUS_NULL_POINTER = 1,
  SCMA_STATUS_INVALID_ARGUMENT = 2,
  SCMA_STATUS_PARSE = 3,
  SCMA_STATUS_DIMENSION = 4,
  SCMA_STATUS_NOT_SEPARABLE = 5,
  SCMA_STATUS_IO = 6,
  SCMA_STATUS_BUFFER_TOO_SMALL = 7,
  SCMA_STATUS_PANIC = 8,
} ScmaStatus;

typedef enum ScmaDetectorKind {
  SCMA_DETECTOR_KIND_MPA = 0,
  SCMA_DETECTOR_KIND_LLR = 1,
  SCMA_DETECTOR_KIND_SPLIT_MPA = 2,
  SCMA_DETECTOR_KIND_SPLIT_LLR = 3,
  // Discretized; split 1-D when the codebook allows it, else 2-D.
  SCMA_DETECTOR_KIND_DMPA = 4,
  SCMA_DETECTOR_KIND_DMPA1D = 5,
  SCMA_DETECTOR_KIND_DMPA2D = 6,
} ScmaDetectorKind;

// Noise model of a bound computation.
typedef enum ScmaField {
  // `noise_var` is the real variance sigma^2.
  SCMA_FIELD_REAL = 0,
  // `noise_var` is the complex variance N0.
  SCMA_FIELD_COMPLEX = 1,
} ScmaField;

// Opaque codebook handle.
typedef struct ScmaCodebook ScmaCodebook;

// Opaque detector handle; holds its own copy of the codebook.
typedef struct ScmaDetector ScmaDetector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *scma_last_error(void);

// Static, NUL-terminated version string.
const char *scma_version(void);

// Random separable codebook on the regular pair graph over `resources`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ScmaStatus scma_codebook_generate(size_t resources,
                                       size_t codewords,
                                       uint64_t seed,
                                       struct ScmaCodebook **out);

// Separable codebook whose components are multiples of `w` within `amplitude`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ScmaStatus scma_codebook_generate_grid(size_t resources,
                                            size_t codewords,
                                            double w,
                                            double amplitude,
                                            uint64_t seed,
                                            struct ScmaCodebook **out);

// # Safety
// `path` must be a NUL-terminated string; `out` as in [`scma_codebook_generate`].
enum ScmaStatus scma_codebook_load(const char *path, struct ScmaCodebook **out);

// # Safety
// `cb` must be a live handle; `path` a NUL-terminated string.
enum ScmaStatus scma_codebook_save(const struct ScmaCodebook *cb, const char *path);

// Writes K, J and M. Any output pointer may be null.
//
// # Safety
// `cb` must be a live handle; non-null outputs must be writable.
enum ScmaStatus scma_codebook_dims(const struct ScmaCodebook *cb,
                                   size_t *resources,
                                   size_t *layers,
                                   size_t *codewords);

// # Safety
// `cb` must be null or a handle not yet freed.
void scma_codebook_free(struct ScmaCodebook *cb);

// Superposes codeword `indices[j]` of every layer and adds noise drawn
// from trial `trial` of the `seed` stream. Writes K samples.
//
// # Safety
// `indices` must hold `layers` values; `y_re` and `y_im` must hold `len`.
enum ScmaStatus scma_transmit(const struct ScmaCodebook *cb,
                              const size_t *indices,
                              size_t layers,
                              double n0,
                              uint64_t seed,
                              uint64_t trial,
                              double *y_re,
                              double *y_im,
                              size_t len);

// Builds a reusable detector. `w` is ignored by non-discretized kinds.
//
// # Safety
// `cb` must be a live handle; `out` writable.
enum ScmaStatus scma_detector_new(const struct ScmaCodebook *cb,
                                  enum ScmaDetectorKind kind,
                                  double n0,
                                  double nwid,
                                  size_t iterations,
                                  double w,
                                  struct ScmaDetector **out);

// Detects one received vector of K samples and writes J decided indices.
//
// # Safety
// `y_re`/`y_im` must hold `len` values and `decided` `decided_len` slots.
enum ScmaStatus scma_detector_detect(struct ScmaDetector *det,
                                     const double *y_re,
                                     const double *y_im,
                                     size_t len,
                                     size_t *decided,
                                     size_t decided_len);

// # Safety
// `det` must be null or a handle not yet freed.
void scma_detector_free(struct ScmaDetector *det);

// Per-entry absolute and relative discretization error bounds.
//
// # Safety
// `abs_out` and `rel_out` must be writable.
enum ScmaStatus scma_error_bounds(enum ScmaField field,
                                  size_t degree,
                                  double w,
                                  double nwid,
                                  double noise_var,
                                  double *abs_out,
                                  double *rel_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCMA_H */
