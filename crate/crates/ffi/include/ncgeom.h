#ifndef NCGEOM_H
#define NCGEOM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NcgeomStatus {
  NCGEOM_STATUS_OK = 0,
  NCGEOM_STATUS_NULL_POINTER = 1,
  NCGEOM_STATUS_INVALID_UTF8 = 2,
  NCGEOM_STATUS_INVALID_INPUT = 3,
  NCGEOM_STATUS_SHAPE = 4,
  NCGEOM_STATUS_VALIDATION = 5,
  NCGEOM_STATUS_PRECONDITION = 6,
  NCGEOM_STATUS_ITERATION_LIMIT = 7,
  NCGEOM_STATUS_NUMERICAL = 8,
  NCGEOM_STATUS_INCONSISTENT = 9,
  NCGEOM_STATUS_IO = 10,
  NCGEOM_STATUS_PANIC = 11,
} NcgeomStatus;

// Smooth morphism between two finite spectral triples.
typedef struct NcgeomMorphism NcgeomMorphism;

// Finite spectral triple.
typedef struct NcgeomTriple NcgeomTriple;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string. Do not free it.
const char *ncgeom_version(void);

// Message of the last failed call on this thread, or null if the last call
// succeeded. The caller owns the returned string.
char *ncgeom_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library that has not been freed.
void ncgeom_string_free(char *s);

// Uniform N-point space with off-diagonal coupling `x_re + i x_im`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum NcgeomStatus ncgeom_triple_npoint(size_t n,
                                       double x_re,
                                       double x_im,
                                       struct NcgeomTriple **out);

// Parses and validates a triple in the CLI's JSON format.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be valid for one write.
enum NcgeomStatus ncgeom_triple_from_json(const char *json, struct NcgeomTriple **out);

// Serializes a triple to JSON. The caller frees `*out` with [`ncgeom_string_free`].
//
// # Safety
// `t` must be a live handle; `out` must be valid for one write.
enum NcgeomStatus ncgeom_triple_to_json(const struct NcgeomTriple *t, char **out);

// Hilbert space dimension, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live handle.
size_t ncgeom_triple_hilbert_dim(const struct NcgeomTriple *t);

// Number of matrix blocks of the algebra, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live handle.
size_t ncgeom_triple_num_blocks(const struct NcgeomTriple *t);

// Releases a triple.
//
// # Safety
// `t` must be null or a handle not yet freed.
void ncgeom_triple_free(struct NcgeomTriple *t);

// Distance between the evaluation states of two blocks; `eps <= 0` selects the
// default gap tolerance. An infinite distance is reported as `INFINITY`.
//
// # Safety
// `t` must be a live handle; `out` must be valid for one write.
enum NcgeomStatus ncgeom_distance_blocks(const struct NcgeomTriple *t,
                                         size_t rho_block,
                                         size_t sigma_block,
                                         double eps,
                                         double *out);

// Same as [`ncgeom_distance_blocks`] but returns the full result (value,
// certificate, iterations, upper bound) as JSON.
//
// # Safety
// `t` must be a live handle; `out` must be valid for one write.
enum NcgeomStatus ncgeom_distance_json(const struct NcgeomTriple *t,
                                       size_t rho_block,
                                       size_t sigma_block,
                                       double eps,
                                       char **out);

// Parses a morphism in the CLI's JSON format. Triples given by path are
// resolved against `base_dir`, or the working directory when it is null.
//
// # Safety
// `json` must be a nul-terminated string, `base_dir` null or nul-terminated, and
// `out` valid for one write.
enum NcgeomStatus ncgeom_morphism_from_json(const char *json,
                                            const char *base_dir,
                                            struct NcgeomMorphism **out);

// Releases a morphism.
//
// # Safety
// `m` must be null or a handle not yet freed.
void ncgeom_morphism_free(struct NcgeomMorphism *m);

// Classification report as JSON over the standard states of the target.
// Returns `Inconsistent` (with no report) if the implications fail.
//
// # Safety
// `m` must be a live handle; `out` must be valid for one write.
enum NcgeomStatus ncgeom_classify_json(const struct NcgeomMorphism *m,
                                       double tol,
                                       double eps,
                                       char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCGEOM_H */
