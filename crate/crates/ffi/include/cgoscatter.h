#ifndef CGOSCATTER_H
#define CGOSCATTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CgsStatus {
  CGS_STATUS_OK = 0,
  CGS_STATUS_NULL_POINTER = 1,
  CGS_STATUS_INVALID_ARGUMENT = 2,
  CGS_STATUS_NUMERICAL = 3,
  CGS_STATUS_CONFIG = 4,
  CGS_STATUS_IO = 5,
  CGS_STATUS_PANIC = 6,
} CgsStatus;

// Sampled complex field on a square grid.
typedef struct CgsField CgsField;

// Scattering matrix on the modes `|m| <= m_max`.
typedef struct CgsSMatrix CgsSMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string; static storage.
const char *cgs_version(void);

// Message of the last failure on this thread; empty if none. Valid until the next failing call.
const char *cgs_last_error(void);

// Field of `n * n` samples on `[-half_width, half_width]^2` from split real and imaginary parts
// in row-major order. `im` may be null for a real field.
//
// # Safety
// `re` (and `im` if not null) must point to `n * n` doubles; `out` must be writable.
enum CgsStatus cgs_field_new(size_t n,
                             double half_width,
                             const double *re,
                             const double *im,
                             struct CgsField **out);

// Gaussian bump `amplitude * exp(-|z - c|^2 / width^2)` sampled on an `n * n` grid.
//
// # Safety
// `out` must be writable.
enum CgsStatus cgs_field_gaussian(size_t n,
                                  double half_width,
                                  double cx,
                                  double cy,
                                  double width,
                                  double amplitude,
                                  struct CgsField **out);

// Samples per axis, or 0 for a null handle.
//
// # Safety
// `field` must be null or a live handle.
size_t cgs_field_n(const struct CgsField *field);

// Sample `(i, k)`.
//
// # Safety
// `field` must be a live handle; `re` and `im` must be writable.
enum CgsStatus cgs_field_get(const struct CgsField *field,
                             size_t i,
                             size_t k,
                             double *re,
                             double *im);

// # Safety
// `field` must be null or a handle not yet freed.
void cgs_field_free(struct CgsField *field);

// Scattering matrix of the potential sampled in `potential` at frequency `lambda`.
//
// # Safety
// `potential` must be a live handle; `out` must be writable.
enum CgsStatus cgs_s_matrix_extract(const struct CgsField *potential,
                                    double lambda,
                                    size_t m_max,
                                    double match_radius,
                                    struct CgsSMatrix **out);

// Mode cutoff `m_max`, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t cgs_s_matrix_m_max(const struct CgsSMatrix *s);

// Entry `S[m_out, m_in]`.
//
// # Safety
// `s` must be a live handle; `re` and `im` must be writable.
enum CgsStatus cgs_s_matrix_entry(const struct CgsSMatrix *s,
                                  int64_t m_out,
                                  int64_t m_in,
                                  double *re,
                                  double *im);

// Spectral norm of `S*S - I`.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum CgsStatus cgs_s_matrix_unitarity_defect(const struct CgsSMatrix *s, double *out);

// # Safety
// `s` must be null or a handle not yet freed.
void cgs_s_matrix_free(struct CgsSMatrix *s);

// Runs an experiment as the command line does and returns its exit code (0, 1 or 2).
// `out_dir` may be null to use the configuration's `output`; the seed overrides the
// configuration only when `use_seed` is true.
//
// # Safety
// `kind` and `config_path` must be NUL-terminated strings; `out_dir` must be null or one.
int32_t cgs_run_experiment(const char *kind,
                           const char *config_path,
                           const char *out_dir,
                           bool use_seed,
                           uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CGOSCATTER_H */
