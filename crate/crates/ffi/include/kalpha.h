#ifndef KALPHA_H
#define KALPHA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes. The nonzero values match the exit codes of the CLI where
// both exist.
typedef enum KalphaStatus {
  KALPHA_STATUS_OK = 0,
  // A parameter is out of its domain or a descriptor does not parse.
  KALPHA_STATUS_INVALID_ARGUMENT = 2,
  KALPHA_STATUS_IO = 3,
  // Analytic and numerical results disagree.
  KALPHA_STATUS_CONSISTENCY = 4,
  KALPHA_STATUS_NULL_POINTER = 5,
  // A Rust panic was caught at the boundary.
  KALPHA_STATUS_PANIC = 6,
} KalphaStatus;

// Opaque measure parameters.
typedef struct KalphaParams KalphaParams;

// Opaque large-jump path.
typedef struct KalphaPath KalphaPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into the library on the same thread.
const char *kalpha_last_error(void);

// Library version as a static NUL-terminated string.
const char *kalpha_version(void);

// # Safety
// `out_params` must be a valid pointer to writable storage for a handle.
enum KalphaStatus kalpha_params_new(double alpha, struct KalphaParams **out_params);

// # Safety
// `params` must be null or a handle from [`kalpha_params_new`] not yet freed.
void kalpha_params_free(struct KalphaParams *params);

// # Safety
// `params` must be a live handle and `value` writable.
enum KalphaStatus kalpha_params_alpha(const struct KalphaParams *params, double *value);

// Total mass of the measure outside `[-1, 1]`.
//
// # Safety
// `params` must be a live handle and `value` writable.
enum KalphaStatus kalpha_trunc_mass(const struct KalphaParams *params, double *value);

// `nu((r, inf))` for `r >= 1`.
//
// # Safety
// `params` must be a live handle and `value` writable.
enum KalphaStatus kalpha_tail_one_sided(const struct KalphaParams *params, double r, double *value);

// `ln(1 + |jump|)` at which the normalized survival of a large jump is `u` in `(0, 1]`.
//
// # Safety
// `params` must be a live handle and `value` writable.
enum KalphaStatus kalpha_inverse_tail(const struct KalphaParams *params, double u, double *value);

// Laplace exponent of the positive-jump subordinator.
//
// # Safety
// `params` must be a live handle and `value` writable.
enum KalphaStatus kalpha_laplace_exponent(const struct KalphaParams *params,
                                          double lambda,
                                          double *value);

// Pruitt function `h(r)`.
//
// # Safety
// `params` must be a live handle and `value` writable.
enum KalphaStatus kalpha_pruitt_hbar(const struct KalphaParams *params, double r, double *value);

// `int_{1 < |x| <= cap} |x|^eta nu(dx)`.
//
// # Safety
// `params` must be a live handle and `value` writable.
enum KalphaStatus kalpha_trunc_moment(const struct KalphaParams *params,
                                      double eta,
                                      double cap,
                                      double *value);

// Upper-function integral for an envelope descriptor such as `exp:c=1`.
// `convergent` receives 1 or 0; `value` receives the integral, or infinity
// when it diverges.
//
// # Safety
// `params` must be a live handle, `envelope` a NUL-terminated string and
// both out-pointers writable.
enum KalphaStatus kalpha_upper_function(const struct KalphaParams *params,
                                        const char *envelope,
                                        int32_t *convergent,
                                        double *value);

// Path support for one `beta > 1`: membership in S', K' and K'_beta as 0/1.
//
// # Safety
// `params` must be a live handle and the out-pointers writable.
enum KalphaStatus kalpha_classify(const struct KalphaParams *params,
                                  double beta,
                                  int32_t *in_s_prime,
                                  int32_t *in_k_prime,
                                  int32_t *in_k_beta);

// Simulates the large-jump component of path `path_index` of `seed`.
//
// # Safety
// `params` must be a live handle and `out_path` writable.
enum KalphaStatus kalpha_simulate(const struct KalphaParams *params,
                                  double horizon,
                                  uint64_t seed,
                                  uint64_t path_index,
                                  struct KalphaPath **out_path);

// # Safety
// `path` must be null or a handle from this library not yet freed.
void kalpha_path_free(struct KalphaPath *path);

// # Safety
// `path` must be a live handle and `len` writable.
enum KalphaStatus kalpha_path_len(const struct KalphaPath *path, size_t *len);

// # Safety
// `path` must be a live handle and `horizon` writable.
enum KalphaStatus kalpha_path_horizon(const struct KalphaPath *path, double *horizon);

// Event `index`: time, sign (+1 or -1) and `ln(1 + |jump|)`.
//
// # Safety
// `path` must be a live handle and the out-pointers writable.
enum KalphaStatus kalpha_path_event(const struct KalphaPath *path,
                                    size_t index,
                                    double *t,
                                    int8_t *sign,
                                    double *log1p_mag);

// Writes the path as a JSON-Lines file.
//
// # Safety
// `path` must be a live handle and `file` a NUL-terminated string.
enum KalphaStatus kalpha_path_write(const struct KalphaPath *path, const char *file);

// Reads path `path_index` from a JSON-Lines file.
//
// # Safety
// `file` must be a NUL-terminated string and `out_path` writable.
enum KalphaStatus kalpha_path_read(const char *file,
                                   uint64_t path_index,
                                   struct KalphaPath **out_path);

// White-noise pairing with a test function descriptor such as
// `bump:center=5,width=2`. The value is returned as sign and natural-log
// magnitude; `crosscheck_rel_err` compares the two summation orders.
//
// # Safety
// `path` must be a live handle, `phi` a NUL-terminated string and the
// out-pointers writable.
enum KalphaStatus kalpha_pair(const struct KalphaPath *path,
                              const char *phi,
                              int8_t *sign,
                              double *logmag,
                              double *crosscheck_rel_err);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KALPHA_H */
