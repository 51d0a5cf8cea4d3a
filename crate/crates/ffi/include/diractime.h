#ifndef DIRACTIME_H
#define DIRACTIME_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DtStatus {
  DT_STATUS_OK = 0,
  DT_STATUS_NULL_POINTER = 1,
  DT_STATUS_INVALID_ARGUMENT = 2,
  DT_STATUS_BOUNDARY_UNSAFE = 3,
  DT_STATUS_MISMATCH = 4,
  DT_STATUS_BUFFER_TOO_SMALL = 5,
  DT_STATUS_PANIC = 6,
} DtStatus;

typedef enum DtRepresentation {
  DT_REPRESENTATION_POSITION = 0,
  DT_REPRESENTATION_MOMENTUM = 1,
} DtRepresentation;

/*
 A spinor field on a system's lattice.
 */
typedef struct DtField DtField;

/*
 Operators and lattice for one dimension and rest mass.
 */
typedef struct DtSystem DtSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *dt_version(void);

/*
 Copies the calling thread's last error message into `buf` (truncated,
 always NUL-terminated when `len > 0`). Returns the full message length.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t dt_last_error(char *buf, size_t len);

/*
 Builds a system with `n` points per axis on a box of side `extent`.

 # Safety
 `out` must be valid for one pointer write.
 */
enum DtStatus dt_system_new(size_t dim, size_t n, double extent, double m0, struct DtSystem **out);

/*
 # Safety
 `sys` must be null or a handle from [`dt_system_new`] not yet freed.
 */
void dt_system_free(struct DtSystem *sys);

/*
 Number of doubles in a field buffer for this system.

 # Safety
 `sys` must be a live handle.
 */
enum DtStatus dt_system_field_len(const struct DtSystem *sys, size_t *out);

/*
 Energy and time gaps of the lattice spectra.

 # Safety
 `sys` must be a live handle; the outputs must be writable.
 */
enum DtStatus dt_spectrum_gaps(const struct DtSystem *sys, double *energy_gap, double *time_gap);

/*
 Normalized Gaussian packet. `center` and `pbar` hold `dim` values; the
 branch amplitudes select positive (1, 0), negative (0, 1) or mixed states.

 # Safety
 `center` and `pbar` must point to `dim` doubles; `out` must be writable.
 */
enum DtStatus dt_packet_prepare(const struct DtSystem *sys,
                                const double *center,
                                double width,
                                const double *pbar,
                                double w_plus,
                                double w_minus,
                                struct DtField **out);

/*
 Wraps caller data (see [`dt_system_field_len`] for the length).

 # Safety
 `data` must point to `len` doubles; `out` must be writable.
 */
enum DtStatus dt_field_from_data(const struct DtSystem *sys,
                                 enum DtRepresentation rep,
                                 const double *data,
                                 size_t len,
                                 struct DtField **out);

/*
 Copies the field's position-space data into `buf` (`len` doubles).

 # Safety
 `buf` must be valid for `len` doubles.
 */
enum DtStatus dt_field_copy(const struct DtField *field, double *buf, size_t len);

/*
 Number of doubles [`dt_field_copy`] writes; 0 for a null handle.

 # Safety
 `field` must be null or a live handle.
 */
size_t dt_field_len(const struct DtField *field);

/*
 # Safety
 `field` must be null or a live handle not yet freed.
 */
void dt_field_free(struct DtField *field);

/*
 `exp(-i H_D t) f` into a new handle.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum DtStatus dt_evolve_time(const struct DtSystem *sys,
                             const struct DtField *field,
                             double t,
                             struct DtField **out);

/*
 `exp(-i T eps) f` into a new handle. Fails with `BoundaryUnsafe` for
 states with mass near the box edge.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum DtStatus dt_evolve_energy(const struct DtSystem *sys,
                               const struct DtField *field,
                               double eps,
                               struct DtField **out);

/*
 Expectation value of a named observable (`x_0`, `p_1`, `alpha_2`,
 `beta`, `H`, `T`, `norm`).

 # Safety
 `name` must be a NUL-terminated string; handles must be live.
 */
enum DtStatus dt_expectation(const struct DtSystem *sys,
                             const struct DtField *field,
                             const char *name,
                             double *out);

/*
 Position and momentum spreads along `axis`.

 # Safety
 `field` must be live; outputs must be writable.
 */
enum DtStatus dt_uncertainty_xp(const struct DtField *field,
                                size_t axis,
                                double *delta_x,
                                double *delta_p);

/*
 Relative residual of `[T, H_D]` against its closed form (3D only).

 # Safety
 Handles must be live; `out` must be writable.
 */
enum DtStatus dt_commutator_residual(const struct DtSystem *sys,
                                     const struct DtField *field,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRACTIME_H */
