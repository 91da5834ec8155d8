#ifndef OMIDYN_H
#define OMIDYN_H

/* Generated by cbindgen from the omidyn-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Initial-state selector for the dynamics entry points.
 */
typedef enum OmidynStateKind {
  /**
   * Number states in the field and the mirror; uses `photons`, `phonons`.
   */
  OmidynStateKind_NumberNumber = 0,
  /**
   * Number state in the field, coherent mirror; uses `photons`, `beta_*`.
   */
  OmidynStateKind_NumberCoherent = 1,
  /**
   * Coherent photon distribution and coherent mirror; uses `alpha`,
   * `beta_*`.
   */
  OmidynStateKind_CoherentCoherent = 2,
} OmidynStateKind;

/**
 * Outcome of an ABI call.
 */
typedef enum OmidynStatus {
  OmidynStatus_Ok = 0,
  /**
   * A photon sector in play has an inverted effective potential.
   */
  OmidynStatus_Stability = 1,
  /**
   * A truncated series exceeded its term cap before converging.
   */
  OmidynStatus_NonConvergence = 2,
  /**
   * An argument violates a documented precondition.
   */
  OmidynStatus_InvalidArgument = 3,
  /**
   * A required pointer was null.
   */
  OmidynStatus_NullPointer = 4,
} OmidynStatus;

/**
 * Opaque system handle.
 */
typedef struct OmidynSystem OmidynSystem;

/**
 * Plain-data initial-state descriptor.
 */
typedef struct OmidynState {
  enum OmidynStateKind kind;
  uint32_t photons;
  uint32_t phonons;
  /**
   * Real coherent field amplitude (CoherentCoherent only).
   */
  double alpha;
  double beta_re;
  double beta_im;
} OmidynState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a system handle. `gamma` is the pure-dephasing rate; pass positive
 * infinity for the unitary limit. On success writes the handle to `out`.
 *
 * # Safety
 * `out` must be a valid pointer to an `OmidynSystem*` slot.
 */
enum OmidynStatus omidyn_system_new(double omega_c,
                                    double omega_m,
                                    double g_l,
                                    double g_q,
                                    double gamma,
                                    struct OmidynSystem **out);

/**
 * Release a handle created by `omidyn_system_new`. A null handle is a no-op.
 *
 * # Safety
 * `system` must be null or a pointer previously returned by
 * `omidyn_system_new` that has not been freed.
 */
void omidyn_system_free(struct OmidynSystem *system);

/**
 * Dressed-ladder energy of the level `(photons, phonons)`.
 *
 * # Safety
 * `system` must be a live handle and `out` a valid `double` slot.
 */
enum OmidynStatus omidyn_eigenvalue(const struct OmidynSystem *system,
                                    uint32_t photons,
                                    uint32_t phonons,
                                    double *out);

/**
 * Mean phonon number at time `t`.
 *
 * # Safety
 * `system` must be a live handle, `state` and `out` valid pointers.
 */
enum OmidynStatus omidyn_phonon_number(const struct OmidynSystem *system,
                                       const struct OmidynState *state,
                                       double t,
                                       double *out);

/**
 * Mean position quadrature at time `t`.
 *
 * # Safety
 * `system` must be a live handle, `state` and `out` valid pointers.
 */
enum OmidynStatus omidyn_quadrature(const struct OmidynSystem *system,
                                    const struct OmidynState *state,
                                    double t,
                                    double *out);

/**
 * Evaluate both observables over a strictly increasing time grid of length
 * `len`, filling the caller's `phonon_out` and `quadrature_out` buffers
 * (each of length `len`).
 *
 * # Safety
 * `system` must be a live handle; `times`, `phonon_out` and
 * `quadrature_out` must point to `len` readable/writable doubles.
 */
enum OmidynStatus omidyn_dynamics(const struct OmidynSystem *system,
                                  const struct OmidynState *state,
                                  const double *times,
                                  size_t len,
                                  double *phonon_out,
                                  double *quadrature_out);

/**
 * Time-dependent spectrum of the mirror for a fixed photon number and
 * coherent mirror amplitude, one value per detection frequency.
 *
 * # Safety
 * `system` must be a live handle; `omegas` must point to `len` readable
 * doubles forming a strictly increasing grid and `out` to `len` writable
 * doubles.
 */
enum OmidynStatus omidyn_spectrum_number(const struct OmidynSystem *system,
                                         uint32_t photons,
                                         double beta_re,
                                         double beta_im,
                                         double filter_linewidth,
                                         const double *omegas,
                                         size_t len,
                                         double t,
                                         double *out);

/**
 * Long-time spectral limit at one detection frequency; requires a finite
 * dephasing rate.
 *
 * # Safety
 * `system` must be a live handle and `out` a valid `double` slot.
 */
enum OmidynStatus omidyn_longtime_spectrum(const struct OmidynSystem *system,
                                           uint32_t photons,
                                           double filter_linewidth,
                                           double omega,
                                           double *out);

/**
 * Static description of a status code.
 */
const char *omidyn_status_message(enum OmidynStatus status);

/**
 * Library version as a static nul-terminated string.
 */
const char *omidyn_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OMIDYN_H */
