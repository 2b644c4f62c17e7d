#ifndef POLARON_H
#define POLARON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PolaronStatus {
  POLARON_STATUS_OK = 0,
  POLARON_STATUS_NULL_POINTER = 1,
  POLARON_STATUS_INVALID_ARGUMENT = 2,
  POLARON_STATUS_INVALID_MODEL = 3,
  POLARON_STATUS_NUMERICAL = 4,
  POLARON_STATUS_IO = 5,
  POLARON_STATUS_PANIC = 6,
} PolaronStatus;

typedef struct PolaronChainBath PolaronChainBath;

typedef struct PolaronModel PolaronModel;

typedef struct PolaronTrajectory PolaronTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *polaron_last_error(void);

// Parse a model from a NUL-terminated JSON string.
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum PolaronStatus polaron_model_from_json(const char *json, struct PolaronModel **out);

// # Safety
// `model` must be null or come from `polaron_model_from_json`.
void polaron_model_free(struct PolaronModel *model);

// # Safety
// `model` must be a live handle.
size_t polaron_model_n_sites(const struct PolaronModel *model);

// Propagate an excitation starting on `initial_site` (0-based) with the Fock
// cutoff `fock_dim` on the grid `0, dt, …, t_max`. `use_dense` selects the
// exact-diagonalization propagator.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum PolaronStatus polaron_simulate(const struct PolaronModel *model,
                                    size_t fock_dim,
                                    size_t initial_site,
                                    double t_max,
                                    double dt,
                                    bool use_dense,
                                    struct PolaronTrajectory **out);

// # Safety
// `traj` must be null or a handle from `polaron_simulate`.
void polaron_trajectory_free(struct PolaronTrajectory *traj);

// # Safety
// `traj` must be a live handle.
size_t polaron_trajectory_n_times(const struct PolaronTrajectory *traj);

// # Safety
// `traj` must be a live handle.
size_t polaron_trajectory_n_sites(const struct PolaronTrajectory *traj);

// Copy the time grid into `buf` (length `len` ≥ n_times).
//
// # Safety
// `traj` must be a live handle and `buf` valid for `len` writes.
enum PolaronStatus polaron_trajectory_times(const struct PolaronTrajectory *traj,
                                            double *buf,
                                            size_t len);

// Copy populations row-major (`n_times × n_sites`) into `buf`.
//
// # Safety
// `traj` must be a live handle and `buf` valid for `len` writes.
enum PolaronStatus polaron_trajectory_populations(const struct PolaronTrajectory *traj,
                                                  double *buf,
                                                  size_t len);

// Coupling ratio `√R` of an inductively coupled oscillator at frequency `freq_ghz`.
//
// # Safety
// `out` must be a valid pointer.
enum PolaronStatus polaron_coupling_ratio(double beta,
                                          double persistent_current_na,
                                          double impedance_ohm,
                                          double freq_ghz,
                                          double *out);

// Transform `n` star modes `(omegas[k], kappas[k])` into `n_chains` chains.
//
// # Safety
// `omegas` and `kappas` must be valid for `n` reads and `out` a valid pointer.
enum PolaronStatus polaron_star_to_chain(const double *omegas,
                                         const double *kappas,
                                         size_t n,
                                         size_t n_chains,
                                         struct PolaronChainBath **out);

// # Safety
// `bath` must be null or a handle from `polaron_star_to_chain`.
void polaron_chain_bath_free(struct PolaronChainBath *bath);

// # Safety
// `bath` must be a live handle.
size_t polaron_chain_bath_n_chains(const struct PolaronChainBath *bath);

// # Safety
// `bath` must be a live handle.
size_t polaron_chain_bath_max_len(const struct PolaronChainBath *bath);

// Serialize to JSON. The returned string must be released with `polaron_string_free`.
//
// # Safety
// `bath` must be a live handle and `out` a valid pointer.
enum PolaronStatus polaron_chain_bath_to_json(const struct PolaronChainBath *bath, char **out);

// # Safety
// `s` must be null or a string returned by this library.
void polaron_string_free(char *s);

// Number of auxiliary density operators, saturating at `UINT64_MAX`.
uint64_t polaron_ado_count(size_t n_sites, size_t n_peaks, size_t depth, size_t matsubara);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLARON_H */
