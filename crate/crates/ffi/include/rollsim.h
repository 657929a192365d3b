#ifndef ROLLSIM_H
#define ROLLSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum RollsimStatus {
  ROLLSIM_STATUS_OK = 0,
  ROLLSIM_STATUS_NULL_POINTER = 1,
  // Invalid scenario, parse failure, or an unmet precondition.
  ROLLSIM_STATUS_VALIDATION = 2,
  // Singular mass matrix, divergence, step underflow or a failed
  // implicit step.
  ROLLSIM_STATUS_NUMERICAL = 3,
  // Step budget exhausted.
  ROLLSIM_STATUS_BUDGET = 4,
  ROLLSIM_STATUS_IO = 5,
  ROLLSIM_STATUS_INVALID_ARGUMENT = 6,
  ROLLSIM_STATUS_BUFFER_TOO_SMALL = 7,
  ROLLSIM_STATUS_PANIC = 8,
} RollsimStatus;

typedef enum RollsimMethod {
  ROLLSIM_METHOD_RK4 = 0,
  ROLLSIM_METHOD_RK45 = 1,
  ROLLSIM_METHOD_IMPLICIT_TRAP = 2,
} RollsimMethod;

// A validated scenario together with its built model.
typedef struct RollsimScenario RollsimScenario;

// Samples of a completed run.
typedef struct RollsimTrajectory RollsimTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rollsim_version(void);

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to fit) and return the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to at least `len` writable bytes.
size_t rollsim_last_error(char *buf, size_t len);

// Parse and validate a scenario from TOML text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum RollsimStatus rollsim_scenario_from_toml(const char *text, struct RollsimScenario **out);

// Load a scenario file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum RollsimStatus rollsim_scenario_from_file(const char *path, struct RollsimScenario **out);

// Load one of the scenarios shipped with the library by name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum RollsimStatus rollsim_scenario_bundled(const char *name, struct RollsimScenario **out);

// Release a scenario. Null is ignored.
//
// # Safety
// `sc` must come from this library and not be used afterwards.
void rollsim_scenario_free(struct RollsimScenario *sc);

// Length of the system state vector.
//
// # Safety
// `sc` must be a live scenario handle and `out` a valid pointer.
enum RollsimStatus rollsim_scenario_state_dim(const struct RollsimScenario *sc, size_t *out);

// Copy the initial state into `buf`.
//
// # Safety
// `sc` must be a live scenario handle and `buf` must hold `len` doubles.
enum RollsimStatus rollsim_scenario_initial_state(const struct RollsimScenario *sc,
                                                  double *buf,
                                                  size_t len);

// Evaluate the right-hand side of the equations of motion at `(t, x)`.
// Both `x` and `dx` have `n` elements, which must equal the state length.
//
// # Safety
// `sc` must be a live scenario handle; `x` and `dx` must hold `n` doubles.
enum RollsimStatus rollsim_scenario_rhs(const struct RollsimScenario *sc,
                                        double t,
                                        const double *x,
                                        double *dx,
                                        size_t n);

// Override the integration method.
//
// # Safety
// `sc` must be a live scenario handle.
enum RollsimStatus rollsim_scenario_set_method(struct RollsimScenario *sc,
                                               enum RollsimMethod method);

// Override the absolute and relative tolerances.
//
// # Safety
// `sc` must be a live scenario handle.
enum RollsimStatus rollsim_scenario_set_tolerances(struct RollsimScenario *sc,
                                                   double atol,
                                                   double rtol);

// Override the number of output samples (at least 2).
//
// # Safety
// `sc` must be a live scenario handle.
enum RollsimStatus rollsim_scenario_set_samples(struct RollsimScenario *sc, size_t samples);

// Integrate the scenario.
//
// # Safety
// `sc` must be a live scenario handle and `out` a valid pointer.
enum RollsimStatus rollsim_simulate(const struct RollsimScenario *sc,
                                    struct RollsimTrajectory **out);

// Integrate and write the run directory `<root>/<scenario name>/`.
//
// # Safety
// `sc` must be a live scenario handle and `root` a NUL-terminated string.
enum RollsimStatus rollsim_run_to_dir(const struct RollsimScenario *sc, const char *root);

// Number of samples.
//
// # Safety
// `tr` must be a live trajectory handle.
size_t rollsim_trajectory_len(const struct RollsimTrajectory *tr);

// State length of each sample.
//
// # Safety
// `tr` must be a live trajectory handle.
size_t rollsim_trajectory_dim(const struct RollsimTrajectory *tr);

// Accepted steps, rejected steps and right-hand side evaluations.
//
// # Safety
// `tr` must be a live trajectory handle; the outputs must be valid pointers.
enum RollsimStatus rollsim_trajectory_stats(const struct RollsimTrajectory *tr,
                                            size_t *steps,
                                            size_t *rejected,
                                            size_t *rhs_evals);

// Copy the sample times (`len` elements).
//
// # Safety
// `tr` must be a live trajectory handle and `buf` must hold `len` doubles.
enum RollsimStatus rollsim_trajectory_times(const struct RollsimTrajectory *tr,
                                            double *buf,
                                            size_t len);

// Copy the states row by row (`len * dim` elements).
//
// # Safety
// `tr` must be a live trajectory handle and `buf` must hold `len` doubles.
enum RollsimStatus rollsim_trajectory_states(const struct RollsimTrajectory *tr,
                                             double *buf,
                                             size_t len);

// Release a trajectory. Null is ignored.
//
// # Safety
// `tr` must come from this library and not be used afterwards.
void rollsim_trajectory_free(struct RollsimTrajectory *tr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROLLSIM_H */
