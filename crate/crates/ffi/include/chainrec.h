#ifndef CHAINREC_H
#define CHAINREC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Outcome of an API call.
typedef enum ChainrecStatus {
  CHAINREC_STATUS_OK = 0,
  CHAINREC_STATUS_NULL_POINTER = 1,
  CHAINREC_STATUS_INVALID_UTF8 = 2,
  // Bad input: config, parameters, points outside the domain.
  CHAINREC_STATUS_VALIDATION = 3,
  // The computation itself failed.
  CHAINREC_STATUS_ANALYSIS = 4,
  // A box or component index past the end.
  CHAINREC_STATUS_OUT_OF_RANGE = 5,
  CHAINREC_STATUS_PANIC = 6,
} ChainrecStatus;

// Chain graph decomposition and basin partition at one resolution.
typedef struct ChainrecAnalysis ChainrecAnalysis;

// A dynamical system.
typedef struct ChainrecSystem ChainrecSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *chainrec_version(void);

// Message for the last failed call on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *chainrec_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and must not be used afterwards.
void chainrec_string_free(char *s);

// Builds a system from a TOML fragment such as
// `type = "builtin"` / `name = "logistic"` / `params = { r = 3.2 }`.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum ChainrecStatus chainrec_system_from_toml(const char *toml, struct ChainrecSystem **out);

// Releases a system. Null is ignored.
//
// # Safety
// `sys` must come from [`chainrec_system_from_toml`] and not be used afterwards.
void chainrec_system_free(struct ChainrecSystem *sys);

// Dimension of the phase space (1 or 2).
//
// # Safety
// `sys` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_system_dim(const struct ChainrecSystem *sys, size_t *out);

// Evaluates the map at `x[0..dim]` and writes the image to `out[0..dim]`.
//
// # Safety
// `x` and `out` must point to `dim` doubles.
enum ChainrecStatus chainrec_system_evaluate(const struct ChainrecSystem *sys,
                                             const double *x,
                                             size_t dim,
                                             double *out);

// Grid of `2^depth` boxes per axis, chain graph at tolerance `delta`
// (a negative `delta` means one box width), decomposition and basins.
//
// # Safety
// `sys` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_new(const struct ChainrecSystem *sys,
                                          uint32_t depth,
                                          double delta,
                                          struct ChainrecAnalysis **out);

// Releases an analysis. Null is ignored.
//
// # Safety
// `a` must come from [`chainrec_analysis_new`] and not be used afterwards.
void chainrec_analysis_free(struct ChainrecAnalysis *a);

// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_box_count(const struct ChainrecAnalysis *a, size_t *out);

// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_component_count(const struct ChainrecAnalysis *a,
                                                      size_t *out);

// Number of terminal components.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_terminal_count(const struct ChainrecAnalysis *a, size_t *out);

// Component containing box `b`.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_component_of(const struct ChainrecAnalysis *a,
                                                   uint32_t b,
                                                   uint32_t *out);

// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_is_terminal(const struct ChainrecAnalysis *a,
                                                  uint32_t c,
                                                  bool *out);

// Period of a cyclic component; `Validation` for an acyclic one.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_period(const struct ChainrecAnalysis *a,
                                             uint32_t c,
                                             uint32_t *out);

// Terminal component whose basin holds box `b`, or -1 when ambiguous.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_basin_of(const struct ChainrecAnalysis *a,
                                               uint32_t b,
                                               int64_t *out);

// Fraction of boxes with a unique terminal basin.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_v_fraction(const struct ChainrecAnalysis *a, double *out);

// Condensation graph in DOT. Free the result with [`chainrec_string_free`].
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum ChainrecStatus chainrec_analysis_dot(const struct ChainrecAnalysis *a, char **out);

// Runs a full analysis config and returns the JSON report. Analyses that
// fail are listed in the report's `errors` and give `Analysis`; the report
// is still returned. Free it with [`chainrec_string_free`].
//
// # Safety
// `config` must be a NUL-terminated string; `out_json` must be writable.
enum ChainrecStatus chainrec_run_config(const char *config, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINREC_H */
