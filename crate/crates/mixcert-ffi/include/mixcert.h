#ifndef MIXCERT_H
#define MIXCERT_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  MIXCERT_STATUS_OK = 0,
  MIXCERT_STATUS_NULL_ARGUMENT = 1,
  MIXCERT_STATUS_INVALID_UTF8 = 2,
  MIXCERT_STATUS_PARSE_ERROR = 3,
  MIXCERT_STATUS_INFEASIBLE = 4,
  MIXCERT_STATUS_NOT_REGULAR = 5,
  MIXCERT_STATUS_HYPOTHESIS_NOT_MET = 6,
  MIXCERT_STATUS_SEARCH_FAILED = 7,
  MIXCERT_STATUS_INTERNAL_ERROR = 8,
} MixcertStatus;

/**
 * Opaque graph handle.
 */
typedef struct MixcertGraph MixcertGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse edge-list text ("u v" lines, optional `n=<count>` header and
 * "#" comments) into a graph handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be writable.
 */
MixcertStatus mixcert_graph_parse(const char *text, MixcertGraph **out);

/**
 * Generate a named construction from a descriptor such as
 * "merged_expanders:n=512,D=8,m=32,seed=7".
 *
 * # Safety
 * `descriptor` must be a valid NUL-terminated string; `out` writable.
 */
MixcertStatus mixcert_graph_generate(const char *descriptor, MixcertGraph **out);

/**
 * Release a graph handle. NULL is a no-op.
 *
 * # Safety
 * `g` must come from a mixcert constructor and not be freed twice.
 */
void mixcert_graph_free(MixcertGraph *g);

/**
 * Vertex count; 0 for NULL.
 *
 * # Safety
 * `g` must be a live handle or NULL.
 */
uint64_t mixcert_graph_vertex_count(const MixcertGraph *g);

/**
 * Edge count; 0 for NULL.
 *
 * # Safety
 * `g` must be a live handle or NULL.
 */
uint64_t mixcert_graph_edge_count(const MixcertGraph *g);

/**
 * Common degree D for regular graphs; -1 when irregular or NULL.
 *
 * # Safety
 * `g` must be a live handle or NULL.
 */
int64_t mixcert_graph_regular_degree(const MixcertGraph *g);

/**
 * Total variation distance of Q_v^t to uniform, written to `out`.
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
MixcertStatus mixcert_tv_to_uniform(const MixcertGraph *g, uint64_t v, uint64_t t, double *out);

/**
 * Least t <= t_max with TV(Q_v^t, U) < threshold; -1 when capped.
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
MixcertStatus mixcert_vertex_mixing_time(const MixcertGraph *g,
                                         uint64_t v,
                                         double threshold,
                                         uint64_t t_max,
                                         int64_t *out);

/**
 * Number of vertices with TV(Q_v^tau, U) < delta (strict).
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
MixcertStatus mixcert_well_mixing_count(const MixcertGraph *g,
                                        uint64_t tau,
                                        double delta,
                                        uint64_t *out);

/**
 * Conductance phi; `exact` forces full enumeration (n <= 26), otherwise a
 * sweep upper bound is computed.
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
MixcertStatus mixcert_conductance(const MixcertGraph *g, bool exact, double *out);

/**
 * Run a JSON request (same schema as the CLI: {"command": "...",
 * "input": "...", "params": {...}}) and hand back the JSON report. On
 * error the out string carries {"error": "..."} and the status the class.
 *
 * # Safety
 * `request_json` must be a valid NUL-terminated string; `out` writable.
 * The returned string must be released with `mixcert_string_free`.
 */
MixcertStatus mixcert_run_json(const char *request_json, char **out);

/**
 * Release a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must come from a mixcert function and not be freed twice.
 */
void mixcert_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MIXCERT_H */
