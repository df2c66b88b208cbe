/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef ASYNCLOCAL_H
#define ASYNCLOCAL_H

#include <stdbool.h>
#include <stdint.h>
#include <stddef.h>

/**
 * Result code of every fallible call.
 */
typedef enum AlStatus {
  AL_STATUS_OK = 0,
  AL_STATUS_NULL_POINTER = 1,
  /**
   * Malformed string, spec or parameter.
   */
  AL_STATUS_INVALID_ARGUMENT = 2,
  AL_STATUS_UNKNOWN_ALGORITHM = 3,
  /**
   * The algorithm failed during execution.
   */
  AL_STATUS_ENGINE = 4,
  /**
   * The node has not decided.
   */
  AL_STATUS_UNDECIDED = 5,
  AL_STATUS_NOT_PRIME = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  AL_STATUS_INTERNAL = 7,
} AlStatus;

/**
 * A built graph.
 */
typedef struct AlGraph AlGraph;

/**
 * A finished execution and its trace.
 */
typedef struct AlRun AlRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *al_last_error(void);

/**
 * Library version as a static string.
 */
const char *al_version(void);

/**
 * Builds a graph from a shape such as `cycle:9`. `ids` may be null; a
 * `bound` of 0 keeps the default identifier bound.
 *
 * # Safety
 * `spec` must be a NUL-terminated string, `ids` null or valid for `n_ids`
 * reads, and `out` valid for one write.
 */
enum AlStatus al_graph_new(const char *spec,
                           const uint64_t *ids,
                           uintptr_t n_ids,
                           uint64_t bound,
                           struct AlGraph **out);

/**
 * Builds a graph from its JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for one write.
 */
enum AlStatus al_graph_from_json(const char *json, struct AlGraph **out);

/**
 * Number of nodes; 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
uintptr_t al_graph_len(const struct AlGraph *graph);

/**
 * # Safety
 * `graph` must be null or a handle not freed before.
 */
void al_graph_free(struct AlGraph *graph);

/**
 * Executes a registered algorithm. `delta` 0 means the maximum degree;
 * `sched` is `sync` or `random:seed=S,p=P,crash=R`.
 *
 * # Safety
 * `graph` must be a live handle, `algo` and `sched` NUL-terminated strings,
 * and `out` valid for one write.
 */
enum AlStatus al_run(const struct AlGraph *graph,
                     const char *algo,
                     uint64_t delta,
                     const char *sched,
                     uint64_t max_steps,
                     struct AlRun **out);

/**
 * # Safety
 * `run` must be null or a handle not freed before.
 */
void al_run_free(struct AlRun *run);

/**
 * Whether every activated, non-crashed node decided.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
bool al_run_is_complete(const struct AlRun *run);

/**
 * Largest per-node runtime.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
uint64_t al_run_max_runtime(const struct AlRun *run);

/**
 * Output of `node`. Integer outputs set `*a` and leave `*is_pair` false;
 * pair outputs set both `*a` and `*b`.
 *
 * # Safety
 * `run` must be a live handle and the out pointers valid for one write.
 */
enum AlStatus al_run_decision(const struct AlRun *run,
                              uint64_t node,
                              uint64_t *a,
                              uint64_t *b,
                              bool *is_pair);

/**
 * Runs one named check (`proper`, `palette`, `termination`, `parity`).
 *
 * # Safety
 * `run` must be a live handle, `check` a NUL-terminated string and `pass`
 * valid for one write.
 */
enum AlStatus al_run_check(const struct AlRun *run, const char *check, bool *pass);

/**
 * The trace as newline-delimited JSON. Free with [`al_string_free`].
 *
 * # Safety
 * `run` must be a live handle and `out` valid for one write.
 */
enum AlStatus al_run_trace_json(const struct AlRun *run, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not freed before.
 */
void al_string_free(char *s);

/**
 * Reproduces a golden execution, `table1` or `table2`.
 *
 * # Safety
 * `table` must be a NUL-terminated string and `pass` valid for one write.
 */
enum AlStatus al_repro(const char *table, bool *pass);

/**
 * Constructs the `k`-cover-free family with at least `m` sets and checks it exhaustively.
 *
 * # Safety
 * `pass` must be valid for one write.
 */
enum AlStatus al_coverfree_verify(uint64_t k, uint64_t m, bool *pass);

/**
 * Checks `C(n, m) = 0 mod n` for `1 <= m < n`; `n` must be prime.
 *
 * # Safety
 * `pass` must be valid for one write.
 */
enum AlStatus al_wsb_binom(uint64_t n, bool *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASYNCLOCAL_H */
