#ifndef DYNET_H
#define DYNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DynetStatus {
  DYNET_STATUS_OK = 0,
  DYNET_STATUS_NULL_POINTER = 1,
  DYNET_STATUS_INVALID_UTF8 = 2,
  DYNET_STATUS_PARSE_ERROR = 3,
  DYNET_STATUS_INVALID_ARGUMENT = 4,
  DYNET_STATUS_OUT_OF_RANGE = 5,
  DYNET_STATUS_BUFFER_TOO_SMALL = 6,
  DYNET_STATUS_PRECONDITION = 7,
  DYNET_STATUS_MODEL_VIOLATION = 8,
  DYNET_STATUS_TIMEOUT = 9,
  DYNET_STATUS_PANIC = 255,
} DynetStatus;

typedef enum DynetFamily {
  DYNET_FAMILY_SOIFER = 0,
  DYNET_FAMILY_ALTERNATING_RING = 1,
  /*
   `param` is `k`.
   */
  DYNET_FAMILY_OIT_IIT_GAP = 2,
  DYNET_FAMILY_SPLIT_HALVES = 3,
  DYNET_FAMILY_STATIC_COMPLETE = 4,
  DYNET_FAMILY_STATIC_PATH = 5,
  DYNET_FAMILY_STATIC_CYCLE = 6,
  DYNET_FAMILY_STATIC_STAR = 7,
  DYNET_FAMILY_STATIC_EMPTY = 8,
  /*
   `param` is the horizon.
   */
  DYNET_FAMILY_RANDOM_OIT1 = 9,
} DynetFamily;

typedef enum DynetMetric {
  DYNET_METRIC_OIT = 0,
  DYNET_METRIC_IIT = 1,
  DYNET_METRIC_MOI = 2,
  DYNET_METRIC_CT = 3,
  DYNET_METRIC_EDGE_PERIOD = 4,
  DYNET_METRIC_DYNAMIC_DIAMETER = 5,
} DynetMetric;

/*
 Opaque schedule handle.
 */
typedef struct DynetGraph DynetGraph;

typedef struct DynetMetricValue {
  /*
   Meaningful only when `bounded` is true.
   */
  uint64_t value;
  bool bounded;
  bool exact;
} DynetMetricValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a schedule JSON document into a new handle.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DynetStatus dynet_graph_from_json(const char *json, struct DynetGraph **out);

/*
 Builds a generator family. `param` is `k` for `OitIitGap` and the horizon
 for `RandomOit1`; it is ignored otherwise. `seed` only affects
 `RandomOit1`.

 # Safety
 `out` must be writable.
 */
enum DynetStatus dynet_graph_generate(enum DynetFamily family,
                                      size_t n,
                                      size_t param,
                                      uint64_t seed,
                                      struct DynetGraph **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `graph` must come from this library and not be used afterwards.
 */
void dynet_graph_free(struct DynetGraph *graph);

/*
 Serializes a schedule to canonical JSON.

 # Safety
 `graph` must be a live handle; `out` must be writable.
 */
enum DynetStatus dynet_graph_to_json(const struct DynetGraph *graph, char **out);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void dynet_string_free(char *s);

/*
 # Safety
 `graph` must be a live handle; `out` must be writable.
 */
enum DynetStatus dynet_graph_node_count(const struct DynetGraph *graph, size_t *out);

/*
 Copies `E(round)` into `pairs` as `u0, v0, u1, v1, ...` (1-based ids).

 `*edge_count` receives the number of edges even when `capacity` (in
 `uint32_t` slots) is too small, in which case `BufferTooSmall` is
 returned and nothing is copied. `pairs` may be null when `capacity` is 0.

 # Safety
 `graph` must be a live handle; `pairs` must hold `capacity` values;
 `edge_count` must be writable.
 */
enum DynetStatus dynet_graph_instance(const struct DynetGraph *graph,
                                      size_t round,
                                      uint32_t *pairs,
                                      size_t capacity,
                                      size_t *edge_count);

/*
 Computes one metric with search bound `k_max` (ignored by `Moi`).

 # Safety
 `graph` must be a live handle; `out` must be writable.
 */
enum DynetStatus dynet_metric(const struct DynetGraph *graph,
                              enum DynetMetric metric,
                              size_t k_max,
                              struct DynetMetricValue *out);

/*
 `|future(u, t)(t_prime)|`.

 # Safety
 `graph` must be a live handle; `out` must be writable.
 */
enum DynetStatus dynet_future_size(const struct DynetGraph *graph,
                                   uint32_t u,
                                   size_t t,
                                   size_t t_prime,
                                   size_t *out);

/*
 All metrics as JSON, `{"oit": {"value", "exact", "witness"}, ...}`.

 # Safety
 `graph` must be a live handle; `out` must be writable.
 */
enum DynetStatus dynet_metrics_json(const struct DynetGraph *graph, size_t k_max, char **out);

/*
 Runs a protocol and writes the summary JSON
 `{"all_correct", "max_halt_round", "max_msg_entries"}`.

 `request` is `{"proto": "cover-count" | "oit-count" | "ct-count" |
 "consistency", "net": {...}, "param": int, "max_rounds": int}`, with `net`
 required by `cover-count` and `consistency` and `param` (`k` or `T`) by
 the others.

 # Safety
 `graph` must be a live handle; `request` a NUL-terminated string; `out`
 writable.
 */
enum DynetStatus dynet_simulate_json(const struct DynetGraph *graph,
                                     const char *request,
                                     char **out);

/*
 Message for the most recent failed call on this thread, or `""`. The
 pointer stays valid until the next call into this library on the same
 thread.
 */
const char *dynet_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNET_H */
