/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef HEATE_H
#define HEATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HeateAlgorithm {
  HEATE_ALGORITHM_HEATE = 0,
  HEATE_ALGORITHM_EA_OSPF = 1,
  HEATE_ALGORITHM_EA_FA = 2,
} HeateAlgorithm;

typedef enum HeateStatus {
  HEATE_STATUS_OK = 0,
  HEATE_STATUS_NULL_POINTER = 1,
  HEATE_STATUS_INVALID_UTF8 = 2,
  HEATE_STATUS_PARSE = 3,
  HEATE_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The full topology cannot carry the traffic.
   */
  HEATE_STATUS_INFEASIBLE = 5,
  HEATE_STATUS_OUT_OF_RANGE = 6,
  HEATE_STATUS_PANIC = 99,
} HeateStatus;

typedef struct HeateResult HeateResult;

typedef struct HeateTopology HeateTopology;

typedef struct HeateTraffic HeateTraffic;

/**
 * Search parameters for [`heate_run`]; start from [`heate_config_default`].
 */
typedef struct HeateConfig {
  double beta;
  double sleep_fraction;
  size_t iterations;
  bool try_next_on_failure;
} HeateConfig;

/**
 * Headline numbers of a run.
 */
typedef struct HeateSummary {
  double energy_saving_ratio;
  double max_utilization;
  size_t rounds;
  size_t removed_links;
  size_t active_links;
} HeateSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful one. Valid until the next library call on this thread.
 */
const char *heate_last_error(void);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void heate_string_free(char *s);

struct HeateConfig heate_config_default(void);

/**
 * Parses the `node` / `link` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum HeateStatus heate_topology_parse(const char *text, struct HeateTopology **out);

/**
 * # Safety
 * `topo` must come from [`heate_topology_parse`] or be NULL.
 */
void heate_topology_free(struct HeateTopology *topo);

/**
 * Node count and physical (bidirectional) link count.
 *
 * # Safety
 * `topo` must be a live topology; the out pointers must be writable.
 */
enum HeateStatus heate_topology_size(const struct HeateTopology *topo,
                                     size_t *nodes,
                                     size_t *physical_links);

/**
 * Makes exactly `count` seeded nodes SDN switches and the rest IP routers.
 *
 * # Safety
 * `topo` must be a live topology.
 */
enum HeateStatus heate_topology_place_sdn(struct HeateTopology *topo, size_t count, uint64_t seed);

/**
 * Parses `demand` lines against the node names of `topo`.
 *
 * # Safety
 * `topo` must be a live topology, `text` NUL-terminated, `out` writable.
 */
enum HeateStatus heate_traffic_parse(const struct HeateTopology *topo,
                                     const char *text,
                                     struct HeateTraffic **out);

/**
 * Seeded capacity-driven matrix.
 *
 * # Safety
 * `topo` must be a live topology; `out` must be writable.
 */
enum HeateStatus heate_traffic_generate(const struct HeateTopology *topo,
                                        double sigma_max,
                                        uint64_t seed,
                                        struct HeateTraffic **out);

/**
 * # Safety
 * `tm` must come from this library or be NULL.
 */
void heate_traffic_free(struct HeateTraffic *tm);

/**
 * Runs one algorithm. Returns [`HeateStatus::Infeasible`] if the full
 * topology cannot carry `tm` within `config.beta`.
 *
 * # Safety
 * `topo` and `tm` must be live; `out` must be writable.
 */
enum HeateStatus heate_run(const struct HeateTopology *topo,
                           const struct HeateTraffic *tm,
                           enum HeateAlgorithm algorithm,
                           struct HeateConfig config,
                           struct HeateResult **out);

/**
 * # Safety
 * `result` must come from [`heate_run`] or be NULL.
 */
void heate_result_free(struct HeateResult *result);

/**
 * # Safety
 * `result` must be live; `out` must be writable.
 */
enum HeateStatus heate_result_summary(const struct HeateResult *result, struct HeateSummary *out);

/**
 * Physical id of the `index`-th removed link, in removal order. Physical
 * link `k` is the `k`-th `link` line of the topology text.
 *
 * # Safety
 * `result` must be live; `out` must be writable.
 */
enum HeateStatus heate_result_removed_link(const struct HeateResult *result,
                                           size_t index,
                                           size_t *out);

/**
 * Final weights, one per directed link (`2k` declared direction of
 * physical link `k`, `2k + 1` reverse). Writes at most `capacity` entries
 * and always stores the full length in `len`.
 *
 * # Safety
 * `result` must be live; `weights` must hold `capacity` doubles (may be
 * NULL when `capacity` is 0); `len` must be writable.
 */
enum HeateStatus heate_result_weights(const struct HeateResult *result,
                                      double *weights,
                                      size_t capacity,
                                      size_t *len);

/**
 * Solution certificate of the final state as JSON.
 *
 * # Safety
 * `result` must be live; `out` must be writable. Free the string with
 * [`heate_string_free`].
 */
enum HeateStatus heate_result_certificate_json(const struct HeateResult *result, char **out);

/**
 * The exact model in CPLEX LP format.
 *
 * # Safety
 * `topo` and `tm` must be live; `out` must be writable. Free the string
 * with [`heate_string_free`].
 */
enum HeateStatus heate_export_lp(const struct HeateTopology *topo,
                                 const struct HeateTraffic *tm,
                                 double beta,
                                 char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEATE_H */
