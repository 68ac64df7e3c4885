#ifndef SUPPLYKG_H
#define SUPPLYKG_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum SkgStatus {
  SKG_STATUS_OK = 0,
  SKG_STATUS_NULL_POINTER = 1,
  SKG_STATUS_INVALID_ARGUMENT = 2,
  SKG_STATUS_IO = 3,
  SKG_STATUS_PARSE = 4,
  SKG_STATUS_CONFORMANCE = 5,
  SKG_STATUS_UNKNOWN_ENTITY = 6,
  SKG_STATUS_SINGLE_CLASS = 7,
  SKG_STATUS_INCOMPATIBLE = 8,
  SKG_STATUS_NUMERICAL = 9,
  SKG_STATUS_PANIC = 10,
} SkgStatus;

/**
 * Edge direction for neighbour queries.
 */
typedef enum SkgDirection {
  SKG_DIRECTION_FORWARD = 0,
  SKG_DIRECTION_REVERSE = 1,
} SkgDirection;

/**
 * Opaque knowledge graph handle.
 */
typedef struct SkgGraph SkgGraph;

/**
 * Opaque trained model handle.
 */
typedef struct SkgModel SkgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *skg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *skg_version(void);

/**
 * Creates an empty graph.
 */
struct SkgGraph *skg_graph_new(void);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `graph` must come from this library and not be used afterwards.
 */
void skg_graph_free(struct SkgGraph *graph);

/**
 * Loads a graph file into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkgStatus skg_graph_load(const char *path, struct SkgGraph **out);

/**
 * Writes a graph file.
 *
 * # Safety
 * `graph` must be a live handle and `path` a NUL-terminated string.
 */
enum SkgStatus skg_graph_save(const struct SkgGraph *graph, const char *path);

/**
 * Adds (or finds) an entity and stores its id in `*out_id`.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum SkgStatus skg_graph_add_entity(struct SkgGraph *graph,
                                    const char *entity_type,
                                    const char *label,
                                    uint32_t *out_id);

/**
 * Adds a triplet; `*out_added` is false when it was already present.
 *
 * # Safety
 * Pointers must be valid; `relation` NUL-terminated. `out_added` may be NULL.
 */
enum SkgStatus skg_graph_add_triplet(struct SkgGraph *graph,
                                     uint32_t source,
                                     const char *relation,
                                     uint32_t destination,
                                     bool *out_added);

/**
 * Number of entities, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t skg_graph_entity_count(const struct SkgGraph *graph);

/**
 * Number of triplets, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t skg_graph_triplet_count(const struct SkgGraph *graph);

/**
 * Number of triplets of one relation.
 *
 * # Safety
 * Pointers must be valid; `relation` NUL-terminated.
 */
enum SkgStatus skg_graph_relation_count(const struct SkgGraph *graph,
                                        const char *relation,
                                        size_t *out_count);

/**
 * Copies up to `capacity` neighbour ids into `buffer` and stores the full
 * neighbour count in `*out_len`. Pass `capacity` 0 to query the size.
 *
 * # Safety
 * `buffer` must hold `capacity` elements (may be NULL when 0).
 */
enum SkgStatus skg_graph_neighbors(const struct SkgGraph *graph,
                                   uint32_t node,
                                   const char *relation,
                                   enum SkgDirection direction,
                                   uint32_t *buffer,
                                   size_t capacity,
                                   size_t *out_len);

/**
 * Recomputes both derived relations with the given thresholds. Counts of
 * derived edges are written to the optional out pointers.
 *
 * # Safety
 * `graph` must be a live handle; out pointers may be NULL.
 */
enum SkgStatus skg_graph_derive(struct SkgGraph *graph,
                                uint32_t cooccurrence_threshold,
                                uint32_t projection_threshold,
                                size_t *out_capability_produces,
                                size_t *out_complimentary);

/**
 * Generates a synthetic graph with default settings except for the given
 * company count, planted strength `lambda` and seed.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SkgStatus skg_synth_generate(size_t companies,
                                  double lambda,
                                  uint64_t seed,
                                  struct SkgGraph **out);

/**
 * Exact ROC AUC of `n` scores against 0/1 labels.
 *
 * # Safety
 * `scores` and `labels` must each hold `n` elements.
 */
enum SkgStatus skg_auc(const double *scores, const uint8_t *labels, size_t n, double *out_auc);

/**
 * Loads model parameters from a checkpoint file.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` valid.
 */
enum SkgStatus skg_model_load(const char *path, struct SkgModel **out);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void skg_model_free(struct SkgModel *model);

/**
 * Embedding width of a model, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t skg_model_dim(const struct SkgModel *model);

/**
 * Probabilities for `n` triplets given as parallel arrays, encoded over
 * `graph` with neighbour fan-out `fanout` and sampling seed `seed`.
 *
 * # Safety
 * Array arguments must each hold `n` elements; `relations` holds `n`
 * NUL-terminated tags.
 */
enum SkgStatus skg_model_score(const struct SkgModel *model,
                               const struct SkgGraph *graph,
                               const uint32_t *sources,
                               const char *const *relations,
                               const uint32_t *destinations,
                               size_t n,
                               size_t fanout,
                               uint64_t seed,
                               double *out_probabilities);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPPLYKG_H */
