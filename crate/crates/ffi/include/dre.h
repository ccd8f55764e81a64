#ifndef DRE_H
#define DRE_H

/* Generated by the build script; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum DreStatus {
  DRE_STATUS_OK = 0,
  DRE_STATUS_INVALID_MODEL = 1,
  DRE_STATUS_CONDITION_FAILED = 2,
  DRE_STATUS_INVALID_INPUT = 3,
  DRE_STATUS_PARSE_ERROR = 4,
  DRE_STATUS_IO_ERROR = 5,
  DRE_STATUS_RESOURCE_LIMIT = 6,
  DRE_STATUS_NULL_POINTER = 7,
  DRE_STATUS_PANIC = 8,
} DreStatus;

typedef struct DreCluster DreCluster;

typedef struct DreField DreField;

typedef struct DreModel DreModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message from the most recent failing call on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *dre_last_error(void);

// Static toolkit version string.
const char *dre_version(void);

// Two-valued model: all positive arrows with probability p, all negative
// arrows otherwise.
//
// # Safety
// `p` must be a NUL-terminated decimal string; `out` must be valid.
enum DreStatus dre_model_orthant(uint32_t dim, const char *p, struct DreModel **out);

// Two-valued model: all positive arrows with probability p, every arrow
// otherwise.
//
// # Safety
// `p` must be a NUL-terminated decimal string; `out` must be valid.
enum DreStatus dre_model_half_orthant(uint32_t dim, const char *p, struct DreModel **out);

// Build a model from TOML text (same schema as the model files).
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be valid.
enum DreStatus dre_model_from_toml(const char *text, struct DreModel **out);

// The model with every backward arrow set replaced by the full set.
//
// # Safety
// `model` must be a live handle; `out` must be valid.
enum DreStatus dre_model_starred(const struct DreModel *model, struct DreModel **out);

// Ok when the forward-drift condition holds; ConditionFailed with a
// clause report otherwise.
//
// # Safety
// `model` must be a live handle.
enum DreStatus dre_model_check_condition1(const struct DreModel *model);

// Ok when the dense-labels condition holds.
//
// # Safety
// `model` must be a live handle.
enum DreStatus dre_model_check_condition2(const struct DreModel *model);

// Lattice dimension, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
uint32_t dre_model_dim(const struct DreModel *model);

// # Safety
// `model` must be null or a handle not freed before.
void dre_model_free(struct DreModel *model);

// Seeded environment over the whole lattice.
//
// # Safety
// `model` must be a live handle; `out` must be valid.
enum DreStatus dre_field_new(const struct DreModel *model, uint64_t seed, struct DreField **out);

// Whether the site draws from the E side.
//
// # Safety
// `field` must be live; `site` must hold `site_len` readable values;
// `out` must be valid.
enum DreStatus dre_field_is_omega_plus(const struct DreField *field,
                                       const int64_t *site,
                                       uintptr_t site_len,
                                       bool *out);

// Arrow set at the site as a direction bitmask.
//
// # Safety
// `field` must be live; `site` must hold `site_len` readable values;
// `out` must be valid.
enum DreStatus dre_field_env_at(const struct DreField *field,
                                const int64_t *site,
                                uintptr_t site_len,
                                uint32_t *out);

// # Safety
// `field` must be null or a handle not freed before.
void dre_field_free(struct DreField *field);

// Sites reachable from the origin inside the box [lo, hi].
//
// # Safety
// `field` must be live; `origin`, `lo`, `hi` must each hold `len`
// readable values; `out` must be valid.
enum DreStatus dre_forward_cluster(const struct DreField *field,
                                   const int64_t *origin,
                                   const int64_t *lo,
                                   const int64_t *hi,
                                   uintptr_t len,
                                   struct DreCluster **out);

// Sites that reach the origin inside the box [lo, hi].
//
// # Safety
// `field` must be live; `origin`, `lo`, `hi` must each hold `len`
// readable values; `out` must be valid.
enum DreStatus dre_backward_cluster(const struct DreField *field,
                                    const int64_t *origin,
                                    const int64_t *lo,
                                    const int64_t *hi,
                                    uintptr_t len,
                                    struct DreCluster **out);

// Number of member sites, or 0 for a null handle.
//
// # Safety
// `cluster` must be null or a live handle.
uint64_t dre_cluster_member_count(const struct DreCluster *cluster);

// Whether the site belongs to the cluster (false outside the box).
//
// # Safety
// `cluster` must be live; `site` must hold `site_len` readable values;
// `out` must be valid.
enum DreStatus dre_cluster_contains(const struct DreCluster *cluster,
                                    const int64_t *site,
                                    uintptr_t site_len,
                                    bool *out);

// Whether the search stopped at the box wall anywhere.
//
// # Safety
// `cluster` must be live; `out` must be valid.
enum DreStatus dre_cluster_touched_boundary(const struct DreCluster *cluster, bool *out);

// Write the membership grid to a file in the toolkit's binary format.
//
// # Safety
// `cluster` must be live; `path` must be a NUL-terminated string.
enum DreStatus dre_cluster_write_grid(const struct DreCluster *cluster, const char *path);

// # Safety
// `cluster` must be null or a handle not freed before.
void dre_cluster_free(struct DreCluster *cluster);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRE_H */
