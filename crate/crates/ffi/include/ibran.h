#ifndef IBRAN_H
#define IBRAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IbranDirection {
  IBRAN_DIRECTION_UL = 0,
  IBRAN_DIRECTION_DL = 1,
} IbranDirection;

typedef enum IbranStatus {
  IBRAN_STATUS_OK = 0,
  IBRAN_STATUS_NULL_POINTER = 1,
  IBRAN_STATUS_INVALID_UTF8 = 2,
  IBRAN_STATUS_CONFIG = 3,
  IBRAN_STATUS_DATASET = 4,
  IBRAN_STATUS_IO = 5,
  IBRAN_STATUS_PROVIDER = 6,
  IBRAN_STATUS_INVARIANT = 7,
  IBRAN_STATUS_INVALID_ARGUMENT = 8,
  IBRAN_STATUS_PANIC = 99,
} IbranStatus;

// Scenario configuration: TOML text plus `key=value` overrides.
typedef struct IbranConfig IbranConfig;

typedef struct IbranEpisode IbranEpisode;

// Per-direction episode KPIs. Undefined values are NaN.
typedef struct IbranKpi {
  double pdr;
  double throughput_bps;
  double latency_ms;
  double jitter_ms;
  double prb_usage_pct;
  double decision_time_us;
  double candidate_set_mean;
  double iss_mean;
} IbranKpi;

typedef struct IbranItem {
  uint16_t rnti;
  double utility;
  uint32_t demand;
  bool relevant;
} IbranItem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *ibran_last_error(void);

// Library version as a static NUL-terminated string.
const char *ibran_version(void);

// Parse a scenario from TOML text. `toml` may be NULL for the defaults.
//
// # Safety
// `toml` must be NULL or a NUL-terminated string; `out` must be writable.
enum IbranStatus ibran_config_new(const char *toml, struct IbranConfig **out);

// Override one key, e.g. `("episode_s", "0.5")`. The config is unchanged on error.
//
// # Safety
// `cfg` must come from [`ibran_config_new`]; `key` and `value` must be NUL-terminated.
enum IbranStatus ibran_config_set(struct IbranConfig *cfg, const char *key, const char *value);

// # Safety
// `cfg` must be NULL or come from [`ibran_config_new`], and not be used afterwards.
void ibran_config_free(struct IbranConfig *cfg);

// Run one episode with the surrogate embedding provider.
//
// # Safety
// `cfg` must come from [`ibran_config_new`]; `out` must be writable.
enum IbranStatus ibran_run_episode(const struct IbranConfig *cfg,
                                   uint64_t seed,
                                   struct IbranEpisode **out);

// KPIs of one direction of a finished episode.
//
// # Safety
// `ep` must come from [`ibran_run_episode`]; `out` must be writable.
enum IbranStatus ibran_episode_kpi(const struct IbranEpisode *ep,
                                   enum IbranDirection direction,
                                   struct IbranKpi *out);

// Number of simulated TTIs, or 0 for a NULL handle.
//
// # Safety
// `ep` must be NULL or come from [`ibran_run_episode`].
uint64_t ibran_episode_ttis(const struct IbranEpisode *ep);

// Object ID requested by the episode's intent, or 0 for a NULL handle.
//
// # Safety
// `ep` must be NULL or come from [`ibran_run_episode`].
uint32_t ibran_episode_intent_object(const struct IbranEpisode *ep);

// # Safety
// `ep` must be NULL or come from [`ibran_run_episode`], and not be used afterwards.
void ibran_episode_free(struct IbranEpisode *ep);

// Intent Satisfaction Score of one flow.
double ibran_iss(double score, bool relevant, double f_min);

// Gaussian-window SSIM of two 8-bit grayscale images of `width` x `height`.
//
// # Safety
// `a` and `b` must each point to `width * height` bytes; `out` must be writable.
enum IbranStatus ibran_ssim(const uint8_t *a,
                            const uint8_t *b,
                            size_t width,
                            size_t height,
                            double *out);

// Greedy density knapsack over `n` items with capacity `b_max`. Writes 1 to
// `selected[i]` for each chosen item and 0 otherwise.
//
// # Safety
// `items` and `selected` must each point to `n` elements; `total_utility` may be NULL.
enum IbranStatus ibran_greedy_select(const struct IbranItem *items,
                                     size_t n,
                                     uint32_t b_max,
                                     uint8_t *selected,
                                     double *total_utility);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IBRAN_H */
