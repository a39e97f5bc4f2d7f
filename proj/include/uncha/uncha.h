/* C interface to the uncha library: synthetic corpus generation, training,
 * evaluation, embedding export and gradient checking.
 *
 * Every fallible call returns an uncha_status. On failure the reason is
 * available from uncha_last_error() until the next call on the same thread.
 * Handles are opaque; each *_new / *_generate / *_load has a matching *_free.
 */
#ifndef UNCHA_H
#define UNCHA_H

#include <stddef.h>
#include <stdint.h>

#if defined(UNCHA_BUILDING_LIBRARY)
#define UNCHA_API __attribute__((visibility("default")))
#else
#define UNCHA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uncha_status {
  UNCHA_OK = 0,
  /* Precondition, configuration or input-file error. */
  UNCHA_ERR_CONTRACT = 1,
  /* Numerical-consistency failure (domain violation, non-finite loss). */
  UNCHA_ERR_NUMERICAL = 2,
  /* A verification ran to completion and failed. */
  UNCHA_ERR_CHECK_FAILED = 3
} uncha_status;

typedef struct uncha_corpus uncha_corpus;
typedef struct uncha_config uncha_config;

/* Receives one log line (no trailing newline). */
typedef void (*uncha_log_fn)(const char* line, void* user);

typedef struct uncha_generator_params {
  size_t num_scenes;
  size_t parts_per_scene;
  size_t latent_dim;
  double noise_scale;
  double scene_norm;
  double spread;
  double min_separation;
  double repr_min;
  double repr_max;
  uint64_t seed;
} uncha_generator_params;

UNCHA_API const char* uncha_version(void);

/* Message of the most recent failure on this thread, "" if none. */
UNCHA_API const char* uncha_last_error(void);

/* Short machine-readable name of a status: ok, contract, numerical, check_failed. */
UNCHA_API const char* uncha_status_name(int status);

UNCHA_API void uncha_generator_defaults(uncha_generator_params* params);
UNCHA_API int uncha_corpus_generate(const uncha_generator_params* params, uncha_corpus** out);
UNCHA_API int uncha_corpus_load(const char* path, uncha_corpus** out);
UNCHA_API int uncha_corpus_save(const uncha_corpus* corpus, const char* path);
UNCHA_API size_t uncha_corpus_num_scenes(const uncha_corpus* corpus);
UNCHA_API size_t uncha_corpus_num_parts(const uncha_corpus* corpus);
UNCHA_API void uncha_corpus_free(uncha_corpus* corpus);

/* A configuration starts at the built-in defaults. */
UNCHA_API int uncha_config_new(uncha_config** out);
UNCHA_API int uncha_config_set(uncha_config* cfg, const char* key, const char* value);
UNCHA_API int uncha_config_load_file(uncha_config* cfg, const char* path);
/* Canonical `key = value` text; valid until the handle is next modified or freed. */
UNCHA_API const char* uncha_config_text(uncha_config* cfg);
/* 16 hex digits identifying the canonical text; same lifetime rule. */
UNCHA_API const char* uncha_config_hash(uncha_config* cfg);
UNCHA_API void uncha_config_free(uncha_config* cfg);

/* Writes out_dir/metrics.jsonl, out_dir/checkpoint_<step>.json and
 * out_dir/final.json. resume may be NULL. log may be NULL. */
UNCHA_API int uncha_train(const uncha_corpus* corpus, const uncha_config* cfg, const char* out_dir,
                          const char* resume, uncha_log_fn log, void* user);

/* Evaluates a checkpoint (its stored config is used). taxonomy may be NULL
 * for the synthetic scene/part tree; out_path may be NULL to only log. */
UNCHA_API int uncha_eval(const uncha_corpus* corpus, const char* checkpoint, const char* taxonomy,
                         const char* out_path, uncha_log_fn log, void* user);

/* CSV of every embedding with radius and uncertainty. */
UNCHA_API int uncha_export(const uncha_corpus* corpus, const char* checkpoint, const char* out_csv);

/* Finite-difference check of every loss; UNCHA_ERR_CHECK_FAILED on a miss. */
UNCHA_API int uncha_check_grads(uint64_t seed, uncha_log_fn log, void* user);

#ifdef __cplusplus
}
#endif

#endif /* UNCHA_H */
