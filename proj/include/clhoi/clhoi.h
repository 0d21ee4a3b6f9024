#ifndef CLHOI_CLHOI_H
#define CLHOI_CLHOI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CLHOI_API __declspec(dllexport)
#else
#define CLHOI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Every function returns a status code. On failure a human-readable message
 * is available from clhoi_last_error() on the calling thread until the next
 * call into the library. Strings returned through char** are owned by the
 * caller and released with clhoi_string_free().
 */
typedef enum clhoi_status {
  CLHOI_OK = 0,
  CLHOI_ERROR_DIMENSION = 1,
  CLHOI_ERROR_DOMAIN = 2,
  CLHOI_ERROR_USAGE = 3,
  CLHOI_ERROR_NUMERIC = 4,
  CLHOI_ERROR_DETERMINISM = 5,
  CLHOI_ERROR_CONFIG = 6,
  CLHOI_ERROR_STATE = 7,
  CLHOI_ERROR_SAMPLING = 8,
  CLHOI_ERROR_GENERATION = 9,
  CLHOI_ERROR_GEOMETRY = 10,
  CLHOI_ERROR_RANGE = 11,
  CLHOI_ERROR_IO = 12,
  CLHOI_ERROR_PARSE = 13,
  CLHOI_ERROR_LOAD = 14,
  CLHOI_ERROR_DATA = 15,
  CLHOI_ERROR_NULL_ARGUMENT = 16,
  CLHOI_ERROR_INTERNAL = 17
} clhoi_status;

typedef struct clhoi_config clhoi_config;
typedef struct clhoi_model clhoi_model;

typedef struct clhoi_train_step {
  uint64_t step;
  uint64_t epoch;
  double lr;
  double loss_context;
  double loss_i2t;
  double loss_t2i;
  double loss_soft_relation;
  double loss_total;
} clhoi_train_step;

typedef void (*clhoi_train_callback)(const clhoi_train_step* step, void* user_data);

CLHOI_API const char* clhoi_version(void);
CLHOI_API const char* clhoi_status_name(clhoi_status status);
/* Non-zero for file, parse and checkpoint-load failures. */
CLHOI_API int clhoi_status_is_io(clhoi_status status);
CLHOI_API const char* clhoi_last_error(void);
CLHOI_API void clhoi_string_free(char* str);

/* Configuration: defaults, then files and key=value overrides in call order. */
CLHOI_API clhoi_status clhoi_config_create(clhoi_config** out);
CLHOI_API void clhoi_config_destroy(clhoi_config* config);
CLHOI_API clhoi_status clhoi_config_load_file(clhoi_config* config, const char* path);
CLHOI_API clhoi_status clhoi_config_parse(clhoi_config* config, const char* text);
CLHOI_API clhoi_status clhoi_config_set(clhoi_config* config, const char* key, const char* value);
CLHOI_API clhoi_status clhoi_config_validate(const clhoi_config* config);
CLHOI_API clhoi_status clhoi_config_to_json(const clhoi_config* config, char** out_json);

/*
 * Writes <out_dir>/dictionary.txt and <out_dir>/{train,test}/{images,
 * supervision,gt}.jsonl using the config seed. out_report receives the
 * per-verb label counts as CSV text (may be NULL). threads = 0 uses every core.
 */
CLHOI_API clhoi_status clhoi_generate_corpus(const clhoi_config* config, const char* out_dir, size_t threads,
                                             char** out_report);

/*
 * Trains on <corpus_dir>/train and writes checkpoint_init.bin,
 * checkpoint_epoch<N>.bin, checkpoint.bin and train_log.csv into out_dir.
 * callback may be NULL. out_summary_json may be NULL.
 */
CLHOI_API clhoi_status clhoi_train(const clhoi_config* config, const char* corpus_dir, const char* out_dir,
                                   clhoi_train_callback callback, void* user_data, char** out_summary_json);

CLHOI_API clhoi_status clhoi_model_load(const char* checkpoint_path, clhoi_model** out);
CLHOI_API void clhoi_model_destroy(clhoi_model* model);
/* Load error unless the model dimensions of config match the checkpoint. */
CLHOI_API clhoi_status clhoi_model_check_config(const clhoi_model* model, const clhoi_config* config);
/* "spatial", "visual" or "context": how far the interaction chain runs. */
CLHOI_API clhoi_status clhoi_model_set_chain(clhoi_model* model, const char* chain);
CLHOI_API clhoi_status clhoi_model_config_json(const clhoi_model* model, char** out_json);

/*
 * Scores every image of <split_dir> (images.jsonl, gt.jsonl) and evaluates
 * Full and Role mAP. Output paths may be NULL.
 */
CLHOI_API clhoi_status clhoi_evaluate(const clhoi_model* model, const char* split_dir, double lambda, size_t threads,
                                      const char* out_json_path, const char* out_pr_csv_path,
                                      char** out_result_json);

/* Predictions JSONL for images_path; attention CSV when out_attention_path is not NULL. */
CLHOI_API clhoi_status clhoi_infer(const clhoi_model* model, const char* images_path, double lambda, size_t threads,
                                   const char* out_predictions_path, const char* out_attention_path,
                                   size_t* out_count);

/* coords_per_param = 0 checks every coordinate. */
CLHOI_API clhoi_status clhoi_gradcheck(uint64_t seed, size_t coords_per_param, int* out_passed, char** out_text,
                                       char** out_json);

/* filter: comma-separated property name substrings, NULL or "" for all. */
CLHOI_API clhoi_status clhoi_run_suite(const char* filter, size_t seed_count, uint64_t base_seed, int inject_failure,
                                       size_t threads, int* out_passed, char** out_text, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
