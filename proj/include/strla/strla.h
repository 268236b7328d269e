/* C interface to the strla engine: datasets, configuration, training,
 * checkpoints, evaluation and gradient checks.
 *
 * Every fallible call returns a strla_status. On failure the message is
 * available from strla_last_error() on the calling thread until the next
 * call on that thread. Strings returned through char** out-parameters are
 * owned by the caller and released with strla_string_free(). */
#ifndef STRLA_STRLA_H
#define STRLA_STRLA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define STRLA_API __declspec(dllexport)
#else
#define STRLA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum strla_status {
  STRLA_OK = 0,
  STRLA_ERR_SYNTAX = 1,
  STRLA_ERR_UNSUPPORTED = 2,
  STRLA_ERR_SHAPE_MISMATCH = 3,
  STRLA_ERR_NON_FINITE = 4,
  STRLA_ERR_NON_SCALAR_LOSS = 5,
  STRLA_ERR_LABEL_OUT_OF_RANGE = 6,
  STRLA_ERR_UNKNOWN_TEMPLATE = 7,
  STRLA_ERR_CONFIG = 8,
  STRLA_ERR_IO = 9,
  STRLA_ERR_VERSION_MISMATCH = 10,
  STRLA_ERR_FOLD_TOO_SMALL = 11,
  STRLA_ERR_MISSING_COLUMN = 12,
  STRLA_ERR_TYPE_COERCION = 13,
  STRLA_ERR_LABEL_MISMATCH = 14,
  STRLA_ERR_INTERNAL = 15,
  STRLA_ERR_INVALID_ARGUMENT = 16
} strla_status;

typedef struct strla_dataset strla_dataset;
typedef struct strla_config strla_config;
typedef struct strla_model strla_model;

STRLA_API const char* strla_version(void);
STRLA_API const char* strla_status_name(strla_status status);
STRLA_API const char* strla_last_error(void);
STRLA_API void strla_string_free(char* s);

/* Datasets (JSON-lines, one {"input": ..., "label": ...} per line). With
 * xml != 0 the input field holds an XML document string. */
STRLA_API strla_status strla_dataset_read(const char* path, int xml, strla_dataset** out);
/* Converts a CSV table with a schema template; rebalance != 0 undersamples a
 * class holding more than 80% of rows to a 2:1 split. */
STRLA_API strla_status strla_dataset_convert(const char* table_path, const char* schema_path, int rebalance,
                                             uint64_t seed, strla_dataset** out);
STRLA_API strla_status strla_dataset_write(const strla_dataset* ds, const char* path);
STRLA_API size_t strla_dataset_size(const strla_dataset* ds);
STRLA_API void strla_dataset_free(strla_dataset* ds);

/* Writes poker-hand CSV tables: a training table with the class counts of
 * the public training split and `test_size` uniformly random test hands. */
STRLA_API strla_status strla_poker_generate(const char* train_csv, const char* test_csv, size_t test_size,
                                            uint64_t seed);

/* Experiment configuration. Values applied later override earlier ones;
 * strla_config_validate checks the merged result. */
STRLA_API strla_status strla_config_new(strla_config** out);
STRLA_API strla_status strla_config_apply_file(strla_config* config, const char* path);
STRLA_API strla_status strla_config_apply_json(strla_config* config, const char* json);
STRLA_API strla_status strla_config_to_json(const strla_config* config, char** out);
STRLA_API strla_status strla_config_validate(const strla_config* config);
STRLA_API void strla_config_free(strla_config* config);

/* Called after each fold or run with a one-line JSON summary (including the
 * loss curve) and the trained model, which is only valid during the call. */
typedef void (*strla_fold_callback)(const char* fold_json, const strla_model* model, void* user);

STRLA_API strla_status strla_cross_validate(const strla_dataset* ds, const strla_config* config,
                                            const char* dataset_name, strla_fold_callback callback, void* user,
                                            char** metrics_json);
STRLA_API strla_status strla_fraction_runs(const strla_dataset* train, const strla_dataset* test,
                                           const strla_config* config, double fraction, int runs,
                                           const char* dataset_name, strla_fold_callback callback, void* user,
                                           char** metrics_json);
/* Trains on the whole dataset. fold_json (optional) receives the summary. */
STRLA_API strla_status strla_train(const strla_dataset* ds, const strla_config* config, strla_model** out,
                                   char** fold_json);

STRLA_API strla_status strla_model_save(const strla_model* model, const char* path, int with_optimizer);
STRLA_API strla_status strla_model_load(const char* path, strla_model** out);
STRLA_API void strla_model_free(strla_model* model);

/* Accuracy and confusion matrix as a metrics JSON document. */
STRLA_API strla_status strla_evaluate(const strla_model* model, const strla_dataset* ds, int threads,
                                      const char* dataset_name, char** metrics_json);
/* Predicted label for one JSON (or, for XML models, XML) document. */
STRLA_API strla_status strla_predict(const strla_model* model, const char* document, char** label);

/* Finite-difference gradient check of one model kind (set, lstm, tailored,
 * xml, mlp). corrupt_backward deliberately breaks one backward rule. */
STRLA_API strla_status strla_gradcheck(const char* kind, uint64_t seed, int corrupt_backward, double* max_rel_error,
                                       char** report_json);

#ifdef __cplusplus
}
#endif

#endif
