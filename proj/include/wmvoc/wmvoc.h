// Copyright 2026 The WMVoc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// C interface to the wmvoc library. All objects are opaque handles owned by
// the caller and released with the matching *_free function. Every fallible
// call returns a wmv_status; on failure wmv_last_error() describes the
// problem until the next call on the same thread.

#ifndef WMVOC_WMVOC_H_
#define WMVOC_WMVOC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(WMV_BUILDING_LIBRARY)
#define WMV_API __attribute__((visibility("default")))
#else
#define WMV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wmv_status {
  WMV_OK = 0,
  WMV_ERR_INVALID_ARGUMENT = 1,
  WMV_ERR_CONFIG = 2,
  WMV_ERR_IO = 3,
  WMV_ERR_FORMAT = 4,
  WMV_ERR_SHAPE = 5,
  WMV_ERR_NUMERICAL = 6,
  WMV_ERR_FINGERPRINT = 7,
  WMV_ERR_INTERNAL = 8,
} wmv_status;

typedef struct wmv_vocab wmv_vocab;
typedef struct wmv_features wmv_features;
typedef struct wmv_options wmv_options;
typedef struct wmv_model wmv_model;
typedef struct wmv_report wmv_report;
typedef struct wmv_predictions wmv_predictions;

WMV_API const char* wmv_last_error(void);
WMV_API const char* wmv_status_name(wmv_status status);
// Process exit code for a status: 0 ok, 2 usage or configuration,
// 3 data or format, 4 numerical failure.
WMV_API int wmv_exit_code(wmv_status status);

/* Vocabulary. */

typedef enum wmv_vector_format { WMV_VECTORS_TEXT = 0, WMV_VECTORS_BINARY = 1 } wmv_vector_format;

WMV_API wmv_status wmv_vocab_load(const char* path, wmv_vector_format format, int normalize,
                                  int has_header, wmv_vocab** out);
WMV_API void wmv_vocab_free(wmv_vocab* vocab);
WMV_API size_t wmv_vocab_size(const wmv_vocab* vocab);
WMV_API int wmv_vocab_dim(const wmv_vocab* vocab);
WMV_API size_t wmv_vocab_duplicate_labels(const wmv_vocab* vocab);
// Row index of a label, or -1.
WMV_API int wmv_vocab_find(const wmv_vocab* vocab, const char* label);
// Source and target labels; rows are stored in ascending vocabulary order.
WMV_API wmv_status wmv_vocab_set_classes(wmv_vocab* vocab, const char* const* source,
                                         size_t n_source, const char* const* target,
                                         size_t n_target);
WMV_API size_t wmv_vocab_source_count(const wmv_vocab* vocab);
WMV_API size_t wmv_vocab_target_count(const wmv_vocab* vocab);
// Drops rows with corpus counts outside [min_count, max_count]; source and
// target rows are kept.
WMV_API wmv_status wmv_vocab_prune(wmv_vocab* vocab, const char* freq_path, int64_t min_count,
                                   int64_t max_count);
// Keeps only the source and target rows.
WMV_API wmv_status wmv_vocab_restrict_to_classes(wmv_vocab* vocab);
WMV_API wmv_status wmv_vocab_load_synsets(wmv_vocab* vocab, const char* path);
// Copies the d-vector of a label or phrase into out[0..dim).
WMV_API wmv_status wmv_vocab_lookup(const wmv_vocab* vocab, const char* phrase, double* out,
                                    size_t dim);

/* Features. */

// `labels_path` may be NULL for unlabeled data (prediction only).
WMV_API wmv_status wmv_features_load(const wmv_vocab* vocab, const char* features_path,
                                     const char* labels_path, wmv_features** out);
WMV_API void wmv_features_free(wmv_features* features);
WMV_API size_t wmv_features_count(const wmv_features* features);
WMV_API int wmv_features_dim(const wmv_features* features);

/* Training options, addressed by key (see wmv_options_describe). */

WMV_API wmv_status wmv_options_create(wmv_options** out);
WMV_API void wmv_options_free(wmv_options* options);
WMV_API wmv_status wmv_options_set(wmv_options* options, const char* key, const char* value);
WMV_API wmv_status wmv_options_validate(const wmv_options* options);
// `key = value` lines for every option; valid until the next call with
// this handle.
WMV_API const char* wmv_options_describe(wmv_options* options);

/* Models. */

WMV_API wmv_status wmv_train(const wmv_vocab* vocab, const wmv_features* train,
                             const wmv_options* options, wmv_model** out);
WMV_API void wmv_model_free(wmv_model* model);
WMV_API wmv_status wmv_model_save(const wmv_model* model, const char* path);
WMV_API wmv_status wmv_model_load(const char* path, wmv_model** out);
// Training trace lines; empty for a loaded model.
WMV_API const char* wmv_model_trace(const wmv_model* model);
WMV_API void wmv_model_shape(const wmv_model* model, int* rows, int* cols);
// Copies W row-major into out[0..rows*cols).
WMV_API wmv_status wmv_model_weights_matrix(const wmv_model* model, double* out, size_t n);
WMV_API size_t wmv_model_class_count(const wmv_model* model);
WMV_API const char* wmv_model_class_label(const wmv_model* model, size_t i);
WMV_API double wmv_model_class_weight(const wmv_model* model, size_t i);
// Fails with WMV_ERR_FINGERPRINT when the vocabulary's source classes
// differ from training. *same_vocab tells whether the whole vocabulary is
// unchanged.
WMV_API wmv_status wmv_model_check(const wmv_model* model, const wmv_vocab* vocab,
                                   int* same_vocab);

/* Evaluation and prediction. */

// `settings` names: supervised, zsl, gzsl, openset. `config_text` holds
// `key = value` lines echoed into the report and may be NULL.
WMV_API wmv_status wmv_evaluate(const wmv_model* model, const wmv_vocab* vocab,
                                const wmv_features* test, const char* const* settings,
                                size_t n_settings, const int* top_k, size_t n_top_k,
                                int threads, const char* config_text, wmv_report** out);
WMV_API void wmv_report_free(wmv_report* report);
WMV_API const char* wmv_report_text(const wmv_report* report);
WMV_API const char* wmv_report_dump(const wmv_report* report);
// Metric lookup: keys top1, top5, ..., acc_u_to_t, acc_s_to_t,
// harmonic_mean, ausuc, fpr, openness.
WMV_API wmv_status wmv_report_metric(const wmv_report* report, const char* setting,
                                     const char* key, double* out);

WMV_API wmv_status wmv_predict(const wmv_model* model, const wmv_vocab* vocab,
                               const wmv_features* features, const char* setting, int k,
                               int threads, wmv_predictions** out);
WMV_API void wmv_predictions_free(wmv_predictions* predictions);
WMV_API const char* wmv_predictions_text(const wmv_predictions* predictions);

/* Synthetic benchmark. */

typedef struct wmv_synth_spec {
  uint64_t seed;
  int n_source;
  int n_target;
  int n_distractors;
  int d;
  int p;
  int instances_per_class;
  int test_instances_per_class;
  double noise_sigma;
  double map_condition;
  double min_angle_deg;
} wmv_synth_spec;

WMV_API void wmv_synth_spec_default(wmv_synth_spec* spec);
// Writes vocab.txt, train.feat, train.labels, test.feat, test.labels,
// source.classes and target.classes into `dir`.
WMV_API wmv_status wmv_synth_generate(const wmv_synth_spec* spec, const char* dir,
                                      int binary_features);

/* Weibull fitting. */

typedef struct wmv_weibull_result {
  double kappa;  // +inf for the step fit
  double lambda;
  double margin_radius;
  double coverage_radius;
  int infinite_shape;
} wmv_weibull_result;

// Identical samples fall back to the step fit at the common value.
WMV_API wmv_status wmv_fit_weibull(const double* samples, size_t n, double significance,
                                   wmv_weibull_result* out);

#ifdef __cplusplus
}
#endif

#endif  // WMVOC_WMVOC_H_
