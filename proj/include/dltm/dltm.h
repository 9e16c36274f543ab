/*
 * Copyright 2026 The DLTM Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the Dynamic Labeled Topic Model library.
 *
 * Every fallible call returns a dltm_status. On failure the message is
 * available from dltm_last_error() on the calling thread until the next call.
 * Strings returned through char** are owned by the caller and released with
 * dltm_string_free. Handles are released with the matching *_free function;
 * passing NULL to a free function is a no-op. Time slots and topic ids are
 * 1-based in all file outputs.
 */

#ifndef DLTM_DLTM_H_
#define DLTM_DLTM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DLTM_BUILDING_LIBRARY)
#define DLTM_API __declspec(dllexport)
#else
#define DLTM_API __declspec(dllimport)
#endif
#else
#define DLTM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  DLTM_OK = 0,
  DLTM_ERR_INVALID_ARGUMENT = 1,
  DLTM_ERR_IO = 2,
  DLTM_ERR_DATA = 3,
  DLTM_ERR_NUMERICAL = 4,
  DLTM_ERR_INTERNAL = 5
} dltm_status;

typedef enum {
  DLTM_LOG_DEBUG = 0,
  DLTM_LOG_INFO = 1,
  DLTM_LOG_WARN = 2,
  DLTM_LOG_ERROR = 3,
  DLTM_LOG_OFF = 4
} dltm_log_level;

typedef struct dltm_corpus dltm_corpus;
typedef struct dltm_truth dltm_truth;
typedef struct dltm_model dltm_model;

DLTM_API const char* dltm_version(void);
DLTM_API const char* dltm_last_error(void);
DLTM_API void dltm_string_free(char* s);
/* Log records are key=value lines on standard error. */
DLTM_API void dltm_set_log_level(dltm_log_level level);

/* ---- corpus ---------------------------------------------------------- */

typedef struct {
  const char* stoplist_path; /* extra terms removed after stemming; may be NULL */
  int min_doc_freq;          /* default 1 */
  int min_token_length;      /* default 3 */
  int porter;                /* 1 = Porter stemming (default), 0 = none */
} dltm_preprocess_options;

typedef struct {
  int T;
  int labels;
  int vocabulary;
  size_t documents;
} dltm_corpus_info;

DLTM_API void dltm_preprocess_options_default(dltm_preprocess_options* opts);
/* Raw JSONL input. dropped (optional) receives the number of documents
 * emptied by preprocessing. */
DLTM_API dltm_status dltm_corpus_load_raw(const char* path, const dltm_preprocess_options* opts,
                                          dltm_corpus** out, size_t* dropped);
/* Canonical corpus format written by dltm_corpus_save. */
DLTM_API dltm_status dltm_corpus_load(const char* path, dltm_corpus** out);
DLTM_API dltm_status dltm_corpus_save(const dltm_corpus* corpus, const char* path);
DLTM_API dltm_status dltm_corpus_to_string(const dltm_corpus* corpus, char** out);
DLTM_API dltm_status dltm_corpus_get_info(const dltm_corpus* corpus, dltm_corpus_info* info);
DLTM_API void dltm_corpus_free(dltm_corpus* corpus);

/* CSV tables: t,label,count and t,field,count,mean,q25,q50,q75. */
DLTM_API dltm_status dltm_label_frequency_csv(const dltm_corpus* corpus, char** out);
DLTM_API dltm_status dltm_corpus_stats_csv(const dltm_corpus* corpus, char** out);

/* ---- simulation ------------------------------------------------------ */

typedef struct {
  int topics;
  double sigma2;
  double delta2;
  double a2;
  double kappa;
  uint64_t seed;
  double beta0_var; /* prior variance of the first topic slot during fitting */
} dltm_hyper;

typedef struct {
  int T;
  int labels;
  int vocabulary;
  int docs_per_slot;
  int words_per_doc;
  int labels_per_doc;
} dltm_sim_dims;

DLTM_API void dltm_hyper_default(dltm_hyper* hyper);
DLTM_API void dltm_sim_dims_default(dltm_sim_dims* dims);
DLTM_API dltm_status dltm_simulate(const dltm_hyper* hyper, const dltm_sim_dims* dims,
                                   dltm_corpus** corpus, dltm_truth** truth);
DLTM_API dltm_status dltm_truth_to_string(const dltm_truth* truth, char** out);
DLTM_API dltm_status dltm_truth_save(const dltm_truth* truth, const char* path);
DLTM_API void dltm_truth_free(dltm_truth* truth);

/* ---- inference ------------------------------------------------------- */

typedef struct {
  int max_iter;      /* default 200 */
  double rel_tol;    /* default 1e-5 */
  int threads;       /* default 1; never changes results */
  int psi_chains;    /* default 1000 */
  double psi_level;  /* default 0.95 */
} dltm_fit_options;

typedef struct {
  int iterations;
  int converged;
  double final_elbo;
  size_t trace_length;
} dltm_fit_diagnostics;

DLTM_API void dltm_fit_options_default(dltm_fit_options* opts);
DLTM_API dltm_status dltm_fit(const dltm_corpus* corpus, const dltm_hyper* hyper,
                              const dltm_fit_options* opts, dltm_model** out);
DLTM_API dltm_status dltm_model_load(const char* path, dltm_model** out);
DLTM_API dltm_status dltm_model_save(const dltm_model* model, const char* path);
DLTM_API dltm_status dltm_model_to_string(const dltm_model* model, char** out);
DLTM_API dltm_status dltm_model_get_diagnostics(const dltm_model* model,
                                                dltm_fit_diagnostics* diag);
/* Copies min(capacity, trace_length) objective values into trace. */
DLTM_API dltm_status dltm_model_get_elbo_trace(const dltm_model* model, double* trace,
                                               size_t capacity);
DLTM_API void dltm_model_free(dltm_model* model);

typedef struct {
  double kappa;  /* default 100 */
  int chains;    /* default 1000 */
  double level;  /* default 0.95 */
  uint64_t seed;
  int threads;
} dltm_psi_options;

DLTM_API void dltm_psi_options_default(dltm_psi_options* opts);
/* Label-probability posterior as CSV (t,label,mean,ci_low,ci_high) and JSON.
 * Either output pointer may be NULL. */
DLTM_API dltm_status dltm_fit_psi(const dltm_corpus* corpus, const dltm_psi_options* opts,
                                  char** csv, char** json);

/* ---- reporting ------------------------------------------------------- */

typedef struct {
  int top_k;               /* default 10 */
  const char* names_path;  /* "topic=name" lines; may be NULL */
  const char* model_hash;  /* recorded in the manifest; may be NULL */
} dltm_report_options;

DLTM_API void dltm_report_options_default(dltm_report_options* opts);
DLTM_API dltm_status dltm_report(const dltm_model* model, const char* out_dir,
                                 const dltm_report_options* opts);

/* ---- utilities ------------------------------------------------------- */

/* Lower-case hex SHA-256 into out (65 bytes including the terminator). */
DLTM_API dltm_status dltm_sha256(const void* data, size_t size, char out[65]);
DLTM_API dltm_status dltm_sha256_file(const char* path, char out[65]);
/* Writes through a temporary file and renames it into place. */
DLTM_API dltm_status dltm_write_file(const char* path, const void* data, size_t size);

#ifdef __cplusplus
}
#endif

#endif /* DLTM_DLTM_H_ */
