// Copyright 2026 The DLTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dltm/dltm.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "dltm/corpus.hpp"
#include "dltm/error.hpp"
#include "dltm/label_probs.hpp"
#include "dltm/model.hpp"
#include "dltm/reporting.hpp"
#include "dltm/text.hpp"
#include "dltm/util.hpp"
#include "dltm/variational.hpp"
#include "json.hpp"

struct dltm_corpus {
  dltm::Corpus corpus;
};

struct dltm_truth {
  dltm::SimulationTruth truth;
};

struct dltm_model {
  dltm::FittedModel model;
};

namespace {

thread_local std::string g_last_error;

dltm_status ToStatus(dltm::ErrorKind kind) {
  switch (kind) {
    case dltm::ErrorKind::kInvalidArgument:
      return DLTM_ERR_INVALID_ARGUMENT;
    case dltm::ErrorKind::kIo:
      return DLTM_ERR_IO;
    case dltm::ErrorKind::kData:
      return DLTM_ERR_DATA;
    case dltm::ErrorKind::kNumerical:
      return DLTM_ERR_NUMERICAL;
  }
  return DLTM_ERR_INTERNAL;
}

template <typename Fn>
dltm_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return DLTM_OK;
  } catch (const dltm::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DLTM_ERR_INTERNAL;
}

void NotNull(const void* p, const char* what) {
  if (p == nullptr) dltm::Fail(dltm::ErrorKind::kInvalidArgument, std::string(what) + " is null");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

dltm::Hyperparameters ToHyper(const dltm_hyper& h) {
  dltm::Hyperparameters out;
  out.topics = h.topics;
  out.sigma2 = h.sigma2;
  out.delta2 = h.delta2;
  out.a2 = h.a2;
  out.kappa = h.kappa;
  out.seed = h.seed;
  out.beta0_var = h.beta0_var;
  return out;
}

void CopyHex(const std::string& hex, char out[65]) {
  std::memcpy(out, hex.data(), 64);
  out[64] = '\0';
}

}  // namespace

extern "C" {

const char* dltm_version(void) { return "1.0.0"; }

const char* dltm_last_error(void) { return g_last_error.c_str(); }

void dltm_string_free(char* s) { std::free(s); }

void dltm_set_log_level(dltm_log_level level) {
  dltm::SetLogLevel(static_cast<dltm::LogLevel>(level));
}

void dltm_preprocess_options_default(dltm_preprocess_options* opts) {
  if (opts == nullptr) return;
  opts->stoplist_path = nullptr;
  opts->min_doc_freq = 1;
  opts->min_token_length = 3;
  opts->porter = 1;
}

dltm_status dltm_corpus_load_raw(const char* path, const dltm_preprocess_options* opts,
                                 dltm_corpus** out, size_t* dropped) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    dltm_preprocess_options o;
    dltm_preprocess_options_default(&o);
    if (opts != nullptr) o = *opts;
    dltm::PreprocessConfig config;
    config.stopwords = dltm::DefaultEnglishStopwords();
    config.min_token_length = o.min_token_length;
    config.stemmer = o.porter ? dltm::Stemmer::kPorter : dltm::Stemmer::kNone;
    if (o.stoplist_path != nullptr) {
      // Entries are matched against stemmed tokens, so both the surface form
      // and its stem are listed.
      for (const auto& w : dltm::LoadWordList(o.stoplist_path)) {
        config.extra_stoplist.insert(w);
        if (o.porter) config.extra_stoplist.insert(dltm::PorterStemFixedPoint(w));
      }
    }
    dltm::LoadReport report;
    auto corpus = std::make_unique<dltm_corpus>();
    corpus->corpus = dltm::LoadCorpus(path, config, o.min_doc_freq, &report);
    if (dropped != nullptr) *dropped = report.dropped_ids.size();
    *out = corpus.release();
  });
}

dltm_status dltm_corpus_load(const char* path, dltm_corpus** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    auto corpus = std::make_unique<dltm_corpus>();
    corpus->corpus = dltm::LoadCanonicalCorpus(path);
    *out = corpus.release();
  });
}

dltm_status dltm_corpus_save(const dltm_corpus* corpus, const char* path) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(path, "path");
    dltm::SaveCorpus(corpus->corpus, path);
  });
}

dltm_status dltm_corpus_to_string(const dltm_corpus* corpus, char** out) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(out, "out");
    *out = CopyString(dltm::CorpusToCanonical(corpus->corpus));
  });
}

dltm_status dltm_corpus_get_info(const dltm_corpus* corpus, dltm_corpus_info* info) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(info, "info");
    info->T = corpus->corpus.T;
    info->labels = static_cast<int>(corpus->corpus.num_labels());
    info->vocabulary = static_cast<int>(corpus->corpus.vocabulary.size());
    info->documents = corpus->corpus.num_documents();
  });
}

void dltm_corpus_free(dltm_corpus* corpus) { delete corpus; }

dltm_status dltm_label_frequency_csv(const dltm_corpus* corpus, char** out) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(out, "out");
    *out = CopyString(
        dltm::LabelFrequencyCsv(corpus->corpus.label_set, dltm::LabelFrequency(corpus->corpus)));
  });
}

dltm_status dltm_corpus_stats_csv(const dltm_corpus* corpus, char** out) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(out, "out");
    *out = CopyString(dltm::CorpusStatsCsv(dltm::CorpusStats(corpus->corpus)));
  });
}

void dltm_hyper_default(dltm_hyper* hyper) {
  if (hyper == nullptr) return;
  const dltm::Hyperparameters h;
  hyper->topics = h.topics;
  hyper->sigma2 = h.sigma2;
  hyper->delta2 = h.delta2;
  hyper->a2 = h.a2;
  hyper->kappa = h.kappa;
  hyper->seed = h.seed;
  hyper->beta0_var = h.beta0_var;
}

void dltm_sim_dims_default(dltm_sim_dims* dims) {
  if (dims == nullptr) return;
  const dltm::SimulationDims d;
  dims->T = d.T;
  dims->labels = d.L;
  dims->vocabulary = d.V;
  dims->docs_per_slot = d.docs_per_slot;
  dims->words_per_doc = d.words_per_doc;
  dims->labels_per_doc = d.labels_per_doc;
}

dltm_status dltm_simulate(const dltm_hyper* hyper, const dltm_sim_dims* dims,
                          dltm_corpus** corpus, dltm_truth** truth) {
  return Guard([&] {
    NotNull(hyper, "hyper");
    NotNull(dims, "dims");
    NotNull(corpus, "corpus");
    dltm::SimulationDims d;
    d.T = dims->T;
    d.L = dims->labels;
    d.V = dims->vocabulary;
    d.docs_per_slot = dims->docs_per_slot;
    d.words_per_doc = dims->words_per_doc;
    d.labels_per_doc = dims->labels_per_doc;
    dltm::Simulation sim = dltm::SimulateCorpus(ToHyper(*hyper), d);
    auto c = std::make_unique<dltm_corpus>();
    c->corpus = std::move(sim.corpus);
    if (truth != nullptr) {
      auto t = std::make_unique<dltm_truth>();
      t->truth = std::move(sim.truth);
      *truth = t.release();
    }
    *corpus = c.release();
  });
}

dltm_status dltm_truth_to_string(const dltm_truth* truth, char** out) {
  return Guard([&] {
    NotNull(truth, "truth");
    NotNull(out, "out");
    *out = CopyString(dltm::TruthToJson(truth->truth));
  });
}

dltm_status dltm_truth_save(const dltm_truth* truth, const char* path) {
  return Guard([&] {
    NotNull(truth, "truth");
    NotNull(path, "path");
    dltm::WriteFileAtomic(path, dltm::TruthToJson(truth->truth));
  });
}

void dltm_truth_free(dltm_truth* truth) { delete truth; }

void dltm_fit_options_default(dltm_fit_options* opts) {
  if (opts == nullptr) return;
  const dltm::FitOptions o;
  opts->max_iter = o.max_iter;
  opts->rel_tol = o.rel_tol;
  opts->threads = o.threads;
  opts->psi_chains = o.psi_chains;
  opts->psi_level = o.psi_level;
}

dltm_status dltm_fit(const dltm_corpus* corpus, const dltm_hyper* hyper,
                     const dltm_fit_options* opts, dltm_model** out) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(hyper, "hyper");
    NotNull(out, "out");
    dltm::FitOptions o;
    if (opts != nullptr) {
      o.max_iter = opts->max_iter;
      o.rel_tol = opts->rel_tol;
      o.threads = opts->threads;
      o.psi_chains = opts->psi_chains;
      o.psi_level = opts->psi_level;
    }
    auto m = std::make_unique<dltm_model>();
    m->model = dltm::FitDltm(corpus->corpus, ToHyper(*hyper), o);
    *out = m.release();
  });
}

dltm_status dltm_model_load(const char* path, dltm_model** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    auto m = std::make_unique<dltm_model>();
    m->model = dltm::LoadModel(path);
    *out = m.release();
  });
}

dltm_status dltm_model_save(const dltm_model* model, const char* path) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(path, "path");
    dltm::SaveModel(model->model, path);
  });
}

dltm_status dltm_model_to_string(const dltm_model* model, char** out) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(out, "out");
    *out = CopyString(dltm::ModelToJson(model->model));
  });
}

dltm_status dltm_model_get_diagnostics(const dltm_model* model, dltm_fit_diagnostics* diag) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(diag, "diag");
    const auto& d = model->model.diagnostics;
    diag->iterations = d.iterations;
    diag->converged = d.converged ? 1 : 0;
    diag->final_elbo = d.final_elbo;
    diag->trace_length = d.elbo_trace.size();
  });
}

dltm_status dltm_model_get_elbo_trace(const dltm_model* model, double* trace, size_t capacity) {
  return Guard([&] {
    NotNull(model, "model");
    const auto& t = model->model.diagnostics.elbo_trace;
    const size_t n = std::min(capacity, t.size());
    if (n > 0) NotNull(trace, "trace");
    for (size_t i = 0; i < n; ++i) trace[i] = t[i];
  });
}

void dltm_model_free(dltm_model* model) { delete model; }

void dltm_psi_options_default(dltm_psi_options* opts) {
  if (opts == nullptr) return;
  const dltm::LabelProbOptions o;
  opts->kappa = o.kappa;
  opts->chains = o.chains;
  opts->level = o.level;
  opts->seed = o.seed;
  opts->threads = o.threads;
}

dltm_status dltm_fit_psi(const dltm_corpus* corpus, const dltm_psi_options* opts, char** csv,
                         char** json) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    dltm::LabelProbOptions o;
    if (opts != nullptr) {
      o.kappa = opts->kappa;
      o.chains = opts->chains;
      o.level = opts->level;
      o.seed = opts->seed;
      o.threads = opts->threads;
    }
    const dltm::PsiPosterior post = dltm::FitLabelProbs(corpus->corpus, o);
    std::string csv_text = dltm::PsiCsv(corpus->corpus.label_set, post);
    nlohmann::json j;
    j["format"] = "dltm-psi";
    j["version"] = 1;
    j["kappa"] = o.kappa;
    j["chains"] = o.chains;
    j["level"] = o.level;
    j["seed"] = o.seed;
    j["labels"] = corpus->corpus.label_set;
    j["mean"] = post.mean;
    j["ci_low"] = post.ci_low;
    j["ci_high"] = post.ci_high;
    std::string json_text = j.dump() + "\n";
    char* c = csv != nullptr ? CopyString(csv_text) : nullptr;
    try {
      if (json != nullptr) *json = CopyString(json_text);
    } catch (...) {
      std::free(c);
      throw;
    }
    if (csv != nullptr) *csv = c;
  });
}

void dltm_report_options_default(dltm_report_options* opts) {
  if (opts == nullptr) return;
  opts->top_k = 10;
  opts->names_path = nullptr;
  opts->model_hash = nullptr;
}

dltm_status dltm_report(const dltm_model* model, const char* out_dir,
                        const dltm_report_options* opts) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(out_dir, "out_dir");
    dltm_report_options o;
    dltm_report_options_default(&o);
    if (opts != nullptr) o = *opts;
    dltm::Require(o.top_k >= 1, "top-k must be at least 1");
    dltm::ReportOptions ro;
    ro.top_k = static_cast<std::size_t>(o.top_k);
    if (o.names_path != nullptr) {
      ro.topic_names = dltm::LoadTopicNames(o.names_path, model->model.hyper.topics);
      ro.input_hashes["names"] = dltm::Sha256File(o.names_path);
    }
    if (o.model_hash != nullptr) ro.input_hashes["model"] = o.model_hash;
    dltm::ExportReport(model->model, out_dir, ro);
  });
}

dltm_status dltm_sha256(const void* data, size_t size, char out[65]) {
  return Guard([&] {
    if (size > 0) NotNull(data, "data");
    NotNull(out, "out");
    CopyHex(dltm::Sha256Hex(std::string_view(static_cast<const char*>(data), size)), out);
  });
}

dltm_status dltm_sha256_file(const char* path, char out[65]) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    CopyHex(dltm::Sha256File(path), out);
  });
}

dltm_status dltm_write_file(const char* path, const void* data, size_t size) {
  return Guard([&] {
    NotNull(path, "path");
    if (size > 0) NotNull(data, "data");
    dltm::WriteFileAtomic(path, std::string_view(static_cast<const char*>(data), size));
  });
}

}  // extern "C"
