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

#include <cmath>
#include <string>

#include "dltm/error.hpp"
#include "dltm/util.hpp"
#include "dltm/variational.hpp"
#include "json.hpp"

namespace dltm {

using nlohmann::json;

namespace {

ExpectedCounts EStepAt(std::span<const PseudoDoc> pseudo, VariationalState& state, int threads,
                       int iteration) {
  try {
    return EStep(pseudo, state, threads);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumerical) throw;
    Fail(ErrorKind::kNumerical,
         "diverged at iteration " + std::to_string(iteration) + ": " + e.what());
  }
}

}  // namespace

FittedModel FitDltm(const Corpus& corpus, const Hyperparameters& hyper, const FitOptions& options) {
  hyper.Validate();
  ValidateCorpus(corpus);
  Require(corpus.num_documents() > 0, "corpus has no documents");
  Require(options.max_iter >= 1, "max_iter must be at least 1");
  Require(options.rel_tol >= 0.0 && !std::isnan(options.rel_tol), "rel_tol must be non-negative");

  const std::vector<PseudoDoc> pseudo = ReweightPseudoDocs(corpus);
  VariationalState state = InitialState(corpus, hyper);
  ExpectedCounts counts = EStepAt(pseudo, state, options.threads, 0);
  double prev = Elbo(pseudo, state, hyper, options.threads);
  if (!std::isfinite(prev)) Fail(ErrorKind::kNumerical, "objective is non-finite at initialisation");
  state.elbo_trace.push_back(prev);

  FitDiagnostics diag;
  MStepOptions mopts;
  mopts.threads = options.threads;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    MStep(counts, hyper, state, mopts);
    counts = EStepAt(pseudo, state, options.threads, iter);
    const double f = Elbo(pseudo, state, hyper, options.threads);
    if (!std::isfinite(f)) {
      Fail(ErrorKind::kNumerical, "objective became non-finite at iteration " + std::to_string(iter));
    }
    state.elbo_trace.push_back(f);
    diag.iterations = iter;
    Log(LogLevel::kDebug, "em_iteration", {{"iter", std::to_string(iter)}, {"elbo", FormatCsvNumber(f)}});
    const bool done = std::abs(f - prev) <= options.rel_tol * std::abs(prev);
    prev = f;
    if (done) {
      diag.converged = true;
      break;
    }
  }
  diag.final_elbo = prev;
  diag.elbo_trace = state.elbo_trace;
  Log(LogLevel::kInfo, "fit_done",
      {{"iterations", std::to_string(diag.iterations)},
       {"converged", diag.converged ? "true" : "false"},
       {"elbo", FormatCsvNumber(diag.final_elbo)}});

  FittedModel model;
  model.hyper = hyper;
  model.T = corpus.T;
  model.label_set = corpus.label_set;
  model.vocabulary = corpus.vocabulary;
  model.topics.beta = std::move(state.beta_mean);
  model.labels.theta = std::move(state.theta_mean);
  model.mean.alpha = std::move(state.alpha_mean);
  model.diagnostics = std::move(diag);
  model.label_frequency = LabelFrequency(corpus);
  model.corpus_hash = Sha256Hex(CorpusToCanonical(corpus));
  model.options = options;

  LabelProbOptions psi_opts;
  psi_opts.kappa = hyper.kappa;
  psi_opts.chains = options.psi_chains;
  psi_opts.level = options.psi_level;
  psi_opts.seed = hyper.seed;
  psi_opts.threads = options.threads;
  model.psi = FitLabelProbs(corpus, psi_opts);
  return model;
}

std::string ModelToJson(const FittedModel& model) {
  json j;
  j["format"] = "dltm-model";
  j["version"] = 1;
  j["hyper"] = {{"topics", model.hyper.topics},   {"sigma2", model.hyper.sigma2},
                {"delta2", model.hyper.delta2},   {"a2", model.hyper.a2},
                {"kappa", model.hyper.kappa},     {"seed", model.hyper.seed},
                {"beta0_var", model.hyper.beta0_var}};
  // Thread count is deliberately left out: it never changes results.
  j["fit"] = {{"max_iter", model.options.max_iter},
              {"rel_tol", model.options.rel_tol},
              {"psi_chains", model.options.psi_chains},
              {"psi_level", model.options.psi_level}};
  j["T"] = model.T;
  j["labels"] = model.label_set;
  j["vocabulary"] = model.vocabulary.terms();
  j["vocabulary_hash"] = VocabularyHash(model.vocabulary);
  j["corpus_hash"] = model.corpus_hash;
  j["beta"] = model.topics.beta;
  j["theta"] = model.labels.theta;
  j["alpha"] = model.mean.alpha;
  j["psi"] = {{"level", model.psi.level},
              {"chains", model.options.psi_chains},
              {"mean", model.psi.mean},
              {"ci_low", model.psi.ci_low},
              {"ci_high", model.psi.ci_high}};
  j["diagnostics"] = {{"iterations", model.diagnostics.iterations},
                      {"final_elbo", model.diagnostics.final_elbo},
                      {"converged", model.diagnostics.converged},
                      {"elbo_trace", model.diagnostics.elbo_trace}};
  j["label_frequency"] = model.label_frequency;
  return j.dump() + "\n";
}

FittedModel ModelFromJson(const std::string& text) {
  FittedModel m;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "dltm-model") Fail(ErrorKind::kData, "not a dltm-model bundle");
    if (j.at("version").get<int>() != 1) Fail(ErrorKind::kData, "unsupported model bundle version");
    const json& h = j.at("hyper");
    m.hyper.topics = h.at("topics").get<int>();
    m.hyper.sigma2 = h.at("sigma2").get<double>();
    m.hyper.delta2 = h.at("delta2").get<double>();
    m.hyper.a2 = h.at("a2").get<double>();
    m.hyper.kappa = h.at("kappa").get<double>();
    m.hyper.seed = h.at("seed").get<std::uint64_t>();
    m.hyper.beta0_var = h.at("beta0_var").get<double>();
    const json& f = j.at("fit");
    m.options.max_iter = f.at("max_iter").get<int>();
    m.options.rel_tol = f.at("rel_tol").get<double>();
    m.options.psi_chains = f.at("psi_chains").get<int>();
    m.options.psi_level = f.at("psi_level").get<double>();
    m.T = j.at("T").get<int>();
    m.label_set = j.at("labels").get<std::vector<std::string>>();
    m.vocabulary = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    if (VocabularyHash(m.vocabulary) != j.at("vocabulary_hash").get<std::string>()) {
      Fail(ErrorKind::kData, "vocabulary hash mismatch");
    }
    m.corpus_hash = j.at("corpus_hash").get<std::string>();
    m.topics.beta = j.at("beta").get<Cube>();
    m.labels.theta = j.at("theta").get<Cube>();
    m.mean.alpha = j.at("alpha").get<Mat>();
    const json& p = j.at("psi");
    m.psi.level = p.at("level").get<double>();
    m.psi.mean = p.at("mean").get<Mat>();
    m.psi.ci_low = p.at("ci_low").get<Mat>();
    m.psi.ci_high = p.at("ci_high").get<Mat>();
    const json& d = j.at("diagnostics");
    m.diagnostics.iterations = d.at("iterations").get<int>();
    m.diagnostics.final_elbo = d.at("final_elbo").get<double>();
    m.diagnostics.converged = d.at("converged").get<bool>();
    m.diagnostics.elbo_trace = d.at("elbo_trace").get<Vec>();
    m.label_frequency = j.at("label_frequency").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kData, std::string("malformed model bundle: ") + e.what());
  }

  const auto Z = static_cast<std::size_t>(m.hyper.topics);
  const auto T = static_cast<std::size_t>(m.T);
  const std::size_t L = m.label_set.size();
  const std::size_t V = m.vocabulary.size();
  bool ok = m.T >= 1 && m.topics.beta.size() == Z && m.labels.theta.size() == L &&
            m.mean.alpha.size() == T && m.psi.mean.size() == T;
  for (std::size_t z = 0; ok && z < Z; ++z) {
    ok = m.topics.beta[z].size() == T;
    for (std::size_t t = 0; ok && t < T; ++t) ok = m.topics.beta[z][t].size() == V;
  }
  for (std::size_t l = 0; ok && l < L; ++l) {
    ok = m.labels.theta[l].size() == T;
    for (std::size_t t = 0; ok && t < T; ++t) ok = m.labels.theta[l][t].size() == Z;
  }
  for (std::size_t t = 0; ok && t < T; ++t) ok = m.mean.alpha[t].size() == Z && m.psi.mean[t].size() == L;
  if (!ok) Fail(ErrorKind::kData, "model bundle dimensions are inconsistent");
  return m;
}

void SaveModel(const FittedModel& model, const std::string& path) {
  WriteFileAtomic(path, ModelToJson(model));
}

FittedModel LoadModel(const std::string& path) { return ModelFromJson(ReadFile(path)); }

}  // namespace dltm
