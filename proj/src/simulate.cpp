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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "dltm/error.hpp"
#include "dltm/model.hpp"
#include "json.hpp"

namespace dltm {

using nlohmann::json;

Vec SampleDirichlet(std::span<const double> alpha, Engine& engine) {
  Require(!alpha.empty(), "Dirichlet of dimension 0");
  Vec out(alpha.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    Require(alpha[i] > 0.0 && std::isfinite(alpha[i]), "Dirichlet parameters must be positive");
    std::gamma_distribution<double> gamma(std::max(alpha[i], 1e-10), 1.0);
    out[i] = gamma(engine);
    sum += out[i];
  }
  if (!(sum > 0.0)) {
    // Every shape was tiny and every draw underflowed; the limit is a point
    // mass on the largest shape.
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(std::max_element(alpha.begin(), alpha.end()) - alpha.begin())] = 1.0;
    return out;
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<std::string> SyntheticTerms(int V) {
  Require(V >= 1, "vocabulary size must be positive");
  int width = 1;
  for (long long cap = 26; cap < V; cap *= 26) ++width;
  std::vector<std::string> terms;
  terms.reserve(static_cast<std::size_t>(V));
  for (int i = 0; i < V; ++i) {
    std::string s(static_cast<std::size_t>(width), 'a');
    int x = i;
    for (int k = width - 1; k >= 0; --k) {
      s[static_cast<std::size_t>(k)] = static_cast<char>('a' + x % 26);
      x /= 26;
    }
    terms.push_back("w" + s);
  }
  return terms;
}

namespace {

std::string PaddedName(const char* prefix, int i, int count) {
  const int width = std::max(2, static_cast<int>(std::to_string(count).size()));
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

void AddNoise(Vec& v, double variance, Engine& engine) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (double& x : v) x += normal(engine);
}

// Sequential renormalized draws without replacement; result sorted.
std::vector<int> DrawLabels(const Vec& psi, int count, Engine& engine) {
  Vec weights = psi;
  std::vector<int> out;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    double total = 0.0;
    for (double w : weights) total += w;
    int pick = -1;
    if (total > 0.0) {
      double u = unif(engine) * total;
      for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l] <= 0.0) continue;
        pick = static_cast<int>(l);
        if (u < weights[l]) break;
        u -= weights[l];
      }
    } else {
      // Remaining labels have zero probability: pick uniformly among them.
      std::vector<int> rest;
      for (int l = 0; l < static_cast<int>(psi.size()); ++l) {
        if (std::find(out.begin(), out.end(), l) == out.end()) rest.push_back(l);
      }
      std::uniform_int_distribution<std::size_t> pick_rest(0, rest.size() - 1);
      pick = rest[pick_rest(engine)];
    }
    out.push_back(pick);
    weights[static_cast<std::size_t>(pick)] = 0.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Simulation SimulateCorpus(const Hyperparameters& hyper, const SimulationDims& dims,
                          const SimulationInit& init) {
  hyper.Validate();
  Require(dims.T >= 1 && dims.L >= 1 && dims.V >= 1, "simulation dimensions must be positive");
  Require(dims.docs_per_slot >= 0, "docs per slot must be non-negative");
  Require(dims.words_per_doc >= 1, "words per doc must be positive");
  Require(dims.labels_per_doc >= 1, "labels per doc must be positive");
  Require(dims.labels_per_doc <= dims.L, "labels per doc exceeds the number of labels");
  Require(dims.words_per_slot.empty() ||
              dims.words_per_slot.size() == static_cast<std::size_t>(dims.T),
          "words_per_slot must have T entries");
  const auto Z = static_cast<std::size_t>(hyper.topics);
  const auto T = static_cast<std::size_t>(dims.T);
  const auto L = static_cast<std::size_t>(dims.L);
  const auto V = static_cast<std::size_t>(dims.V);

  Engine engine = MakeEngine(hyper.seed, Stream::kSimulate);

  Mat beta0;
  if (init.beta0) {
    beta0 = *init.beta0;
    Require(beta0.size() == Z, "beta0 must have one vector per topic");
    for (const auto& b : beta0) Require(b.size() == V, "beta0 vectors must have length V");
  } else {
    beta0.assign(Z, Vec(V, 0.0));
    for (auto& b : beta0) AddNoise(b, 0.01, engine);
  }
  Vec alpha0 = init.alpha0.value_or(Vec(Z, 0.0));
  Require(alpha0.size() == Z, "alpha0 must have length Z");
  Vec psi0 = init.psi0.value_or(Vec(L, 1.0 / static_cast<double>(L)));
  Require(psi0.size() == L, "psi0 must have length L");
  {
    double s = 0.0;
    for (double p : psi0) {
      Require(p >= 0.0, "psi0 must be non-negative");
      s += p;
    }
    Require(std::abs(s - 1.0) < 1e-9, "psi0 must sum to 1");
  }
  if (init.psi_schedule) {
    Require(init.psi_schedule->size() == T, "psi schedule must have T rows");
    for (const auto& row : *init.psi_schedule) Require(row.size() == L, "psi schedule rows must have length L");
  }

  Simulation sim;
  SimulationTruth& truth = sim.truth;
  truth.initial_topics.beta.resize(Z);
  for (std::size_t z = 0; z < Z; ++z) truth.initial_topics.beta[z] = {beta0[z]};
  truth.initial_mean = alpha0;
  truth.initial_label_probs = psi0;
  truth.topics.beta.assign(Z, Mat(T));
  truth.mean.alpha.assign(T, Vec());
  truth.labels.theta.assign(L, Mat(T));
  truth.label_probs.psi.assign(T, Vec());

  Corpus& corpus = sim.corpus;
  corpus.T = dims.T;
  for (int l = 0; l < dims.L; ++l) corpus.label_set.push_back(PaddedName("label", l + 1, dims.L));
  corpus.vocabulary = Vocabulary(SyntheticTerms(dims.V));
  corpus.slots.resize(T);

  Mat beta_prev = beta0;
  Vec alpha_prev = alpha0;
  Vec psi_prev = psi0;
  int doc_counter = 0;
  const int total_docs = dims.docs_per_slot * dims.T;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (std::size_t t = 0; t < T; ++t) {
    // 1. topic chains
    for (std::size_t z = 0; z < Z; ++z) {
      Vec b = beta_prev[z];
      if (!init.static_chains) AddNoise(b, hyper.sigma2, engine);
      truth.topics.beta[z][t] = b;
      beta_prev[z] = std::move(b);
    }
    // 2. mean chain
    Vec alpha = alpha_prev;
    if (!init.static_chains) AddNoise(alpha, hyper.delta2, engine);
    truth.mean.alpha[t] = alpha;
    alpha_prev = alpha;
    // 3. label-specific topic proportions
    for (std::size_t l = 0; l < L; ++l) {
      Vec theta = alpha;
      AddNoise(theta, hyper.a2, engine);
      truth.labels.theta[l][t] = std::move(theta);
    }
    // 4. label probabilities
    Vec psi;
    if (init.psi_schedule) {
      psi = (*init.psi_schedule)[t];
    } else if (init.static_chains) {
      psi = psi_prev;
    } else {
      Vec conc(L);
      for (std::size_t l = 0; l < L; ++l) conc[l] = hyper.kappa * psi_prev[l];
      psi = SampleDirichlet(conc, engine);
    }
    truth.label_probs.psi[t] = psi;
    psi_prev = psi;

    std::vector<std::discrete_distribution<int>> word_dist;
    for (std::size_t z = 0; z < Z; ++z) {
      const Vec p = PiMeanMap(truth.topics.beta[z][t]);
      word_dist.emplace_back(p.begin(), p.end());
    }
    std::vector<std::discrete_distribution<int>> topic_dist;
    for (std::size_t l = 0; l < L; ++l) {
      const Vec p = PiMeanMap(truth.labels.theta[l][t]);
      topic_dist.emplace_back(p.begin(), p.end());
    }
    const int words = dims.words_per_slot.empty() ? dims.words_per_doc : dims.words_per_slot[t];
    Require(words >= 1, "words per doc must be positive");

    for (int d = 0; d < dims.docs_per_slot; ++d) {
      Document doc;
      doc.id = PaddedName("doc", ++doc_counter, total_docs);
      doc.time_slot = static_cast<int>(t) + 1;
      // 5. labels
      doc.labels = DrawLabels(psi, dims.labels_per_doc, engine);
      // 6. words
      std::vector<TokenAssignment> assignments;
      assignments.reserve(static_cast<std::size_t>(words));
      std::vector<int> counts(V, 0);
      std::uniform_int_distribution<std::size_t> pick_label(0, doc.labels.size() - 1);
      for (int i = 0; i < words; ++i) {
        const int x = doc.labels[pick_label(engine)];
        const int z = topic_dist[static_cast<std::size_t>(x)](engine);
        const int w = word_dist[static_cast<std::size_t>(z)](engine);
        ++counts[static_cast<std::size_t>(w)];
        assignments.push_back({x, z});
      }
      for (std::size_t v = 0; v < V; ++v) {
        if (counts[v] > 0) doc.counts.push_back({static_cast<int>(v), counts[v]});
      }
      doc.token_total = words;
      doc.meta["words"] = words;
      corpus.slots[t].push_back(std::move(doc));
      truth.assignments.push_back(std::move(assignments));
    }
  }
  return sim;
}

std::string TruthToJson(const SimulationTruth& truth) {
  json j;
  j["format"] = "dltm-truth";
  j["version"] = 1;
  j["beta"] = truth.topics.beta;
  j["alpha"] = truth.mean.alpha;
  j["theta"] = truth.labels.theta;
  j["psi"] = truth.label_probs.psi;
  Mat beta0;
  for (const auto& chain : truth.initial_topics.beta) beta0.push_back(chain.at(0));
  j["beta0"] = beta0;
  j["alpha0"] = truth.initial_mean;
  j["psi0"] = truth.initial_label_probs;
  json assignments = json::array();
  for (const auto& doc : truth.assignments) {
    std::vector<int> x, z;
    x.reserve(doc.size());
    z.reserve(doc.size());
    for (const auto& a : doc) {
      x.push_back(a.label);
      z.push_back(a.topic);
    }
    assignments.push_back({{"x", x}, {"z", z}});
  }
  j["assignments"] = std::move(assignments);
  return j.dump() + "\n";
}

SimulationTruth TruthFromJson(const std::string& text) {
  SimulationTruth truth;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "dltm-truth") Fail(ErrorKind::kData, "not a dltm-truth file");
    truth.topics.beta = j.at("beta").get<Cube>();
    truth.mean.alpha = j.at("alpha").get<Mat>();
    truth.labels.theta = j.at("theta").get<Cube>();
    truth.label_probs.psi = j.at("psi").get<Mat>();
    for (const auto& b : j.at("beta0").get<Mat>()) truth.initial_topics.beta.push_back({b});
    truth.initial_mean = j.at("alpha0").get<Vec>();
    truth.initial_label_probs = j.at("psi0").get<Vec>();
    for (const auto& doc : j.at("assignments")) {
      const auto x = doc.at("x").get<std::vector<int>>();
      const auto z = doc.at("z").get<std::vector<int>>();
      if (x.size() != z.size()) Fail(ErrorKind::kData, "assignment arrays differ in length");
      std::vector<TokenAssignment> a(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) a[i] = {x[i], z[i]};
      truth.assignments.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kData, std::string("malformed truth file: ") + e.what());
  }
  return truth;
}

}  // namespace dltm
