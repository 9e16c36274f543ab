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
#include <numeric>
#include <random>
#include <vector>

#include "dltm/model.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace dltm {
namespace {

double Sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST_CASE("pi_mean_map: examples") {
  const Vec u = PiMeanMap(Vec(4, 0.0));
  for (double p : u) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  const Vec p = PiMeanMap(Vec{0.0, std::log(2.0), std::log(3.0)});
  CHECK(std::abs(p[0] - 1.0 / 6) < 1e-15);
  CHECK(std::abs(p[1] - 2.0 / 6) < 1e-15);
  CHECK(std::abs(p[2] - 3.0 / 6) < 1e-15);
  const Vec big = PiMeanMap(Vec{1000.0, 1001.0});
  const Vec small = PiMeanMap(Vec{0.0, 1.0});
  CHECK(std::abs(big[0] - small[0]) < 1e-12);
  CHECK(std::abs(big[1] - small[1]) < 1e-12);
}

TEST_CASE("pi_mean_map: simplex and shift invariance") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    Vec x(1 + i % 17);
    for (double& v : x) v = n(rng);
    const Vec p = PiMeanMap(x);
    CHECK(std::abs(Sum(p) - 1.0) < 1e-12);
    for (double v : p) CHECK(v > 0.0);
    Vec y = x;
    const double c = n(rng) * 100;
    for (double& v : y) v += c;
    const Vec q = PiMeanMap(y);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] - q[k]) < 1e-12);
    const Vec lp = LogPiMeanMap(x);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(std::exp(lp[k]) - p[k]) < 1e-12);
  }
}

TEST_CASE("pi_mean_map: errors and ratio mode") {
  CHECK(testing::KindOf([] { PiMeanMap(Vec{0.0, NAN}); }) == ErrorKind::kNumerical);
  CHECK(testing::KindOf([] { PiMeanMap(Vec{INFINITY, 0.0}); }) == ErrorKind::kNumerical);
  const Vec r = PiMeanMap(Vec{1.0, 3.0}, MeanMap::kRatio);
  CHECK(r[0] == 0.25);
  CHECK(r[1] == 0.75);
  CHECK(testing::KindOf([] { PiMeanMap(Vec{1.0, -0.5}, MeanMap::kRatio); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("label_topic_word_dist") {
  const Mat beta1 = {{0.3, -0.2, 1.0}};
  const Vec single = LabelTopicWordDist(Vec{0.7}, beta1);
  const Vec ref = PiMeanMap(beta1[0]);
  for (int v = 0; v < 3; ++v) CHECK(std::abs(single[v] - ref[v]) < 1e-15);

  const Mat beta2 = {{0.0, 1.0, 2.0}, {2.0, 0.5, -1.0}};
  const Vec peaked = LabelTopicWordDist(Vec{-50.0, 50.0}, beta2);
  const Vec t2 = PiMeanMap(beta2[1]);
  for (int v = 0; v < 3; ++v) CHECK(std::abs(peaked[v] - t2[v]) < 1e-6);

  // Two topics with simplex points (1/2, 1/4, 1/4) and (1/8, 1/8, 3/4).
  const Mat known = {{std::log(2.0), 0.0, 0.0}, {0.0, 0.0, std::log(6.0)}};
  const Vec mixed = LabelTopicWordDist(Vec{0.0, 0.0}, known);
  CHECK(std::abs(mixed[0] - (0.5 + 0.125) / 2) < 1e-15);
  CHECK(std::abs(mixed[1] - (0.25 + 0.125) / 2) < 1e-15);
  CHECK(std::abs(mixed[2] - (0.25 + 0.75) / 2) < 1e-15);
  CHECK(testing::KindOf([&] { LabelTopicWordDist(Vec{0.0}, known); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("doc_word_distribution") {
  TopicChains beta;
  beta.beta = {{{0.0, 5.0, -1.0, 0.0}}, {{3.0, 0.0, 0.0, -2.0}}};
  LabelTopicChains theta;
  theta.theta = {{{0.4, -0.1}}, {{0.4, -0.1}}, {{-60.0, 60.0}}, {{60.0, -60.0}}};
  const Vec one = DocWordDistribution(std::vector<int>{0}, theta, beta, 0);
  const Vec ref = LabelTopicWordDist(theta.theta[0][0], Mat{beta.beta[0][0], beta.beta[1][0]});
  for (int v = 0; v < 4; ++v) CHECK(std::abs(one[v] - ref[v]) < 1e-15);
  const Vec same = DocWordDistribution(std::vector<int>{0, 1}, theta, beta, 0);
  for (int v = 0; v < 4; ++v) CHECK(std::abs(same[v] - ref[v]) < 1e-15);

  // Labels 2 and 3 each select one topic; the document averages them.
  const Vec avg = DocWordDistribution(std::vector<int>{2, 3}, theta, beta, 0);
  const Vec a = PiMeanMap(beta.beta[1][0]);
  const Vec b = PiMeanMap(beta.beta[0][0]);
  for (int v = 0; v < 4; ++v) CHECK(std::abs(avg[v] - (a[v] + b[v]) / 2) < 1e-12);
  const Vec swapped = DocWordDistribution(std::vector<int>{3, 2}, theta, beta, 0);
  for (int v = 0; v < 4; ++v) CHECK(std::abs(avg[v] - swapped[v]) < 1e-15);
  CHECK(std::abs(Sum(avg) - 1.0) < 1e-12);
  CHECK(testing::KindOf([&] { DocWordDistribution(std::vector<int>{}, theta, beta, 0); }) ==
        ErrorKind::kInvalidArgument);
}

// Parameters for a corpus with T slots, L labels, Z topics, V terms.
ModelParams RandomParams(int T, int L, int Z, int V, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ModelParams p;
  p.topics.beta.assign(Z, Mat(T, Vec(V)));
  for (auto& c : p.topics.beta)
    for (auto& r : c)
      for (double& x : r) x = n(rng);
  p.labels.theta.assign(L, Mat(T, Vec(Z)));
  for (auto& c : p.labels.theta)
    for (auto& r : c)
      for (double& x : r) x = n(rng);
  p.mean.alpha.assign(T, Vec(Z, 0.0));
  p.label_probs.psi.assign(T, Vec(L));
  for (auto& r : p.label_probs.psi) {
    for (double& x : r) x = 0.1 + std::abs(n(rng));
    const double s = Sum(r);
    for (double& x : r) x /= s;
  }
  return p;
}

double Factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

TEST_CASE("log_likelihood: trivial cases") {
  Corpus empty = testing::MakeCorpus(1, {"A"}, {"a", "b"});
  const ModelParams p = RandomParams(1, 1, 1, 2, 1);
  const LogLikelihood ll = ComputeLogLikelihood(empty, p);
  CHECK(ll.label_part == 0.0);
  CHECK(ll.word_part == 0.0);
  CHECK(ll.total == 0.0);

  Corpus one = testing::MakeCorpus(1, {"A"}, {"a", "b"});
  testing::Add(one, testing::MakeDoc("d", 1, {0}, {1, 0}));
  ModelParams u;
  u.topics.beta = {{{0.0, 0.0}}};
  u.labels.theta = {{{0.0}}};
  u.mean.alpha = {{0.0}};
  u.label_probs.psi = {{1.0}};
  const LogLikelihood l1 = ComputeLogLikelihood(one, u);
  CHECK(std::abs(l1.word_part - std::log(0.5)) < 1e-15);
  CHECK(l1.label_part == 0.0);
}

TEST_CASE("log_likelihood: matches a product-of-terms oracle") {
  Corpus c = testing::MakeCorpus(2, {"A", "B", "C"}, {"a", "b", "c", "d"});
  testing::Add(c, testing::MakeDoc("1", 1, {0, 2}, {2, 0, 1, 3}));
  testing::Add(c, testing::MakeDoc("2", 2, {1}, {0, 4, 1, 0}));
  const ModelParams p = RandomParams(2, 3, 2, 4, 9);
  const LogLikelihood ll = ComputeLogLikelihood(c, p);

  double label_prod = 1.0;
  double word_prod = 1.0;
  for (int t = 0; t < 2; ++t) {
    for (const Document& d : c.slots[static_cast<std::size_t>(t)]) {
      // Label draw as |l_d| multinomial picks, one of each present label.
      label_prod *= Factorial(static_cast<int>(d.labels.size()));
      for (int l : d.labels) label_prod *= p.label_probs.psi[t][l];
      // phi averaged over labels, each a theta-weighted mix of topics.
      Vec phi(4, 0.0);
      for (int l : d.labels) {
        const Vec w = PiMeanMap(p.labels.theta[l][t]);
        for (int z = 0; z < 2; ++z) {
          const Vec topic = PiMeanMap(p.topics.beta[z][t]);
          for (int v = 0; v < 4; ++v) phi[v] += w[z] * topic[v] / d.labels.size();
        }
      }
      word_prod *= Factorial(d.token_total);
      for (const auto& tc : d.counts) {
        word_prod /= Factorial(tc.count);
        for (int k = 0; k < tc.count; ++k) word_prod *= phi[tc.term];
      }
    }
  }
  CHECK(std::abs(ll.label_part - std::log(label_prod)) < 1e-10);
  CHECK(std::abs(ll.word_part - std::log(word_prod)) < 1e-10);
  CHECK(std::abs(ll.total - (ll.label_part + ll.word_part)) < 1e-12);
  CHECK(!ll.negative_infinity);
}

TEST_CASE("log_likelihood: word part is invariant to shifting beta") {
  std::mt19937_64 rng(4);
  Corpus c = testing::MakeCorpus(2, {"A", "B"}, {"a", "b", "c"});
  for (int i = 0; i < 10; ++i)
    testing::Add(c, testing::MakeDoc(std::to_string(i), 1 + i % 2, {i % 2},
                                     {static_cast<int>(rng() % 4), 1, static_cast<int>(rng() % 3)}));
  ModelParams p = RandomParams(2, 2, 3, 3, 2);
  const double base = ComputeLogLikelihood(c, p).word_part;
  for (auto& chain : p.topics.beta)
    for (auto& row : chain)
      for (double& x : row) x += 17.25;
  CHECK(std::abs(ComputeLogLikelihood(c, p).word_part - base) < 1e-9);
}

TEST_CASE("log_likelihood: zero probabilities are flagged") {
  Corpus c = testing::MakeCorpus(1, {"A", "B"}, {"a", "b"});
  testing::Add(c, testing::MakeDoc("d", 1, {1}, {1, 1}));
  ModelParams p = RandomParams(1, 2, 1, 2, 3);
  p.label_probs.psi = {{1.0, 0.0}};
  const LogLikelihood ll = ComputeLogLikelihood(c, p);
  CHECK(ll.negative_infinity);
  CHECK(std::isinf(ll.label_part));
  CHECK(ll.label_part < 0);

  ModelParams q = RandomParams(1, 2, 1, 2, 3);
  q.topics.beta = {{{0.0, -1e6}}};
  const LogLikelihood lw = ComputeLogLikelihood(c, q);
  CHECK(lw.negative_infinity);
  CHECK(std::isinf(lw.word_part));
}

SimulationDims SmallDims() {
  SimulationDims d;
  d.T = 2;
  d.L = 2;
  d.V = 10;
  d.docs_per_slot = 100;
  d.words_per_doc = 200;
  d.labels_per_doc = 1;
  return d;
}

TEST_CASE("simulate: reproducible from seed") {
  Hyperparameters h;
  h.topics = 2;
  h.seed = 42;
  const Simulation a = SimulateCorpus(h, SmallDims());
  const Simulation b = SimulateCorpus(h, SmallDims());
  CHECK(CorpusToCanonical(a.corpus) == CorpusToCanonical(b.corpus));
  CHECK(TruthToJson(a.truth) == TruthToJson(b.truth));
  h.seed = 43;
  CHECK(CorpusToCanonical(SimulateCorpus(h, SmallDims()).corpus) != CorpusToCanonical(a.corpus));
}

TEST_CASE("simulate: structure and truth invariants") {
  Hyperparameters h;
  h.topics = 3;
  h.seed = 5;
  SimulationDims d = SmallDims();
  d.T = 3;
  d.L = 4;
  d.labels_per_doc = 2;
  d.words_per_doc = 30;
  const Simulation s = SimulateCorpus(h, d);
  ValidateCorpus(s.corpus);
  CHECK(s.corpus.T == 3);
  CHECK(s.corpus.num_labels() == 4);
  CHECK(s.corpus.vocabulary.size() == 10);
  CHECK(s.truth.topics.beta.size() == 3);
  CHECK(s.truth.labels.theta.size() == 4);
  CHECK(s.truth.label_probs.psi.size() == 3);
  for (const auto& psi : s.truth.label_probs.psi) CHECK(std::abs(Sum(psi) - 1.0) < 1e-12);
  std::size_t doc = 0;
  for (const auto& slot : s.corpus.slots) {
    for (const auto& document : slot) {
      CHECK(document.labels.size() == 2);
      CHECK(document.token_total == 30);
      CHECK(document.meta.at("words") == 30.0);
      const auto& asg = s.truth.assignments[doc++];
      CHECK(asg.size() == 30);
      for (const auto& a : asg) {
        CHECK(std::find(document.labels.begin(), document.labels.end(), a.label) != document.labels.end());
        CHECK(a.topic >= 0);
        CHECK(a.topic < 3);
      }
    }
  }
  CHECK(doc == s.truth.assignments.size());
  const SimulationTruth back = TruthFromJson(TruthToJson(s.truth));
  CHECK(TruthToJson(back) == TruthToJson(s.truth));
}

TEST_CASE("simulate: single topic") {
  Hyperparameters h;
  h.topics = 1;
  h.seed = 8;
  SimulationDims d = SmallDims();
  d.T = 1;
  d.words_per_doc = 2000;
  d.docs_per_slot = 50;
  const Simulation s = SimulateCorpus(h, d);
  for (const auto& doc : s.truth.assignments)
    for (const auto& a : doc) CHECK(a.topic == 0);
  Vec freq(10, 0.0);
  double n = 0;
  for (const auto& document : s.corpus.slots[0])
    for (const auto& tc : document.counts) {
      freq[tc.term] += tc.count;
      n += tc.count;
    }
  const Vec p = PiMeanMap(s.truth.topics.beta[0][0]);
  for (int v = 0; v < 10; ++v) {
    const double se = std::sqrt(p[v] * (1 - p[v]) / n);
    CHECK(std::abs(freq[v] / n - p[v]) < 4 * se);
  }
}

TEST_CASE("simulate: zero-drift limit keeps chains constant") {
  Hyperparameters h;
  h.topics = 2;
  h.seed = 3;
  SimulationInit init;
  init.static_chains = true;
  SimulationDims d = SmallDims();
  d.T = 4;
  const Simulation s = SimulateCorpus(h, d, init);
  for (const auto& chain : s.truth.topics.beta)
    for (const auto& row : chain) CHECK(row == chain[0]);
  for (const auto& row : s.truth.mean.alpha) CHECK(row == s.truth.mean.alpha[0]);
  for (const auto& row : s.truth.label_probs.psi) CHECK(row == s.truth.initial_label_probs);
}

TEST_CASE("simulate: large kappa keeps psi near psi0") {
  Hyperparameters h;
  h.topics = 2;
  h.kappa = 1e7;
  h.seed = 12;
  SimulationInit init;
  init.psi0 = Vec{0.7, 0.2, 0.1};
  SimulationDims d = SmallDims();
  d.L = 3;
  d.T = 5;
  d.docs_per_slot = 1;
  const Simulation s = SimulateCorpus(h, d, init);
  for (const auto& psi : s.truth.label_probs.psi)
    for (int l = 0; l < 3; ++l) CHECK(std::abs(psi[l] - (*init.psi0)[l]) < 0.01);
}

TEST_CASE("simulate: label picks are uniform over a document's labels") {
  Hyperparameters h;
  h.topics = 2;
  h.seed = 77;
  SimulationDims d = SmallDims();
  d.labels_per_doc = 2;
  const Simulation s = SimulateCorpus(h, d);
  std::size_t doc = 0;
  for (const auto& slot : s.corpus.slots) {
    double first = 0.0;
    double total = 0.0;
    for (const auto& document : slot) {
      for (const auto& a : s.truth.assignments[doc]) {
        first += a.label == document.labels[0] ? 1.0 : 0.0;
        total += 1.0;
      }
      ++doc;
    }
    // Exact binomial with p = 1/2 over all tokens in the slot.
    const double se = std::sqrt(total * 0.25);
    CHECK(std::abs(first - total / 2) < 3 * se);
  }
}

TEST_CASE("simulate: infeasible dimensions") {
  Hyperparameters h;
  SimulationDims d = SmallDims();
  d.labels_per_doc = 3;
  CHECK(testing::KindOf([&] { SimulateCorpus(h, d); }) == ErrorKind::kInvalidArgument);
  SimulationInit bad;
  bad.psi0 = Vec{0.5, 0.6};
  CHECK(testing::KindOf([&] { SimulateCorpus(h, SmallDims(), bad); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("sample_dirichlet: simplex and moments") {
  Engine e = MakeEngine(1, Stream::kSimulate);
  const Vec alpha = {2.0, 3.0, 5.0};
  Vec mean(3, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vec x = SampleDirichlet(alpha, e);
    CHECK(std::abs(Sum(x) - 1.0) < 1e-12);
    for (int k = 0; k < 3; ++k) mean[k] += x[k] / n;
  }
  for (int k = 0; k < 3; ++k) {
    const double m = alpha[k] / 10.0;
    const double sd = std::sqrt(m * (1 - m) / 11.0 / n);
    CHECK(std::abs(mean[k] - m) < 4 * sd);
  }
}

}  // namespace
}  // namespace dltm
