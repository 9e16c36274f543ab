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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dltm/reporting.hpp"
#include "dltm/util.hpp"
#include "dltm/variational.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace dltm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Posterior of a scalar Gaussian random walk by dense conditioning.
SmoothedChain DenseOracle(const Vec& obs, const Vec& obs_var, double drift, double m0, double v0) {
  const int T = static_cast<int>(obs.size());
  Eigen::MatrixXd prior(T, T);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j) prior(i, j) = v0 + drift * std::min(i, j);
  std::vector<int> seen;
  for (int t = 0; t < T; ++t)
    if (std::isfinite(obs_var[t])) seen.push_back(t);
  Eigen::VectorXd mean = Eigen::VectorXd::Constant(T, m0);
  Eigen::MatrixXd cov = prior;
  if (!seen.empty()) {
    const int K = static_cast<int>(seen.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(K, T);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(K, K);
    Eigen::VectorXd y(K);
    for (int k = 0; k < K; ++k) {
      H(k, seen[k]) = 1.0;
      R(k, k) = obs_var[seen[k]];
      y(k) = obs[seen[k]];
    }
    const Eigen::MatrixXd S = H * prior * H.transpose() + R;
    const Eigen::MatrixXd gain = prior * H.transpose() * S.inverse();
    mean += gain * (y - H * mean);
    cov -= gain * H * prior;
  }
  SmoothedChain out{Vec(T), Vec(T)};
  for (int t = 0; t < T; ++t) {
    out.mean[t] = mean(t);
    out.var[t] = cov(t, t);
  }
  return out;
}

TEST_CASE("kalman: single slot is a precision-weighted average") {
  const SmoothedChain s = KalmanSmoothChain(Vec{4.0}, Vec{1.0}, 0.5, 0.0, 3.0);
  CHECK(std::abs(s.mean[0] - 3.0) < 1e-15);  // (0/3 + 4/1) / (1/3 + 1)
  CHECK(std::abs(s.var[0] - 0.75) < 1e-15);
}

TEST_CASE("kalman: no information returns the prior") {
  const SmoothedChain s = KalmanSmoothChain(Vec{1, 2, 3, 4}, Vec(4, kInf), 0.3, 1.5, 2.0);
  for (int t = 0; t < 4; ++t) {
    CHECK(s.mean[t] == 1.5);
    CHECK(std::abs(s.var[t] - (2.0 + 0.3 * t)) < 1e-12);
  }
}

TEST_CASE("kalman: unit variances on (1, 2, 3) match dense conditioning") {
  const Vec obs = {1, 2, 3};
  const Vec var = {1, 1, 1};
  const SmoothedChain s = KalmanSmoothChain(obs, var, 1.0, 0.0, 1.0);
  const SmoothedChain d = DenseOracle(obs, var, 1.0, 0.0, 1.0);
  for (int t = 0; t < 3; ++t) {
    CHECK(std::abs(s.mean[t] - d.mean[t]) < 1e-10);
    CHECK(std::abs(s.var[t] - d.var[t]) < 1e-10);
  }
}

TEST_CASE("kalman: random chains with missing slots match dense conditioning") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int rep = 0; rep < 300; ++rep) {
    const int T = 1 + rep % 5;
    Vec obs(T), var(T);
    for (int t = 0; t < T; ++t) {
      obs[t] = n(rng);
      var[t] = rng() % 4 == 0 ? kInf : u(rng);
    }
    const double drift = u(rng), m0 = n(rng), v0 = u(rng);
    const SmoothedChain s = KalmanSmoothChain(obs, var, drift, m0, v0);
    const SmoothedChain d = DenseOracle(obs, var, drift, m0, v0);
    for (int t = 0; t < T; ++t) {
      CHECK(std::abs(s.mean[t] - d.mean[t]) < 1e-10);
      CHECK(std::abs(s.var[t] - d.var[t]) < 1e-10);
      CHECK(s.var[t] > 0);
    }
  }
}

TEST_CASE("kalman: argument checks") {
  CHECK(testing::KindOf([] { KalmanSmoothChain(Vec{}, Vec{}, 1, 0, 1); }) == ErrorKind::kInvalidArgument);
  CHECK(testing::KindOf([] { KalmanSmoothChain(Vec{1}, Vec{0}, 1, 0, 1); }) == ErrorKind::kInvalidArgument);
  CHECK(testing::KindOf([] { KalmanSmoothChain(Vec{1}, Vec{1}, -1, 0, 1); }) == ErrorKind::kInvalidArgument);
  CHECK(testing::KindOf([] { KalmanSmoothChain(Vec{1}, Vec{1, 1}, 1, 0, 1); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("reweight_pseudo_docs") {
  Corpus c = testing::MakeCorpus(1, {"A", "B", "C", "D"}, {"w", "x"});
  testing::Add(c, testing::MakeDoc("one", 1, {2}, {1, 1}));
  testing::Add(c, testing::MakeDoc("four", 1, {0, 1, 2, 3}, {2, 0}));
  const auto p = ReweightPseudoDocs(c);
  REQUIRE(p.size() == 5);
  CHECK(p[0].weight == 1.0);
  CHECK(p[0].label == 2);
  for (int i = 1; i < 5; ++i) {
    CHECK(p[i].weight == 0.25);
    CHECK(p[i].label == i - 1);
    CHECK(p[i].doc_id == "four");
    CHECK(p[i].doc == 1);
  }

  Corpus d = testing::MakeCorpus(1, {"A", "B", "C"}, {"w"});
  testing::Add(d, testing::MakeDoc("x", 1, {1}, {1}));
  testing::Add(d, testing::MakeDoc("y", 1, {0, 1, 2}, {1}));
  const auto q = ReweightPseudoDocs(d);
  CHECK(q.size() == 4);
  std::vector<int> per_label(3, 0);
  for (const auto& pd : q) ++per_label[static_cast<std::size_t>(pd.label)];
  CHECK(per_label == LabelFrequency(d)[0]);
}

// Hand-settable state for T = 1.
VariationalState ManualState(const Mat& beta_t, const Mat& theta_t) {
  VariationalState s;
  const std::size_t Z = beta_t.size();
  for (const Vec& b : beta_t) {
    s.beta_mean.push_back({b});
    s.beta_var.push_back({Vec(b.size(), 1.0)});
  }
  for (const Vec& th : theta_t) {
    s.theta_mean.push_back({th});
    s.theta_var.push_back({Vec(Z, 1.0)});
  }
  s.alpha_mean = {Vec(Z, 0.0)};
  s.alpha_var = {Vec(Z, 1.0)};
  return s;
}

TEST_CASE("e_step: hand oracle") {
  Corpus c = testing::MakeCorpus(1, {"A"}, {"a", "b", "c"});
  testing::Add(c, testing::MakeDoc("d", 1, {0}, {2, 1, 3}));
  const auto pseudo = ReweightPseudoDocs(c);
  const Mat beta = {{0.2, -1.0, 0.7}, {1.5, 0.3, -0.4}};
  VariationalState s = ManualState(beta, {{0.4, -0.3}});
  const ExpectedCounts n = EStep(pseudo, s);
  for (int v = 0; v < 3; ++v) {
    double w[2];
    for (int z = 0; z < 2; ++z) {
      double norm = 0;
      for (double b : beta[z]) norm += std::exp(b);
      w[z] = std::exp(z == 0 ? 0.4 : -0.3) * std::exp(beta[z][v]) / norm;
    }
    for (int z = 0; z < 2; ++z) CHECK(std::abs(s.resp[0][v * 2 + z] - w[z] / (w[0] + w[1])) < 1e-12);
  }
  const std::vector<int> counts = {2, 1, 3};
  for (int z = 0; z < 2; ++z) {
    double total = 0;
    for (int v = 0; v < 3; ++v) {
      CHECK(std::abs(n.topic_word[z][0][v] - counts[v] * s.resp[0][v * 2 + z]) < 1e-12);
      total += n.topic_word[z][0][v];
    }
    CHECK(std::abs(n.label_topic[0][0][z] - total) < 1e-12);
  }
}

TEST_CASE("e_step: single topic and symmetric topics") {
  Corpus c = testing::MakeCorpus(1, {"A", "B"}, {"a", "b"});
  testing::Add(c, testing::MakeDoc("d", 1, {0, 1}, {3, 1}));
  const auto pseudo = ReweightPseudoDocs(c);
  VariationalState one = ManualState({{0.1, 0.9}}, {{0.0}, {0.0}});
  const ExpectedCounts n = EStep(pseudo, one);
  for (const Vec& r : one.resp)
    for (double x : r) CHECK(x == 1.0);
  CHECK(n.topic_word[0][0] == Vec{3.0, 1.0});

  VariationalState sym = ManualState({{0.1, 0.9}, {0.1, 0.9}}, {{0.2, 0.2}, {-1.0, -1.0}});
  EStep(pseudo, sym);
  for (const Vec& r : sym.resp)
    for (double x : r) CHECK(x == 0.5);
}

TEST_CASE("e_step: rejects non-finite state") {
  Corpus c = testing::MakeCorpus(1, {"A"}, {"a"});
  testing::Add(c, testing::MakeDoc("d", 1, {0}, {1}));
  const auto pseudo = ReweightPseudoDocs(c);
  VariationalState s = ManualState({{NAN}}, {{0.0}});
  CHECK(testing::KindOf([&] { EStep(pseudo, s); }) == ErrorKind::kNumerical);
}

Simulation Sim(int T, int L, int Z, int V, int docs, int words, int lpd, std::uint64_t seed) {
  Hyperparameters h;
  h.topics = Z;
  h.seed = seed;
  SimulationDims d;
  d.T = T;
  d.L = L;
  d.V = V;
  d.docs_per_slot = docs;
  d.words_per_doc = words;
  d.labels_per_doc = lpd;
  return SimulateCorpus(h, d);
}

TEST_CASE("e_step: normalisation and mass conservation") {
  const Simulation sim = Sim(3, 3, 4, 30, 20, 40, 2, 6);
  Hyperparameters h;
  h.topics = 4;
  h.seed = 6;
  const auto pseudo = ReweightPseudoDocs(sim.corpus);
  VariationalState s = InitialState(sim.corpus, h);
  const ExpectedCounts n = EStep(pseudo, s);
  for (const Vec& r : s.resp)
    for (std::size_t k = 0; k < r.size() / 4; ++k) {
      double sum = 0;
      for (int z = 0; z < 4; ++z) sum += r[k * 4 + z];
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
  for (std::size_t t = 0; t < 3; ++t) {
    double mass = 0;
    for (const auto& d : sim.corpus.slots[t]) mass += d.token_total;
    double counted = 0;
    for (int z = 0; z < 4; ++z)
      for (double x : n.topic_word[z][t]) counted += x;
    CHECK(std::abs(counted - mass) < 1e-9);
    double label_mass = 0;
    for (int l = 0; l < 3; ++l)
      for (double x : n.label_topic[l][t]) label_mass += x;
    CHECK(std::abs(label_mass - mass) < 1e-9);
  }
}

TEST_CASE("elbo: single topic reduces to the weighted multinomial term") {
  Corpus c = testing::MakeCorpus(1, {"A"}, {"a", "b", "c"});
  testing::Add(c, testing::MakeDoc("d", 1, {0}, {2, 0, 5}));
  const auto pseudo = ReweightPseudoDocs(c);
  const Vec beta = {0.3, 1.0, -0.6};
  VariationalState s = ManualState({beta}, {{0.25}});
  EStep(pseudo, s);
  const Vec p = PiMeanMap(beta);
  const double expected = 2 * std::log(p[0]) + 5 * std::log(p[2]);
  CHECK(std::abs(ElboDataTerm(pseudo, s) - expected) < 1e-12);
  Hyperparameters h;
  h.topics = 1;
  CHECK(std::abs(Elbo(pseudo, s, h) - (expected + ElboPriorTerm(s, h))) < 1e-12);
}

TEST_CASE("elbo: duplicating documents at half weight keeps the data term") {
  Corpus c = testing::MakeCorpus(1, {"A", "B"}, {"a", "b", "c"});
  testing::Add(c, testing::MakeDoc("d", 1, {0}, {1, 4, 2}));
  testing::Add(c, testing::MakeDoc("e", 1, {1}, {3, 0, 1}));
  std::vector<PseudoDoc> single = ReweightPseudoDocs(c);
  std::vector<PseudoDoc> doubled;
  for (PseudoDoc p : single) {
    p.weight *= 0.5;
    doubled.push_back(p);
    doubled.push_back(p);
  }
  VariationalState a = ManualState({{0.1, 0.2, -0.3}, {1.0, -1.0, 0.5}}, {{0.3, 0.1}, {-0.2, 0.4}});
  VariationalState b = a;
  EStep(single, a);
  EStep(doubled, b);
  CHECK(std::abs(ElboDataTerm(single, a) - ElboDataTerm(doubled, b)) < 1e-9);
}

TEST_CASE("elbo: the e-step responsibilities are a maximum") {
  Corpus c = testing::MakeCorpus(1, {"A"}, {"a", "b", "c"});
  testing::Add(c, testing::MakeDoc("d", 1, {0}, {2, 1, 3}));
  const auto pseudo = ReweightPseudoDocs(c);
  VariationalState s = ManualState({{0.2, -1.0, 0.7}, {1.5, 0.3, -0.4}}, {{0.4, -0.3}});
  EStep(pseudo, s);
  const double best = ElboDataTerm(pseudo, s);
  for (int k = 0; k < 3; ++k) {
    for (double eps : {-0.2, -0.05, -0.001, 0.001, 0.05, 0.2}) {
      VariationalState q = s;
      double& r0 = q.resp[0][k * 2];
      double& r1 = q.resp[0][k * 2 + 1];
      const double moved = std::clamp(r0 + eps, 1e-9, 1 - 1e-9);
      r0 = moved;
      r1 = 1.0 - moved;
      CHECK(ElboDataTerm(pseudo, q) < best);
    }
  }
}

TEST_CASE("m_step: all mass in one topic") {
  Corpus c = testing::MakeCorpus(2, {"A", "B"}, {"a", "b"});
  testing::Add(c, testing::MakeDoc("d", 1, {0}, {1, 1}));
  Hyperparameters h;
  h.topics = 2;
  VariationalState s = InitialState(c, h);
  ExpectedCounts n;
  n.topic_word.assign(2, Mat(2, Vec(2, 0.0)));
  n.topic_word[0] = {{2500.0, 2500.0}, {2500.0, 2500.0}};
  n.label_topic.assign(2, Mat(2, Vec{5000.0, 0.0}));
  for (int i = 0; i < 30; ++i) MStep(n, h, s);
  for (int l = 0; l < 2; ++l)
    for (int t = 0; t < 2; ++t) CHECK(PiMeanMap(s.theta_mean[l][t])[0] >= 0.99);
}

TEST_CASE("m_step: variances are positive") {
  const Simulation sim = Sim(3, 2, 2, 20, 10, 30, 1, 2);
  Hyperparameters h;
  h.topics = 2;
  const auto pseudo = ReweightPseudoDocs(sim.corpus);
  VariationalState s = InitialState(sim.corpus, h);
  MStep(EStep(pseudo, s), h, s);
  for (const auto& m : s.beta_var)
    for (const auto& r : m)
      for (double v : r) CHECK(v > 0);
  for (const auto& m : s.theta_var)
    for (const auto& r : m)
      for (double v : r) CHECK(v > 0);
  for (const auto& r : s.alpha_var)
    for (double v : r) CHECK(v > 0);
}

FitOptions Tight() {
  FitOptions o;
  o.rel_tol = 1e-13;
  o.max_iter = 500;
  o.psi_chains = 20;
  return o;
}

TEST_CASE("fit: large drift tracks each slot separately") {
  Corpus c = testing::MakeCorpus(2, {"A"}, {"a", "b", "c"});
  testing::Add(c, testing::MakeDoc("1", 1, {0}, {60, 30, 10}));
  testing::Add(c, testing::MakeDoc("2", 2, {0}, {5, 15, 80}));
  Hyperparameters h;
  h.topics = 1;
  h.sigma2 = 1e6;
  h.beta0_var = 1e6;
  const FittedModel m = FitDltm(c, h, Tight());
  const Mat freq = {{0.6, 0.3, 0.1}, {0.05, 0.15, 0.8}};
  for (int t = 0; t < 2; ++t) {
    const Vec p = PiMeanMap(m.topics.beta[0][t]);
    for (int v = 0; v < 3; ++v) CHECK(std::abs(p[v] - freq[t][v]) < 1e-3);
  }
}

TEST_CASE("fit: an empty slot is interpolated between its neighbours") {
  Corpus c = testing::MakeCorpus(3, {"A"}, {"a", "b", "c"});
  testing::Add(c, testing::MakeDoc("1", 1, {0}, {20, 5, 5}));
  testing::Add(c, testing::MakeDoc("3", 3, {0}, {4, 4, 22}));
  Hyperparameters h;
  h.topics = 1;
  h.sigma2 = 0.3;
  const FittedModel m = FitDltm(c, h, Tight());
  const Mat& b = m.topics.beta[0];
  for (int v = 0; v < 3; ++v) CHECK(std::abs(b[1][v] - 0.5 * (b[0][v] + b[2][v])) < 1e-9);
}

TEST_CASE("fit: single topic converges fast to slot frequencies") {
  const Simulation sim = Sim(3, 2, 1, 25, 60, 80, 1, 31);
  Hyperparameters h;
  h.topics = 1;
  h.seed = 31;
  FitOptions o;
  o.psi_chains = 50;
  const FittedModel m = FitDltm(sim.corpus, h, o);
  CHECK(m.diagnostics.converged);
  CHECK(m.diagnostics.iterations <= 3);
  for (std::size_t t = 0; t < 3; ++t) {
    Vec freq(25, 0.0);
    double n = 0;
    for (const auto& d : sim.corpus.slots[t])
      for (const auto& tc : d.counts) {
        freq[static_cast<std::size_t>(tc.term)] += tc.count;
        n += tc.count;
      }
    for (double& f : freq) f /= n;
    CHECK(TotalVariation(PiMeanMap(m.topics.beta[0][t]), freq) < 0.05);
  }
}

TEST_CASE("fit: huge tolerance stops after one iteration") {
  const Simulation sim = Sim(2, 2, 2, 15, 10, 20, 1, 3);
  Hyperparameters h;
  h.topics = 2;
  FitOptions o;
  o.rel_tol = 1e6;
  o.psi_chains = 10;
  const FittedModel m = FitDltm(sim.corpus, h, o);
  CHECK(m.diagnostics.iterations == 1);
  CHECK(m.diagnostics.converged);
  CHECK(m.diagnostics.elbo_trace.size() == 2);
}

TEST_CASE("fit: max_iter without convergence is reported") {
  const Simulation sim = Sim(2, 2, 3, 15, 10, 20, 1, 3);
  Hyperparameters h;
  h.topics = 3;
  FitOptions o;
  o.rel_tol = 0.0;
  o.max_iter = 2;
  o.psi_chains = 10;
  const FittedModel m = FitDltm(sim.corpus, h, o);
  CHECK(m.diagnostics.iterations == 2);
  CHECK(!m.diagnostics.converged);
}

TEST_CASE("fit: objective is non-decreasing") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Simulation sim = Sim(3, 3, 3, 30, 30, 50, 1 + static_cast<int>(seed % 2), seed);
    Hyperparameters h;
    h.topics = 3;
    h.seed = seed;
    FitOptions o = Tight();
    o.max_iter = 60;
    const FittedModel m = FitDltm(sim.corpus, h, o);
    const Vec& tr = m.diagnostics.elbo_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      CHECK(std::isfinite(tr[i]));
      CHECK(tr[i] >= tr[i - 1] - 1e-6 * std::abs(tr[i - 1]));
    }
  }
}

TEST_CASE("fit: results do not depend on the thread count") {
  const Simulation sim = Sim(3, 3, 3, 40, 30, 50, 2, 12);
  Hyperparameters h;
  h.topics = 3;
  h.seed = 12;
  FitOptions o;
  o.psi_chains = 100;
  o.threads = 1;
  const std::string one = ModelToJson(FitDltm(sim.corpus, h, o));
  o.threads = 3;
  CHECK(ModelToJson(FitDltm(sim.corpus, h, o)) == one);
}

TEST_CASE("fit: permuting label identifiers permutes theta") {
  const Simulation sim = Sim(2, 3, 2, 20, 30, 40, 2, 8);
  Corpus b = sim.corpus;
  b.label_set = {sim.corpus.label_set[2], sim.corpus.label_set[0], sim.corpus.label_set[1]};
  const std::vector<int> to_b = {1, 2, 0};
  for (auto& slot : b.slots)
    for (auto& d : slot)
      for (int& l : d.labels) l = to_b[static_cast<std::size_t>(l)];
  Hyperparameters h;
  h.topics = 2;
  h.seed = 8;
  FitOptions o;
  o.psi_chains = 10;
  const FittedModel ma = FitDltm(sim.corpus, h, o);
  const FittedModel mb = FitDltm(b, h, o);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t v = 0; v < 20; ++v)
        CHECK(std::abs(ma.topics.beta[z][t][v] - mb.topics.beta[z][t][v]) < 1e-9);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t z = 0; z < 2; ++z)
        CHECK(std::abs(ma.labels.theta[l][t][z] -
                       mb.labels.theta[static_cast<std::size_t>(to_b[l])][t][z]) < 1e-9);
}

TEST_CASE("fit: argument checks") {
  Corpus empty = testing::MakeCorpus(1, {"A"}, {"a"});
  Hyperparameters h;
  CHECK(testing::KindOf([&] { FitDltm(empty, h); }) == ErrorKind::kInvalidArgument);
  const Simulation sim = Sim(1, 1, 1, 5, 2, 5, 1, 1);
  h.sigma2 = 0.0;
  CHECK(testing::KindOf([&] { FitDltm(sim.corpus, h); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("model bundle round trip") {
  const Simulation sim = Sim(2, 2, 2, 12, 10, 20, 1, 5);
  Hyperparameters h;
  h.topics = 2;
  h.seed = 5;
  FitOptions o;
  o.psi_chains = 30;
  const FittedModel m = FitDltm(sim.corpus, h, o);
  const std::string text = ModelToJson(m);
  const FittedModel back = ModelFromJson(text);
  CHECK(ModelToJson(back) == text);
  CHECK(back.topics.beta == m.topics.beta);
  CHECK(back.psi.mean == m.psi.mean);
  CHECK(back.corpus_hash == Sha256Hex(CorpusToCanonical(sim.corpus)));
  testing::TempDir dir("bundle");
  SaveModel(m, dir.File("m.json"));
  CHECK(ModelToJson(LoadModel(dir.File("m.json"))) == text);
  CHECK(testing::KindOf([] { ModelFromJson("{}"); }) == ErrorKind::kData);
  CHECK(testing::KindOf([] { ModelFromJson("not json"); }) == ErrorKind::kData);
  std::string tampered = text;
  tampered.replace(tampered.find("\"vocabulary_hash\":\"") + 19, 1, "0");
  if (tampered != text) CHECK(testing::KindOf([&] { ModelFromJson(tampered); }) == ErrorKind::kData);
}

}  // namespace
}  // namespace dltm
