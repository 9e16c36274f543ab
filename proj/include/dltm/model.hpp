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

// Parameter types of the dynamic labeled topic model, the natural-to-mean
// map, likelihood evaluators and the forward simulator.
//
// Index conventions: topics, labels, terms and time slots are 0-based in the
// C++ API (slot index t corresponds to Document::time_slot t + 1).

#ifndef DLTM_MODEL_HPP_
#define DLTM_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dltm/corpus.hpp"
#include "dltm/util.hpp"

namespace dltm {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;    // [i][j]
using Cube = std::vector<Mat>;   // [i][j][k]

struct Hyperparameters {
  int topics = 10;         // Z
  double sigma2 = 0.05;    // topic drift variance
  double delta2 = 0.05;    // mean-chain drift variance
  double a2 = 0.05;        // label-topic variance around the mean chain
  double kappa = 100.0;    // Dirichlet concentration scale
  std::uint64_t seed = 0;
  // Prior variance of the first slot of every topic chain during inference.
  // The initial natural parameters are unknown, so this prior is diffuse.
  double beta0_var = 10.0;

  void Validate() const;
};

// beta[z][t] is a V-vector of natural parameters.
struct TopicChains {
  Cube beta;
  std::size_t topics() const { return beta.size(); }
  std::size_t slots() const { return beta.empty() ? 0 : beta[0].size(); }
  std::size_t vocab() const { return slots() == 0 ? 0 : beta[0][0].size(); }
};

// alpha[t] is a Z-vector.
struct MeanChain {
  Mat alpha;
};

// theta[l][t] is a Z-vector.
struct LabelTopicChains {
  Cube theta;
};

// psi[t] is an L-simplex point.
struct LabelProbSeries {
  Mat psi;
};

struct TokenAssignment {
  int label = 0;  // x: index into Corpus::label_set, always one of the document's labels
  int topic = 0;  // z
};

struct SimulationTruth {
  TopicChains topics;
  MeanChain mean;
  LabelTopicChains labels;
  LabelProbSeries label_probs;
  TopicChains initial_topics;  // beta^(0), one slot
  Vec initial_mean;            // alpha^(0)
  Vec initial_label_probs;     // psi^(0)
  // assignments[d] for documents in corpus order (slot by slot), one entry
  // per token in generation order.
  std::vector<std::vector<TokenAssignment>> assignments;
};

enum class MeanMap {
  kSoftmax,  // exp(x) / sum exp(x)
  kRatio,    // x / sum x; compatibility mode, rejects negative input
};

// Maps natural parameters to a probability vector. Softmax uses max
// subtraction and is invariant to adding a constant.
Vec PiMeanMap(std::span<const double> natural, MeanMap map = MeanMap::kSoftmax);

// log of the softmax, computed stably.
Vec LogPiMeanMap(std::span<const double> natural);

double LogSumExp(std::span<const double> x);

// sum_z pi(theta_lt)_z * pi(beta_t[z]).
Vec LabelTopicWordDist(std::span<const double> theta_lt, const Mat& beta_t);

// Average of LabelTopicWordDist over the document's labels.
Vec DocWordDistribution(std::span<const int> doc_labels, const LabelTopicChains& theta,
                        const TopicChains& beta, std::size_t t);

struct ModelParams {
  TopicChains topics;
  MeanChain mean;
  LabelTopicChains labels;
  LabelProbSeries label_probs;
};

struct LogLikelihood {
  double label_part = 0.0;  // log L1
  double word_part = 0.0;   // log L2
  double total = 0.0;
  // Set when a word with positive count has probability 0 (or a present
  // label has probability 0); the affected part is then -infinity.
  bool negative_infinity = false;
};

// Full log-likelihood including multinomial coefficients:
//   label part: log L_d! + sum_{l in labels} log psi_l   (with-replacement form)
//   word part:  log N_d! - sum_v log c_v! + sum_v c_v log phi_v
LogLikelihood ComputeLogLikelihood(const Corpus& corpus, const ModelParams& params);

struct SimulationDims {
  int T = 3;
  int L = 3;
  int V = 50;
  int docs_per_slot = 100;
  int words_per_doc = 80;
  int labels_per_doc = 1;
  // Optional per-slot override of words_per_doc.
  std::vector<int> words_per_slot;
};

struct SimulationInit {
  std::optional<Mat> beta0;  // [z] V-vectors; default: N(0, 0.01) per entry
  std::optional<Vec> alpha0;  // default: zeros
  std::optional<Vec> psi0;    // default: uniform
  // When set, psi^(t) is taken from here instead of the Dirichlet step.
  std::optional<Mat> psi_schedule;
  // Zero-drift limit: beta, alpha and psi stay at their initial values.
  bool static_chains = false;
};

struct Simulation {
  Corpus corpus;
  SimulationTruth truth;
};

// Forward simulation of the generative process. Labels per document are
// drawn without replacement by sequential renormalized draws from psi^(t).
// Each simulated document records meta["words"] = its token count.
Simulation SimulateCorpus(const Hyperparameters& hyper, const SimulationDims& dims,
                          const SimulationInit& init = {});

// Dirichlet draw via normalized independent Gamma variates. Shapes below
// 1e-10 are floored so that a component that hit zero can recover.
Vec SampleDirichlet(std::span<const double> alpha, Engine& engine);

// Synthetic vocabulary whose lexicographic order equals index order.
std::vector<std::string> SyntheticTerms(int V);

// Sidecar JSON with the chains and token assignments.
std::string TruthToJson(const SimulationTruth& truth);
SimulationTruth TruthFromJson(const std::string& text);

}  // namespace dltm

#endif  // DLTM_MODEL_HPP_
