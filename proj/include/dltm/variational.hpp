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

// Topic-side inference: variational EM over 1/L_d-reweighted pseudo-documents
// with Gaussian random-walk chains on the natural parameters.
//
// The objective maximised by fit is
//
//   F = sum_p w_p sum_v c_pv sum_z r_pvz [log pi(theta_lt)_z
//                                         + log pi(beta_zt)_v - log r_pvz]
//       + log p(beta chains) + log p(theta | alpha) + log p(alpha chain)
//
// with the chain priors evaluated at the smoothed means:
//   beta_z,1,v ~ N(0, beta0_var),  beta_z,t,v ~ N(beta_z,t-1,v, sigma2)
//   alpha_1,z  ~ N(0, delta2),     alpha_t,z  ~ N(alpha_t-1,z, delta2)
//   theta_l,t,z ~ N(alpha_t,z, a2)
//
// The E-step maximises F over r exactly. The M-step updates beta, then theta,
// then alpha; each block update never decreases F, so F is monotone over
// iterations.

#ifndef DLTM_VARIATIONAL_HPP_
#define DLTM_VARIATIONAL_HPP_

#include <span>
#include <string>
#include <vector>

#include "dltm/corpus.hpp"
#include "dltm/label_probs.hpp"
#include "dltm/model.hpp"

namespace dltm {

// One (document, label) pair carrying the document's counts at weight 1/L_d.
struct PseudoDoc {
  std::size_t doc = 0;  // position in corpus order
  std::string_view doc_id;
  int label = 0;
  int slot = 0;  // 0-based
  std::span<const TermCount> counts;
  double weight = 1.0;
};

// Document order, then label order. Views into `corpus`, which must outlive
// the result.
std::vector<PseudoDoc> ReweightPseudoDocs(const Corpus& corpus);

struct VariationalState {
  Cube beta_mean;   // [z][t][v]
  Cube beta_var;    // [z][t][v]
  Cube theta_mean;  // [l][t][z]
  Cube theta_var;   // [l][t][z]
  Mat alpha_mean;   // [t][z]
  Mat alpha_var;    // [t][z]
  // resp[p][k * Z + z] for the k-th nonzero term of pseudo-document p.
  std::vector<Vec> resp;
  Vec elbo_trace;

  std::size_t topics() const { return beta_mean.size(); }
  std::size_t slots() const { return alpha_mean.size(); }
  std::size_t vocab() const { return beta_mean.empty() ? 0 : beta_mean[0][0].size(); }
  std::size_t labels() const { return theta_mean.size(); }
};

struct ExpectedCounts {
  Cube topic_word;   // [z][t][v], weighted expected counts
  Cube label_topic;  // [l][t][z]
};

// Allocates a state for the corpus dimensions. Topic chains start at the log
// of add-one smoothed corpus-wide frequencies plus seeded N(0, 0.01) jitter
// per (topic, term); theta and alpha start at zero.
VariationalState InitialState(const Corpus& corpus, const Hyperparameters& hyper);

// Fills state.resp and returns the expected counts.
ExpectedCounts EStep(std::span<const PseudoDoc> pseudo, VariationalState& state,
                     int threads = 1);

struct SmoothedChain {
  Vec mean;
  Vec var;
};

// Forward filter / RTS smoother for x_1 ~ N(init_mean, init_var),
// x_t = x_{t-1} + N(0, drift_var), y_t = x_t + N(0, obs_var_t).
// An infinite obs_var marks a missing observation.
SmoothedChain KalmanSmoothChain(std::span<const double> obs, std::span<const double> obs_var,
                                double drift_var, double init_mean, double init_var);

struct MStepOptions {
  int threads = 1;
  // theta/alpha block sweeps per M-step.
  int label_sweeps = 2;
};

void MStep(const ExpectedCounts& counts, const Hyperparameters& hyper, VariationalState& state,
           const MStepOptions& options = {});

// The objective F above, using state.resp.
double Elbo(std::span<const PseudoDoc> pseudo, const VariationalState& state,
            const Hyperparameters& hyper, int threads = 1);

// Pieces of F, exposed for tests.
double ElboDataTerm(std::span<const PseudoDoc> pseudo, const VariationalState& state,
                    int threads = 1);
double ElboPriorTerm(const VariationalState& state, const Hyperparameters& hyper);

struct FitOptions {
  int max_iter = 200;
  double rel_tol = 1e-5;
  int threads = 1;
  int psi_chains = 1000;
  double psi_level = 0.95;
};

struct FitDiagnostics {
  int iterations = 0;
  double final_elbo = 0.0;
  bool converged = false;
  Vec elbo_trace;  // entry 0 is the objective at initialisation
};

struct FittedModel {
  Hyperparameters hyper;
  int T = 0;
  std::vector<std::string> label_set;
  Vocabulary vocabulary;
  TopicChains topics;        // smoothed means
  LabelTopicChains labels;   // smoothed means
  MeanChain mean;            // smoothed means
  PsiPosterior psi;
  FitDiagnostics diagnostics;
  std::vector<std::vector<int>> label_frequency;  // [t][l]
  std::string corpus_hash;
  FitOptions options;
};

// Alternates EStep / MStep until the relative change of F drops below
// rel_tol or max_iter iterations ran, then fits the label probabilities.
// Throws kNumerical with the iteration number if F becomes non-finite.
FittedModel FitDltm(const Corpus& corpus, const Hyperparameters& hyper,
                    const FitOptions& options = {});

// Versioned JSON bundle. PsiPosterior samples are not stored.
std::string ModelToJson(const FittedModel& model);
FittedModel ModelFromJson(const std::string& text);
void SaveModel(const FittedModel& model, const std::string& path);
FittedModel LoadModel(const std::string& path);

}  // namespace dltm

#endif  // DLTM_VARIATIONAL_HPP_
