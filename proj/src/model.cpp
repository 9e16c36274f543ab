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

#include "dltm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dltm/error.hpp"

namespace dltm {

void Hyperparameters::Validate() const {
  Require(topics >= 1, "topic count must be >= 1");
  Require(sigma2 > 0 && std::isfinite(sigma2), "sigma2 must be positive");
  Require(delta2 > 0 && std::isfinite(delta2), "delta2 must be positive");
  Require(a2 > 0 && std::isfinite(a2), "a2 must be positive");
  Require(kappa > 0 && std::isfinite(kappa), "kappa must be positive");
  Require(beta0_var > 0 && std::isfinite(beta0_var), "beta0_var must be positive");
}

double LogSumExp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

Vec PiMeanMap(std::span<const double> natural, MeanMap map) {
  Require(!natural.empty(), "mean map of an empty vector");
  for (double v : natural) {
    if (!std::isfinite(v)) Fail(ErrorKind::kNumerical, "mean map input is not finite");
  }
  Vec out(natural.size());
  if (map == MeanMap::kRatio) {
    double s = 0.0;
    for (double v : natural) {
      Require(v >= 0.0, "ratio mean map requires non-negative parameters");
      s += v;
    }
    Require(s > 0.0, "ratio mean map requires a positive sum");
    for (std::size_t i = 0; i < natural.size(); ++i) out[i] = natural[i] / s;
    return out;
  }
  const double m = *std::max_element(natural.begin(), natural.end());
  double s = 0.0;
  for (std::size_t i = 0; i < natural.size(); ++i) {
    out[i] = std::exp(natural[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return out;
}

Vec LogPiMeanMap(std::span<const double> natural) {
  const double lse = LogSumExp(natural);
  Vec out(natural.begin(), natural.end());
  for (double& v : out) v -= lse;
  return out;
}

Vec LabelTopicWordDist(std::span<const double> theta_lt, const Mat& beta_t) {
  Require(theta_lt.size() == beta_t.size(), "theta has " + std::to_string(theta_lt.size()) +
                                                " topics but beta has " +
                                                std::to_string(beta_t.size()));
  Require(!beta_t.empty(), "no topics");
  const Vec weights = PiMeanMap(theta_lt);
  const std::size_t V = beta_t[0].size();
  Vec phi(V, 0.0);
  for (std::size_t z = 0; z < beta_t.size(); ++z) {
    Require(beta_t[z].size() == V, "topic vectors differ in length");
    const Vec p = PiMeanMap(beta_t[z]);
    for (std::size_t v = 0; v < V; ++v) phi[v] += weights[z] * p[v];
  }
  return phi;
}

namespace {

Mat SliceSlot(const TopicChains& beta, std::size_t t) {
  Mat beta_t;
  beta_t.reserve(beta.topics());
  for (const auto& chain : beta.beta) beta_t.push_back(chain[t]);
  return beta_t;
}

}  // namespace

Vec DocWordDistribution(std::span<const int> doc_labels, const LabelTopicChains& theta,
                        const TopicChains& beta, std::size_t t) {
  Require(!doc_labels.empty(), "document has an empty label list");
  Require(t < beta.slots(), "time slot out of range");
  const Mat beta_t = SliceSlot(beta, t);
  Vec phi(beta.vocab(), 0.0);
  for (int l : doc_labels) {
    Require(l >= 0 && static_cast<std::size_t>(l) < theta.theta.size(), "label index out of range");
    const Vec part = LabelTopicWordDist(theta.theta[static_cast<std::size_t>(l)][t], beta_t);
    for (std::size_t v = 0; v < phi.size(); ++v) phi[v] += part[v];
  }
  const double inv = 1.0 / static_cast<double>(doc_labels.size());
  for (double& v : phi) v *= inv;
  return phi;
}

LogLikelihood ComputeLogLikelihood(const Corpus& corpus, const ModelParams& params) {
  LogLikelihood ll;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < corpus.slots.size(); ++t) {
    if (corpus.slots[t].empty()) continue;
    Require(t < params.label_probs.psi.size(), "psi has too few slots");
    Require(t < params.topics.slots(), "beta has too few slots");
    const Vec& psi = params.label_probs.psi[t];
    Require(psi.size() == corpus.num_labels(), "psi dimension differs from label count");
    Require(params.labels.theta.size() == corpus.num_labels(),
            "theta label count differs from corpus");

    // Per-label word distributions for this slot, computed lazily.
    const Mat beta_t = SliceSlot(params.topics, t);
    std::vector<Vec> label_phi(corpus.num_labels());
    auto phi_of = [&](int l) -> const Vec& {
      Vec& cached = label_phi[static_cast<std::size_t>(l)];
      if (cached.empty()) {
        cached = LabelTopicWordDist(params.labels.theta[static_cast<std::size_t>(l)][t], beta_t);
      }
      return cached;
    };

    for (const auto& doc : corpus.slots[t]) {
      double label_ll = std::lgamma(static_cast<double>(doc.labels.size()) + 1.0);
      for (int l : doc.labels) {
        const double p = psi[static_cast<std::size_t>(l)];
        if (p <= 0.0) {
          ll.negative_infinity = true;
          label_ll = neg_inf;
          break;
        }
        label_ll += std::log(p);
      }
      ll.label_part += label_ll;

      const double inv = 1.0 / static_cast<double>(doc.labels.size());
      double word_ll = std::lgamma(static_cast<double>(doc.token_total) + 1.0);
      for (const auto& tc : doc.counts) {
        double p = 0.0;
        for (int l : doc.labels) p += phi_of(l).at(static_cast<std::size_t>(tc.term));
        p *= inv;
        if (p <= 0.0) {
          ll.negative_infinity = true;
          word_ll = neg_inf;
          break;
        }
        word_ll += tc.count * std::log(p) - std::lgamma(tc.count + 1.0);
      }
      ll.word_part += word_ll;
    }
  }
  ll.total = ll.label_part + ll.word_part;
  return ll;
}

}  // namespace dltm
