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

#include "dltm/label_probs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dltm/error.hpp"
#include "dltm/util.hpp"

namespace dltm {

Vec DirichletPosterior(std::span<const double> prior, std::span<const int> counts) {
  Require(prior.size() == counts.size(), "prior and counts differ in dimension");
  Vec out(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    Require(prior[i] > 0.0 && std::isfinite(prior[i]), "Dirichlet prior entries must be positive");
    Require(counts[i] >= 0, "counts must be non-negative");
    out[i] = prior[i] + counts[i];
  }
  return out;
}

std::vector<int> LabelCounts(const Corpus& corpus, std::size_t t) {
  Require(t < static_cast<std::size_t>(corpus.T), "time slot out of range");
  std::vector<int> counts(corpus.num_labels(), 0);
  for (const auto& doc : corpus.slots[t]) {
    for (int l : doc.labels) ++counts[static_cast<std::size_t>(l)];
  }
  return counts;
}

double EmpiricalQuantile(std::span<const double> sorted, double p) {
  Require(!sorted.empty(), "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> CredibleInterval(std::span<const double> samples, double level) {
  Require(!samples.empty(), "credible interval of an empty sample");
  Require(level >= 0.0 && level < 1.0, "level must be in [0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return {EmpiricalQuantile(sorted, tail), EmpiricalQuantile(sorted, 1.0 - tail)};
}

PsiPosterior FitLabelProbs(const Corpus& corpus, const LabelProbOptions& options) {
  Require(corpus.T >= 1, "corpus has no time slots");
  Require(options.chains >= 1, "need at least one chain");
  Require(options.level > 0.0 && options.level < 1.0, "level must be in (0, 1)");
  Require(options.kappa > 0.0 && std::isfinite(options.kappa), "kappa must be positive");
  const std::size_t T = static_cast<std::size_t>(corpus.T);
  const std::size_t L = corpus.num_labels();
  Require(L >= 1, "corpus has no labels");

  std::vector<std::vector<int>> counts(T);
  for (std::size_t t = 0; t < T; ++t) counts[t] = LabelCounts(corpus, t);

  std::vector<std::size_t> draw_order(L);
  std::iota(draw_order.begin(), draw_order.end(), 0);
  std::sort(draw_order.begin(), draw_order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.label_set[a] < corpus.label_set[b];
  });

  PsiPosterior post;
  post.level = options.level;
  post.samples.assign(static_cast<std::size_t>(options.chains), Mat(T, Vec(L)));
  ParallelFor(static_cast<std::size_t>(options.chains), options.threads, [&](std::size_t s) {
    Engine engine = MakeEngine(options.seed, Stream::kLabelChains, s);
    Vec prior(L, options.kappa / static_cast<double>(L));
    for (std::size_t t = 0; t < T; ++t) {
      const Vec conc = DirichletPosterior(prior, counts[t]);
      Vec& psi = post.samples[s][t];
      double sum = 0.0;
      for (std::size_t l : draw_order) {
        std::gamma_distribution<double> gamma(std::max(conc[l], 1e-10), 1.0);
        psi[l] = gamma(engine);
        sum += psi[l];
      }
      if (!(sum > 0.0)) {
        std::fill(psi.begin(), psi.end(), 0.0);
        psi[static_cast<std::size_t>(std::max_element(conc.begin(), conc.end()) - conc.begin())] = 1.0;
      } else {
        for (double& p : psi) p /= sum;
      }
      // A component that underflowed to zero keeps a tiny positive prior.
      for (std::size_t l = 0; l < L; ++l) prior[l] = std::max(options.kappa * psi[l], 1e-300);
    }
  });

  post.mean.assign(T, Vec(L, 0.0));
  post.ci_low.assign(T, Vec(L, 0.0));
  post.ci_high.assign(T, Vec(L, 0.0));
  std::vector<double> column(static_cast<std::size_t>(options.chains));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      double sum = 0.0;
      for (std::size_t s = 0; s < column.size(); ++s) {
        column[s] = post.samples[s][t][l];
        sum += column[s];
      }
      post.mean[t][l] = sum / static_cast<double>(column.size());
      const auto [lo, hi] = CredibleInterval(column, options.level);
      post.ci_low[t][l] = lo;
      post.ci_high[t][l] = hi;
    }
  }
  return post;
}

}  // namespace dltm
