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

// Label-popularity inference: forward sequential sampling of psi^(t) from its
// conjugate Dirichlet posterior, replicated over independent chains.

#ifndef DLTM_LABEL_PROBS_HPP_
#define DLTM_LABEL_PROBS_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dltm/corpus.hpp"
#include "dltm/model.hpp"

namespace dltm {

struct PsiPosterior {
  double level = 0.95;
  // samples[s][t] is an L-simplex point. Not persisted in model bundles.
  std::vector<Mat> samples;
  Mat mean;     // [t][l]
  Mat ci_low;   // [t][l]
  Mat ci_high;  // [t][l]
};

// prior + counts.
Vec DirichletPosterior(std::span<const double> prior, std::span<const int> counts);

// (document, label) incidences per label in slot index t (0-based).
std::vector<int> LabelCounts(const Corpus& corpus, std::size_t t);

// Equal-tailed interval from empirical quantiles with linear interpolation
// between order statistics (position (n - 1) p).
std::pair<double, double> CredibleInterval(std::span<const double> samples, double level);

// Quantile under the same interpolation rule.
double EmpiricalQuantile(std::span<const double> sorted, double p);

struct LabelProbOptions {
  double kappa = 100.0;
  int chains = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Chain s starts from prior kappa * uniform, draws
//   psi^(t) ~ Dir(prior_t + label_counts(t)),  prior_{t+1} = kappa * psi^(t).
// Gamma variates are drawn in lexicographic label-name order, so reordering
// the label set permutes the result exactly.
PsiPosterior FitLabelProbs(const Corpus& corpus, const LabelProbOptions& options);

}  // namespace dltm

#endif  // DLTM_LABEL_PROBS_HPP_
