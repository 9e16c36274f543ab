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

// Summaries of a fitted model: topic scores, ranked topics and terms, topic
// matching against a reference, and CSV/JSON export.

#ifndef DLTM_REPORTING_HPP_
#define DLTM_REPORTING_HPP_

#include <map>
#include <string>
#include <vector>

#include "dltm/corpus.hpp"
#include "dltm/label_probs.hpp"
#include "dltm/model.hpp"
#include "dltm/variational.hpp"

namespace dltm {

struct TopicScoreTable {
  Cube scores;   // [l][t][z] = pi(theta_lt)_z
  Mat averages;  // [l][z], mean over t
};

TopicScoreTable TopicScores(const LabelTopicChains& labels);
TopicScoreTable TopicScores(const FittedModel& model);

struct RankedTopic {
  int topic = 0;  // 0-based
  double score = 0.0;
};

// Descending average score, ties by ascending topic id. 1 <= k <= Z.
std::vector<RankedTopic> TopTopics(const TopicScoreTable& table, std::size_t label, std::size_t k);

struct RankedTerm {
  std::string term;
  double prob = 0.0;
};

// The k most probable terms of pi(beta_zt), ties by ascending term.
std::vector<RankedTerm> TopWords(const TopicChains& topics, const Vocabulary& vocab,
                                 std::size_t z, std::size_t t, std::size_t k);
// Same ranking on pi(beta_zt) averaged over t.
std::vector<RankedTerm> TopWordsPooled(const TopicChains& topics, const Vocabulary& vocab,
                                       std::size_t z, std::size_t k);

double TotalVariation(std::span<const double> p, std::span<const double> q);

// Minimum-cost perfect matching of a square cost matrix; result[i] is the
// column assigned to row i.
std::vector<int> SolveAssignment(const Mat& cost);

struct TopicMatch {
  // perm[i] is the estimated topic matched to reference topic i.
  std::vector<int> perm;
  // Mean over t of TV(pi(est_perm[i],t), pi(truth_i,t)).
  Vec distances;
};

TopicMatch MatchTopics(const TopicChains& est, const TopicChains& truth);

// [i][t] TV distances under a matching.
Mat MatchedSlotDistances(const TopicChains& est, const TopicChains& truth,
                         const std::vector<int>& perm);

// CSV bodies (header row included, numbers with 9 significant digits).
std::string LabelFrequencyCsv(const std::vector<std::string>& label_set,
                              const std::vector<std::vector<int>>& freq);
std::string PsiCsv(const std::vector<std::string>& label_set, const PsiPosterior& psi);
std::string TopicScoresCsv(const std::vector<std::string>& label_set, const TopicScoreTable& table);

// "topic=name" lines with 1-based topic ids; '#' starts a comment.
std::map<int, std::string> LoadTopicNames(const std::string& path, int topics);

struct ReportOptions {
  std::size_t top_k = 10;
  std::map<int, std::string> topic_names;  // 1-based topic id -> name
  // Extra manifest inputs, e.g. {"model", <sha256>}.
  std::map<std::string, std::string> input_hashes;
};

// Writes label_freq.csv, psi.csv, topic_scores.csv, top_words.csv,
// top_words_pooled.csv, top_topics.csv and manifest.json into out_dir. The
// manifest is written first; every file is replaced atomically.
void ExportReport(const FittedModel& model, const std::string& out_dir,
                  const ReportOptions& options = {});

struct FieldSummary {
  int count = 0;
  double mean = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
};

struct SlotStats {
  int t = 1;
  std::map<std::string, FieldSummary> fields;
};

// Per-slot summaries of numeric document metadata. Quartiles use the same
// interpolation rule as CredibleInterval.
std::vector<SlotStats> CorpusStats(const Corpus& corpus,
                                   const std::vector<std::string>& fields = {"hits", "words"});

// t,field,count,mean,q25,q50,q75; summary cells are empty when count is 0.
std::string CorpusStatsCsv(const std::vector<SlotStats>& stats);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string CsvField(const std::string& s);

}  // namespace dltm

#endif  // DLTM_REPORTING_HPP_
