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

// Time-sliced labeled bag-of-words corpora: vocabulary construction, loading
// raw line-delimited JSON, the canonical processed export, and label counts.

#ifndef DLTM_CORPUS_HPP_
#define DLTM_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dltm/text.hpp"

namespace dltm {

class Vocabulary {
 public:
  Vocabulary() = default;
  // Terms must be unique; order is kept as given.
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::optional<int> Find(const std::string& term) const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, int> index_;
};

struct TermCount {
  int term = 0;
  int count = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

// Sparse counts sorted by term index, no zero entries.
using SparseCounts = std::vector<TermCount>;

struct Document {
  std::string id;
  int time_slot = 1;        // 1..T
  std::vector<int> labels;  // indices into Corpus::label_set, duplicate free
  SparseCounts counts;
  int token_total = 0;
  std::map<std::string, double> meta;  // numeric metadata (hits, words, ...)
};

struct Corpus {
  int T = 0;
  std::vector<std::string> label_set;
  Vocabulary vocabulary;
  std::vector<std::vector<Document>> slots;  // slots[t - 1]

  std::size_t num_labels() const { return label_set.size(); }
  std::size_t num_documents() const;
  std::optional<int> FindLabel(const std::string& label) const;
};

// Terms present in at least `min_doc_freq` lists, sorted.
Vocabulary BuildVocabulary(const std::vector<std::vector<std::string>>& token_lists,
                           int min_doc_freq);

// Out-of-vocabulary tokens are dropped.
SparseCounts BagOfWords(const std::vector<std::string>& tokens, const Vocabulary& vocab);

struct LoadReport {
  std::vector<std::string> dropped_ids;  // documents emptied by preprocessing
  int first_year = 0;
};

// Raw corpus: one JSON object per line with id, year, labels, text and an
// optional numeric meta object. An optional first line {"labels": [...]}
// without an id declares the label set and its order.
Corpus LoadCorpus(const std::string& path, const PreprocessConfig& config,
                  int min_doc_freq, LoadReport* report = nullptr);

// Canonical processed export: a header line followed by one line per
// document with [index, count] pairs. Output is byte-for-byte deterministic.
std::string CorpusToCanonical(const Corpus& corpus);
Corpus CorpusFromCanonical(const std::string& text);
void SaveCorpus(const Corpus& corpus, const std::string& path);
Corpus LoadCanonicalCorpus(const std::string& path);

// Checks every invariant of Corpus; throws kData on violation.
void ValidateCorpus(const Corpus& corpus);

// counts[t - 1][l]: documents in slot t carrying label l.
std::vector<std::vector<int>> LabelFrequency(const Corpus& corpus);

std::string VocabularyHash(const Vocabulary& vocab);

}  // namespace dltm

#endif  // DLTM_CORPUS_HPP_
