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

#ifndef DLTM_TEXT_HPP_
#define DLTM_TEXT_HPP_

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace dltm {

enum class Stemmer { kPorter, kNone };

struct PreprocessConfig {
  // Applied to the lowercased surface form, before stemming. Also re-checked
  // on the stemmed form so that the pipeline is idempotent.
  std::unordered_set<std::string> stopwords;
  // Applied after stemming (e.g. character names).
  std::unordered_set<std::string> extra_stoplist;
  int min_token_length = 3;
  Stemmer stemmer = Stemmer::kPorter;
};

// The usual English stopword list, restricted to letter-only entries since
// the tokenizer splits on apostrophes.
const std::unordered_set<std::string>& DefaultEnglishStopwords();

// Classic Porter (1980) stemmer on a lowercase ASCII word.
std::string PorterStem(std::string_view word);

// Porter applied until the word stops changing.
std::string PorterStemFixedPoint(std::string_view word);

// Splits UTF-8 text into lowercase ASCII-letter tokens. Characters are NFKD
// folded first (so "café" becomes "cafe"); any token still containing a
// non-ASCII letter is treated as non-English and dropped. Digits,
// punctuation, symbols and whitespace act as separators.
std::vector<std::string> Tokenize(std::string_view raw);

// Full pipeline: tokenize, length and stopword filters, stemming and the
// post-stem stoplist. Order of surviving tokens is preserved.
std::vector<std::string> PreprocessText(std::string_view raw,
                                        const PreprocessConfig& config);

// Reads a whitespace/newline separated word list; lines starting with '#' are
// comments. Words are lowercased.
std::unordered_set<std::string> LoadWordList(const std::string& path);

}  // namespace dltm

#endif  // DLTM_TEXT_HPP_
