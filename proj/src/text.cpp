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

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cctype>
#include <fstream>
#include <sstream>

#include "dltm/error.hpp"
#include "dltm/text.hpp"

namespace dltm {

const std::unordered_set<std::string>& DefaultEnglishStopwords() {
  static const std::unordered_set<std::string> kWords = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
      "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
      "she", "her", "hers", "herself", "it", "its", "itself", "they", "them",
      "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
      "that", "these", "those", "am", "is", "are", "was", "were", "be", "been",
      "being", "have", "has", "had", "having", "do", "does", "did", "doing",
      "a", "an", "the", "and", "but", "if", "or", "because", "as", "until",
      "while", "of", "at", "by", "for", "with", "about", "against", "between",
      "into", "through", "during", "before", "after", "above", "below", "to",
      "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
      "further", "then", "once", "here", "there", "when", "where", "why",
      "how", "all", "any", "both", "each", "few", "more", "most", "other",
      "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
      "too", "very", "s", "t", "can", "will", "just", "don", "should", "now",
      "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn",
      "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn",
      "needn", "shan", "shouldn", "wasn", "weren", "won", "wouldn"};
  return kWords;
}

namespace {

const icu::Normalizer2& Nfkd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    Fail(ErrorKind::kData, "ICU NFKD normalizer unavailable");
  }
  return *n;
}

bool IsAsciiLetter(UChar32 c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

class TokenBuilder {
 public:
  explicit TokenBuilder(std::vector<std::string>* out) : out_(out) {}

  void Letter(UChar32 c) {
    current_.push_back(static_cast<char>(std::tolower(static_cast<int>(c))));
  }
  void Foreign() { foreign_ = true; }
  void Boundary() {
    if (!current_.empty() && !foreign_) out_->push_back(current_);
    current_.clear();
    foreign_ = false;
  }

 private:
  std::vector<std::string>* out_;
  std::string current_;
  bool foreign_ = false;
};

// Classifies one folded code point.
void Feed(UChar32 c, TokenBuilder& tokens) {
  if (IsAsciiLetter(c)) {
    tokens.Letter(c);
  } else if (u_charType(c) == U_NON_SPACING_MARK ||
             u_charType(c) == U_ENCLOSING_MARK ||
             u_charType(c) == U_COMBINING_SPACING_MARK) {
    // accents left over from decomposition
  } else if (c >= 0x80 && u_isalpha(c)) {
    tokens.Foreign();
  } else {
    tokens.Boundary();
  }
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view raw) {
  std::vector<std::string> out;
  TokenBuilder tokens(&out);
  const icu::Normalizer2& nfkd = Nfkd();
  const auto* bytes = reinterpret_cast<const uint8_t*>(raw.data());
  const int32_t length = static_cast<int32_t>(raw.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) {  // ill-formed UTF-8
      tokens.Boundary();
      continue;
    }
    if (c < 0x80) {
      Feed(c, tokens);
      continue;
    }
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString folded = nfkd.normalize(icu::UnicodeString(c), status);
    if (U_FAILURE(status)) {
      tokens.Boundary();
      continue;
    }
    for (int32_t k = 0; k < folded.length(); k = folded.moveIndex32(k, 1)) {
      Feed(folded.char32At(k), tokens);
    }
  }
  tokens.Boundary();
  return out;
}

std::vector<std::string> PreprocessText(std::string_view raw,
                                        const PreprocessConfig& config) {
  const std::size_t min_len =
      static_cast<std::size_t>(config.min_token_length < 1 ? 1 : config.min_token_length);
  std::vector<std::string> out;
  for (std::string& token : Tokenize(raw)) {
    if (token.size() < min_len || config.stopwords.count(token)) continue;
    std::string stem = config.stemmer == Stemmer::kPorter
                           ? PorterStemFixedPoint(token)
                           : std::move(token);
    if (stem.size() < min_len || config.stopwords.count(stem) ||
        config.extra_stoplist.count(stem)) {
      continue;
    }
    out.push_back(std::move(stem));
  }
  return out;
}

std::unordered_set<std::string> LoadWordList(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open word list: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string word;
    while (fields >> word) {
      for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      words.insert(word);
    }
  }
  return words;
}

}  // namespace dltm
