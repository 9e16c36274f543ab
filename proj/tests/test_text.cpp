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

#include <random>
#include <string>
#include <vector>

#include "dltm/text.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace dltm {
namespace {

using Tokens = std::vector<std::string>;

PreprocessConfig Bare(int min_len, Stemmer stemmer = Stemmer::kPorter) {
  PreprocessConfig c;
  c.min_token_length = min_len;
  c.stemmer = stemmer;
  return c;
}

std::string Join(const Tokens& t) {
  std::string s;
  for (const auto& w : t) s += w + " ";
  return s;
}

TEST_CASE("porter: reference word pairs") {
  const std::vector<std::pair<const char*, const char*>> pairs = {
      {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},
      {"caress", "caress"},     {"cats", "cat"},            {"feed", "feed"},
      {"agreed", "agre"},       {"plastered", "plaster"},   {"bled", "bled"},
      {"motoring", "motor"},    {"sing", "sing"},           {"conflated", "conflat"},
      {"troubled", "troubl"},   {"sized", "size"},          {"hopping", "hop"},
      {"tanned", "tan"},        {"falling", "fall"},        {"hissing", "hiss"},
      {"fizzed", "fizz"},       {"failing", "fail"},        {"filing", "file"},
      {"happy", "happi"},       {"sky", "sky"},             {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"},    {"valenci", "valenc"},
      {"hesitanci", "hesit"},   {"digitizer", "digit"},     {"conformabli", "conform"},
      {"radicalli", "radic"},   {"differentli", "differ"},  {"vileli", "vile"},
      {"analogousli", "analog"}, {"vietnamization", "vietnam"}, {"predication", "predic"},
      {"operator", "oper"},     {"feudalism", "feudal"},    {"decisiveness", "decis"},
      {"hopefulness", "hope"},  {"callousness", "callous"}, {"formaliti", "formal"},
      {"sensitiviti", "sensit"}, {"sensibiliti", "sensibl"}, {"triplicate", "triplic"},
      {"formative", "form"},    {"formalize", "formal"},    {"electriciti", "electr"},
      {"electrical", "electr"}, {"hopeful", "hope"},        {"goodness", "good"},
      {"revival", "reviv"},     {"allowance", "allow"},     {"inference", "infer"},
      {"airliner", "airlin"},   {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},
      {"defensible", "defens"}, {"irritant", "irrit"},      {"replacement", "replac"},
      {"adjustment", "adjust"}, {"dependent", "depend"},    {"adoption", "adopt"},
      {"homologou", "homolog"}, {"communism", "commun"},    {"activate", "activ"},
      {"angulariti", "angular"}, {"homologous", "homolog"}, {"effective", "effect"},
      {"bowdlerize", "bowdler"}, {"probate", "probat"},     {"rate", "rate"},
      {"cease", "ceas"},        {"controll", "control"},    {"roll", "roll"},
      {"generalizations", "gener"}, {"tony", "toni"},       {"suits", "suit"},
  };
  for (const auto& [in, out] : pairs) {
    CAPTURE(in);
    CHECK(PorterStem(in) == out);
  }
}

TEST_CASE("porter: short words are untouched") {
  CHECK(PorterStem("a") == "a");
  CHECK(PorterStem("is") == "is");
  CHECK(PorterStem("") == "");
}

TEST_CASE("porter: fixed point is stable") {
  std::mt19937_64 rng(11);
  const std::string letters = "abcdefghijklmnopqrstuvwxyzaeiouaeiouy";
  for (int i = 0; i < 5000; ++i) {
    std::string w;
    const int n = 1 + static_cast<int>(rng() % 14);
    for (int k = 0; k < n; ++k) w += letters[rng() % letters.size()];
    const std::string fp = PorterStemFixedPoint(w);
    CAPTURE(w);
    CHECK(PorterStem(fp) == fp);
  }
}

TEST_CASE("preprocess: specification examples") {
  CHECK(PreprocessText("", Bare(3)).empty());
  CHECK(PreprocessText("Tony's 2 suits!!", Bare(2)) == Tokens{"toni", "suit"});
  PreprocessConfig c = Bare(1);
  c.stopwords = {"the"};
  CHECK(PreprocessText("the The THE", c).empty());
}

TEST_CASE("preprocess: digits, punctuation and whitespace are boundaries") {
  const auto c = Bare(1, Stemmer::kNone);
  CHECK(PreprocessText("abc123def  ghi\t\njkl--mno_pqr", c) ==
        Tokens{"abc", "def", "ghi", "jkl", "mno", "pqr"});
  CHECK(PreprocessText("Hello,WORLD", c) == Tokens{"hello", "world"});
}

TEST_CASE("preprocess: unicode folding and non-English tokens") {
  const auto c = Bare(1, Stemmer::kNone);
  CHECK(PreprocessText("caf\xC3\xA9 na\xC3\xAFve", c) == Tokens{"cafe", "naive"});
  CHECK(PreprocessText("\xEF\xAC\x81ne", c) == Tokens{"fine"});  // U+FB01 ligature
  CHECK(PreprocessText("\xD0\x9F\xD1\x80\xD0\xB8\xD0\xB2\xD0\xB5\xD1\x82 world", c) ==
        Tokens{"world"});
  CHECK(PreprocessText("stra\xC3\x9F" "e", c).empty());  // sharp s is not an ASCII letter
  CHECK(PreprocessText("\xE2\x9C\xA8 star \xF0\x9F\x98\x80", c) == Tokens{"star"});
  CHECK(PreprocessText("bad\xFF" "bytes", c) == Tokens{"bad", "bytes"});
}

TEST_CASE("preprocess: minimum length and stoplists") {
  PreprocessConfig c = Bare(3);
  // "ate" stems to "at", which fails the length check after stemming.
  CHECK(PreprocessText("an ox ate hay", c) == Tokens{"hai"});
  c.extra_stoplist = {"toni"};
  CHECK(PreprocessText("Tony met Tony's friend", c) == Tokens{"met", "friend"});
  c.stopwords = DefaultEnglishStopwords();
  CHECK(PreprocessText("The heroes were flying over the city", c) ==
        Tokens{"hero", "fly", "citi"});
}

TEST_CASE("preprocess: order is preserved") {
  const auto c = Bare(1, Stemmer::kNone);
  CHECK(PreprocessText("zeta alpha mid alpha", c) == Tokens{"zeta", "alpha", "mid", "alpha"});
}

TEST_CASE("preprocess: output is lowercase ASCII letters only") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> pieces = {"Iron", "MAN", "'s", " ", "2019", "!!", "\xC3\xA9",
                                           "\xD0\x96", "-", "running", "\t", "ponies", "x"};
  PreprocessConfig c = Bare(2);
  c.stopwords = DefaultEnglishStopwords();
  for (int i = 0; i < 500; ++i) {
    std::string raw;
    for (int k = 0; k < 12; ++k) raw += pieces[rng() % pieces.size()];
    for (const auto& tok : PreprocessText(raw, c)) {
      CHECK(tok.size() >= 2);
      for (char ch : tok) CHECK((ch >= 'a' && ch <= 'z'));
    }
  }
}

TEST_CASE("preprocess: idempotent on its own output") {
  std::mt19937_64 rng(5);
  const std::string letters = "abcdefghijklmnopqrstuvwxyzAEIOUaeiouy";
  const std::vector<std::string> words = {
      "running", "generalizations", "the", "Tony", "agreed", "hopefulness", "ponies",
      "relational", "conditional", "sky", "happy", "electricity", "heroes", "was", "flying",
      "national", "organizations", "caresses", "sized", "adjustable", "feed", "sensibility"};
  for (const Stemmer stemmer : {Stemmer::kPorter, Stemmer::kNone}) {
    for (int min_len : {1, 3}) {
      PreprocessConfig c = Bare(min_len, stemmer);
      c.stopwords = DefaultEnglishStopwords();
      c.extra_stoplist = {"toni", "hero"};
      for (int i = 0; i < 400; ++i) {
        std::string raw;
        for (int k = 0; k < 10; ++k) {
          if (rng() % 2) {
            raw += words[rng() % words.size()];
          } else {
            const int n = 1 + static_cast<int>(rng() % 10);
            for (int j = 0; j < n; ++j) raw += letters[rng() % letters.size()];
          }
          raw += (rng() % 3 == 0) ? ", " : " ";
        }
        const Tokens once = PreprocessText(raw, c);
        CAPTURE(raw);
        CHECK(PreprocessText(Join(once), c) == once);
      }
    }
  }
}

TEST_CASE("word lists: comments, case and whitespace") {
  testing::TempDir dir("words");
  const auto path = dir.Write("stop.txt", "# names\nTony  Steve\n\nthor # god\n");
  const auto words = LoadWordList(path);
  CHECK(words == std::unordered_set<std::string>{"tony", "steve", "thor"});
  CHECK(testing::KindOf([&] { LoadWordList(dir.File("missing.txt")); }) == ErrorKind::kIo);
}

}  // namespace
}  // namespace dltm
