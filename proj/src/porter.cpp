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

// Porter stemmer, following the rule tables of the original 1980 description
// (ABLI -> ABLE in step 2, no LOGI rule). Within each step only the rule with
// the longest matching suffix is considered; if its condition fails the step
// does nothing.

#include <array>
#include <string>
#include <string_view>

#include "dltm/text.hpp"

namespace dltm {
namespace {

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

class PorterStemmer {
 public:
  explicit PorterStemmer(std::string_view word) : b_(word) {}

  std::string Run() {
    if (b_.size() <= 2) return b_;
    Step1a();
    Step1b();
    Step1c();
    Step2();
    Step3();
    Step4();
    Step5a();
    Step5b();
    return b_;
  }

 private:
  bool IsConsonant(std::size_t i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !IsConsonant(i - 1);
      default:
        return true;
    }
  }

  // m in [C](VC)^m[V] for the prefix b_[0, len).
  int Measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && IsConsonant(i)) ++i;
    while (i < len) {
      while (i < len && !IsConsonant(i)) ++i;
      if (i >= len) break;
      while (i < len && IsConsonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool HasVowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!IsConsonant(i)) return true;
    }
    return false;
  }

  bool EndsDoubleConsonant(std::size_t len) const {
    return len >= 2 && b_[len - 1] == b_[len - 2] && IsConsonant(len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, last consonant not w, x or y.
  bool EndsCvc(std::size_t len) const {
    if (len < 3) return false;
    if (!IsConsonant(len - 3) || IsConsonant(len - 2) || !IsConsonant(len - 1)) {
      return false;
    }
    const char c = b_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool EndsWith(std::string_view s) const {
    return b_.size() >= s.size() &&
           std::string_view(b_).substr(b_.size() - s.size()) == s;
  }

  std::size_t StemLength(std::string_view suffix) const {
    return b_.size() - suffix.size();
  }

  void Replace(std::string_view suffix, std::string_view replacement) {
    b_.resize(StemLength(suffix));
    b_.append(replacement);
  }

  template <std::size_t N>
  const Rule* LongestMatch(const std::array<Rule, N>& rules) const {
    const Rule* best = nullptr;
    for (const Rule& r : rules) {
      if (EndsWith(r.suffix) && (best == nullptr || r.suffix.size() > best->suffix.size())) {
        best = &r;
      }
    }
    return best;
  }

  void Step1a() {
    static constexpr std::array<Rule, 4> kRules{{
        {"sses", "ss"}, {"ies", "i"}, {"ss", "ss"}, {"s", ""}}};
    if (const Rule* r = LongestMatch(kRules)) Replace(r->suffix, r->replacement);
  }

  void Step1b() {
    if (EndsWith("eed")) {
      if (Measure(StemLength("eed")) > 0) Replace("eed", "ee");
      return;
    }
    bool removed = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
      if (EndsWith(suffix) && HasVowel(StemLength(suffix))) {
        Replace(suffix, "");
        removed = true;
        break;
      }
    }
    if (!removed) return;
    if (EndsWith("at") || EndsWith("bl") || EndsWith("iz")) {
      b_.push_back('e');
    } else if (EndsDoubleConsonant(b_.size())) {
      const char c = b_.back();
      if (c != 'l' && c != 's' && c != 'z') b_.pop_back();
    } else if (Measure(b_.size()) == 1 && EndsCvc(b_.size())) {
      b_.push_back('e');
    }
  }

  void Step1c() {
    if (EndsWith("y") && HasVowel(StemLength("y"))) b_.back() = 'i';
  }

  void Step2() {
    static constexpr std::array<Rule, 20> kRules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
        {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},
        {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
        {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
        {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
        {"iviti", "ive"},   {"biliti", "ble"}}};
    if (const Rule* r = LongestMatch(kRules)) {
      if (Measure(StemLength(r->suffix)) > 0) Replace(r->suffix, r->replacement);
    }
  }

  void Step3() {
    static constexpr std::array<Rule, 7> kRules{{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""}}};
    if (const Rule* r = LongestMatch(kRules)) {
      if (Measure(StemLength(r->suffix)) > 0) Replace(r->suffix, r->replacement);
    }
  }

  void Step4() {
    static constexpr std::array<Rule, 19> kRules{{
        {"al", ""},   {"ance", ""}, {"ence", ""}, {"er", ""},   {"ic", ""},
        {"able", ""}, {"ible", ""}, {"ant", ""},  {"ement", ""}, {"ment", ""},
        {"ent", ""},  {"ion", ""},  {"ou", ""},   {"ism", ""},  {"ate", ""},
        {"iti", ""},  {"ous", ""},  {"ive", ""},  {"ize", ""}}};
    const Rule* r = LongestMatch(kRules);
    if (r == nullptr) return;
    const std::size_t stem = StemLength(r->suffix);
    if (Measure(stem) <= 1) return;
    if (r->suffix == "ion" && (stem == 0 || (b_[stem - 1] != 's' && b_[stem - 1] != 't'))) {
      return;
    }
    Replace(r->suffix, "");
  }

  void Step5a() {
    if (!EndsWith("e")) return;
    const std::size_t stem = StemLength("e");
    const int m = Measure(stem);
    if (m > 1 || (m == 1 && !EndsCvc(stem))) b_.pop_back();
  }

  void Step5b() {
    if (Measure(b_.size()) > 1 && EndsDoubleConsonant(b_.size()) && b_.back() == 'l') {
      b_.pop_back();
    }
  }

  std::string b_;
};

}  // namespace

std::string PorterStem(std::string_view word) { return PorterStemmer(word).Run(); }

std::string PorterStemFixedPoint(std::string_view word) {
  std::string current(word);
  // Rewrites only shorten the word or turn y->i and i->e, so a handful of
  // passes always reaches the fixed point; the cap is a backstop.
  for (int pass = 0; pass < 32; ++pass) {
    std::string next = PorterStem(current);
    if (next == current) return current;
    current = std::move(next);
  }
  return current;
}

}  // namespace dltm
