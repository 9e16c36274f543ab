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

#include "dltm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dltm/error.hpp"
#include "dltm/util.hpp"
#include "json.hpp"

namespace dltm {

using nlohmann::json;

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<int>(i)).second) {
      Fail(ErrorKind::kData, "duplicate vocabulary term: " + terms_[i]);
    }
  }
}

std::optional<int> Vocabulary::Find(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::num_documents() const {
  std::size_t n = 0;
  for (const auto& slot : slots) n += slot.size();
  return n;
}

std::optional<int> Corpus::FindLabel(const std::string& label) const {
  auto it = std::find(label_set.begin(), label_set.end(), label);
  if (it == label_set.end()) return std::nullopt;
  return static_cast<int>(it - label_set.begin());
}

Vocabulary BuildVocabulary(const std::vector<std::vector<std::string>>& token_lists,
                           int min_doc_freq) {
  Require(min_doc_freq >= 1, "min_doc_freq must be >= 1");
  std::map<std::string, int> doc_freq;
  for (const auto& tokens : token_lists) {
    std::set<std::string_view> seen(tokens.begin(), tokens.end());
    for (std::string_view t : seen) ++doc_freq[std::string(t)];
  }
  std::vector<std::string> terms;
  for (const auto& [term, df] : doc_freq) {
    if (df >= min_doc_freq) terms.push_back(term);
  }
  if (terms.empty()) Fail(ErrorKind::kData, "empty vocabulary");
  return Vocabulary(std::move(terms));
}

SparseCounts BagOfWords(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::map<int, int> counts;
  for (const auto& token : tokens) {
    if (auto idx = vocab.Find(token)) ++counts[*idx];
  }
  SparseCounts out;
  out.reserve(counts.size());
  for (const auto& [term, count] : counts) out.push_back({term, count});
  return out;
}

namespace {

struct RawRecord {
  std::string id;
  int year = 0;
  std::vector<std::string> labels;
  std::map<std::string, double> meta;
  std::vector<std::string> tokens;
};

[[noreturn]] void Malformed(const std::string& path, int line, const std::string& why) {
  Fail(ErrorKind::kData, path + ":" + std::to_string(line) + ": " + why);
}

std::map<std::string, double> ParseMeta(const json& j) {
  std::map<std::string, double> meta;
  if (!j.is_object()) return meta;
  for (const auto& [key, value] : j.items()) {
    if (value.is_number()) meta[key] = value.get<double>();
  }
  return meta;
}

json MetaToJson(const std::map<std::string, double>& meta) {
  json j = json::object();
  for (const auto& [key, value] : meta) j[key] = value;
  return j;
}

}  // namespace

Corpus LoadCorpus(const std::string& path, const PreprocessConfig& config,
                  int min_doc_freq, LoadReport* report) {
  Require(min_doc_freq >= 1, "min_doc_freq must be >= 1");
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open corpus file: " + path);

  std::optional<std::vector<std::string>> declared_labels;
  std::vector<RawRecord> records;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      Malformed(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) Malformed(path, line_no, "record is not a JSON object");
    if (first && !j.contains("id") && j.contains("labels")) {
      first = false;
      if (!j["labels"].is_array()) Malformed(path, line_no, "header labels must be an array");
      std::vector<std::string> labels;
      for (const auto& l : j["labels"]) {
        if (!l.is_string()) Malformed(path, line_no, "header labels must be strings");
        labels.push_back(l.get<std::string>());
      }
      declared_labels = std::move(labels);
      continue;
    }
    first = false;

    RawRecord rec;
    if (!j.contains("id") || !j["id"].is_string()) Malformed(path, line_no, "missing string field 'id'");
    rec.id = j["id"].get<std::string>();
    if (!j.contains("year") || !j["year"].is_number_integer()) {
      Malformed(path, line_no, "record " + rec.id + ": missing integer field 'year'");
    }
    rec.year = j["year"].get<int>();
    if (!j.contains("labels") || !j["labels"].is_array()) {
      Malformed(path, line_no, "record " + rec.id + ": missing array field 'labels'");
    }
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) Malformed(path, line_no, "record " + rec.id + ": labels must be strings");
      std::string label = l.get<std::string>();
      if (std::find(rec.labels.begin(), rec.labels.end(), label) == rec.labels.end()) {
        rec.labels.push_back(std::move(label));
      }
    }
    if (rec.labels.empty()) {
      Malformed(path, line_no, "record " + rec.id + " has an empty label list");
    }
    if (!j.contains("text") || !j["text"].is_string()) {
      Malformed(path, line_no, "record " + rec.id + ": missing string field 'text'");
    }
    if (j.contains("meta")) rec.meta = ParseMeta(j["meta"]);
    rec.tokens = PreprocessText(j["text"].get<std::string>(), config);
    records.push_back(std::move(rec));
  }
  if (in.bad()) Fail(ErrorKind::kIo, "read failed: " + path);
  if (records.empty()) Fail(ErrorKind::kData, "corpus file has no records: " + path);

  Corpus corpus;
  int min_year = records.front().year;
  int max_year = records.front().year;
  for (const auto& r : records) {
    min_year = std::min(min_year, r.year);
    max_year = std::max(max_year, r.year);
  }
  corpus.T = max_year - min_year + 1;
  corpus.slots.resize(static_cast<std::size_t>(corpus.T));

  if (declared_labels) {
    corpus.label_set = *declared_labels;
  } else {
    std::set<std::string> all;
    for (const auto& r : records) all.insert(r.labels.begin(), r.labels.end());
    corpus.label_set.assign(all.begin(), all.end());
  }

  LoadReport local;
  local.first_year = min_year;
  std::vector<std::vector<std::string>> kept_tokens;
  for (const auto& r : records) {
    if (!r.tokens.empty()) kept_tokens.push_back(r.tokens);
  }
  if (kept_tokens.empty()) Fail(ErrorKind::kData, "empty vocabulary");
  corpus.vocabulary = BuildVocabulary(kept_tokens, min_doc_freq);

  for (auto& r : records) {
    Document doc;
    doc.id = r.id;
    doc.time_slot = r.year - min_year + 1;
    for (const auto& label : r.labels) {
      auto idx = corpus.FindLabel(label);
      if (!idx) Fail(ErrorKind::kData, "record " + r.id + ": label '" + label + "' not declared in header");
      doc.labels.push_back(*idx);
    }
    doc.counts = BagOfWords(r.tokens, corpus.vocabulary);
    for (const auto& tc : doc.counts) doc.token_total += tc.count;
    doc.meta = std::move(r.meta);
    if (doc.token_total == 0) {
      Log(LogLevel::kWarn, "document_dropped", {{"id", r.id}, {"reason", "empty after preprocessing"}});
      local.dropped_ids.push_back(r.id);
      continue;
    }
    corpus.slots[static_cast<std::size_t>(doc.time_slot - 1)].push_back(std::move(doc));
  }
  if (report) *report = std::move(local);
  return corpus;
}

void ValidateCorpus(const Corpus& corpus) {
  const auto bad = [](const std::string& why) { Fail(ErrorKind::kData, "invalid corpus: " + why); };
  if (corpus.T < 0) bad("negative T");
  if (corpus.slots.size() != static_cast<std::size_t>(corpus.T)) bad("slot count differs from T");
  std::set<std::string> labels(corpus.label_set.begin(), corpus.label_set.end());
  if (labels.size() != corpus.label_set.size()) bad("duplicate label identifiers");
  const int V = static_cast<int>(corpus.vocabulary.size());
  const int L = static_cast<int>(corpus.label_set.size());
  for (int t = 1; t <= corpus.T; ++t) {
    for (const auto& doc : corpus.slots[static_cast<std::size_t>(t - 1)]) {
      if (doc.time_slot != t) bad("document " + doc.id + " filed under the wrong slot");
      if (doc.labels.empty()) bad("document " + doc.id + " has no labels");
      std::set<int> seen;
      for (int l : doc.labels) {
        if (l < 0 || l >= L) bad("document " + doc.id + " has an unknown label");
        if (!seen.insert(l).second) bad("document " + doc.id + " repeats a label");
      }
      int total = 0;
      int prev = -1;
      for (const auto& tc : doc.counts) {
        if (tc.term <= prev || tc.term >= V || tc.count <= 0) {
          bad("document " + doc.id + " has malformed counts");
        }
        prev = tc.term;
        total += tc.count;
      }
      if (total != doc.token_total) bad("document " + doc.id + " token_total mismatch");
      if (total < 1) bad("document " + doc.id + " is empty");
    }
  }
}

std::string CorpusToCanonical(const Corpus& corpus) {
  std::string out;
  json header;
  header["format"] = "dltm-corpus";
  header["version"] = 1;
  header["T"] = corpus.T;
  header["labels"] = corpus.label_set;
  header["vocabulary"] = corpus.vocabulary.terms();
  out += header.dump();
  out += '\n';
  for (const auto& slot : corpus.slots) {
    for (const auto& doc : slot) {
      json j;
      j["id"] = doc.id;
      j["t"] = doc.time_slot;
      json labels = json::array();
      for (int l : doc.labels) labels.push_back(corpus.label_set[static_cast<std::size_t>(l)]);
      j["labels"] = std::move(labels);
      json counts = json::array();
      for (const auto& tc : doc.counts) counts.push_back(json::array({tc.term, tc.count}));
      j["counts"] = std::move(counts);
      if (!doc.meta.empty()) j["meta"] = MetaToJson(doc.meta);
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

Corpus CorpusFromCanonical(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Corpus corpus;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      Fail(ErrorKind::kData, "canonical corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("format", "") != "dltm-corpus") {
          Fail(ErrorKind::kData,
               "not a processed corpus (missing dltm-corpus header); run `dltm preprocess` first");
        }
        corpus.T = j.at("T").get<int>();
        corpus.label_set = j.at("labels").get<std::vector<std::string>>();
        corpus.vocabulary = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
        corpus.slots.resize(static_cast<std::size_t>(std::max(0, corpus.T)));
        have_header = true;
        continue;
      }
      Document doc;
      doc.id = j.at("id").get<std::string>();
      doc.time_slot = j.at("t").get<int>();
      for (const auto& l : j.at("labels")) {
        auto idx = corpus.FindLabel(l.get<std::string>());
        if (!idx) Fail(ErrorKind::kData, "document " + doc.id + ": unknown label " + l.get<std::string>());
        doc.labels.push_back(*idx);
      }
      for (const auto& pair : j.at("counts")) {
        doc.counts.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
        doc.token_total += doc.counts.back().count;
      }
      if (j.contains("meta")) doc.meta = ParseMeta(j["meta"]);
      if (doc.time_slot < 1 || doc.time_slot > corpus.T) {
        Fail(ErrorKind::kData, "document " + doc.id + ": time slot out of range");
      }
      corpus.slots[static_cast<std::size_t>(doc.time_slot - 1)].push_back(std::move(doc));
    } catch (const json::exception& e) {
      Fail(ErrorKind::kData, "canonical corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) Fail(ErrorKind::kData, "canonical corpus is empty");
  ValidateCorpus(corpus);
  return corpus;
}

void SaveCorpus(const Corpus& corpus, const std::string& path) {
  WriteFileAtomic(path, CorpusToCanonical(corpus));
}

Corpus LoadCanonicalCorpus(const std::string& path) {
  return CorpusFromCanonical(ReadFile(path));
}

std::vector<std::vector<int>> LabelFrequency(const Corpus& corpus) {
  std::vector<std::vector<int>> table(static_cast<std::size_t>(corpus.T),
                                      std::vector<int>(corpus.num_labels(), 0));
  for (std::size_t t = 0; t < corpus.slots.size(); ++t) {
    for (const auto& doc : corpus.slots[t]) {
      for (int l : doc.labels) ++table[t][static_cast<std::size_t>(l)];
    }
  }
  return table;
}

std::string VocabularyHash(const Vocabulary& vocab) {
  std::string joined;
  for (const auto& term : vocab.terms()) {
    joined += term;
    joined += '\n';
  }
  return Sha256Hex(joined);
}

}  // namespace dltm
