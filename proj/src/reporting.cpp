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

#include "dltm/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include "dltm/error.hpp"
#include "dltm/util.hpp"
#include "json.hpp"

namespace dltm {

using nlohmann::json;

TopicScoreTable TopicScores(const LabelTopicChains& labels) {
  TopicScoreTable table;
  table.scores.resize(labels.theta.size());
  table.averages.resize(labels.theta.size());
  for (std::size_t l = 0; l < labels.theta.size(); ++l) {
    const Mat& chain = labels.theta[l];
    Require(!chain.empty(), "label chain has no slots");
    Vec avg(chain[0].size(), 0.0);
    for (const Vec& theta : chain) {
      table.scores[l].push_back(PiMeanMap(theta));
      for (std::size_t z = 0; z < avg.size(); ++z) avg[z] += table.scores[l].back()[z];
    }
    for (double& a : avg) a /= static_cast<double>(chain.size());
    table.averages[l] = std::move(avg);
  }
  return table;
}

TopicScoreTable TopicScores(const FittedModel& model) { return TopicScores(model.labels); }

std::vector<RankedTopic> TopTopics(const TopicScoreTable& table, std::size_t label, std::size_t k) {
  Require(label < table.averages.size(), "label out of range");
  const Vec& avg = table.averages[label];
  Require(k >= 1 && k <= avg.size(), "k must be in 1..Z");
  std::vector<int> order(avg.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return avg[static_cast<std::size_t>(a)] > avg[static_cast<std::size_t>(b)];
  });
  std::vector<RankedTopic> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], avg[static_cast<std::size_t>(order[i])]});
  return out;
}

namespace {

std::vector<RankedTerm> RankTerms(const Vec& prob, const Vocabulary& vocab, std::size_t k) {
  Require(prob.size() == vocab.size(), "vocabulary does not match the topic dimension");
  Require(k <= prob.size(), "k exceeds the vocabulary size");
  std::vector<std::size_t> order(prob.size());
  std::iota(order.begin(), order.end(), 0);
  const auto better = [&](std::size_t a, std::size_t b) {
    if (prob[a] != prob[b]) return prob[a] > prob[b];
    return vocab.term(a) < vocab.term(b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  std::vector<RankedTerm> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({vocab.term(order[i]), prob[order[i]]});
  return out;
}

void CheckTopicSlot(const TopicChains& topics, std::size_t z, std::size_t t) {
  Require(z < topics.topics(), "topic out of range");
  Require(t < topics.slots(), "time slot out of range");
}

}  // namespace

std::vector<RankedTerm> TopWords(const TopicChains& topics, const Vocabulary& vocab,
                                 std::size_t z, std::size_t t, std::size_t k) {
  CheckTopicSlot(topics, z, t);
  return RankTerms(PiMeanMap(topics.beta[z][t]), vocab, k);
}

std::vector<RankedTerm> TopWordsPooled(const TopicChains& topics, const Vocabulary& vocab,
                                       std::size_t z, std::size_t k) {
  CheckTopicSlot(topics, z, 0);
  Vec pooled(topics.vocab(), 0.0);
  for (const Vec& beta : topics.beta[z]) {
    const Vec p = PiMeanMap(beta);
    for (std::size_t v = 0; v < p.size(); ++v) pooled[v] += p[v];
  }
  for (double& p : pooled) p /= static_cast<double>(topics.slots());
  return RankTerms(pooled, vocab, k);
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  Require(p.size() == q.size(), "distributions differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

std::vector<int> SolveAssignment(const Mat& cost) {
  const std::size_t n = cost.size();
  for (const Vec& row : cost) Require(row.size() == n, "cost matrix must be square");
  if (n == 0) return {};
  // Shortest augmenting paths with row/column potentials; 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  Vec u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    Vec minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(n);
  for (std::size_t j = 1; j <= n; ++j) out[p[j] - 1] = static_cast<int>(j - 1);
  return out;
}

namespace {

void CheckSameShape(const TopicChains& est, const TopicChains& truth) {
  Require(est.topics() == truth.topics() && est.slots() == truth.slots() &&
              est.vocab() == truth.vocab(),
          "topic chains differ in dimension");
}

Cube MeanParams(const TopicChains& chains) {
  Cube out(chains.topics());
  for (std::size_t z = 0; z < chains.topics(); ++z)
    for (const Vec& beta : chains.beta[z]) out[z].push_back(PiMeanMap(beta));
  return out;
}

}  // namespace

TopicMatch MatchTopics(const TopicChains& est, const TopicChains& truth) {
  CheckSameShape(est, truth);
  const std::size_t Z = truth.topics();
  const std::size_t T = truth.slots();
  const Cube pe = MeanParams(est);
  const Cube pt = MeanParams(truth);
  // cost[i][j]: reference topic i against estimated topic j.
  Mat cost(Z, Vec(Z, 0.0));
  for (std::size_t i = 0; i < Z; ++i)
    for (std::size_t j = 0; j < Z; ++j) {
      for (std::size_t t = 0; t < T; ++t) cost[i][j] += TotalVariation(pt[i][t], pe[j][t]);
      cost[i][j] /= static_cast<double>(T);
    }
  TopicMatch match;
  match.perm = SolveAssignment(cost);
  for (std::size_t i = 0; i < Z; ++i) match.distances.push_back(cost[i][static_cast<std::size_t>(match.perm[i])]);
  return match;
}

Mat MatchedSlotDistances(const TopicChains& est, const TopicChains& truth,
                         const std::vector<int>& perm) {
  CheckSameShape(est, truth);
  Require(perm.size() == truth.topics(), "permutation has the wrong length");
  Mat out(truth.topics(), Vec(truth.slots()));
  for (std::size_t i = 0; i < truth.topics(); ++i) {
    const auto j = static_cast<std::size_t>(perm[i]);
    Require(j < est.topics(), "permutation entry out of range");
    for (std::size_t t = 0; t < truth.slots(); ++t)
      out[i][t] = TotalVariation(PiMeanMap(truth.beta[i][t]), PiMeanMap(est.beta[j][t]));
  }
  return out;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string LabelFrequencyCsv(const std::vector<std::string>& label_set,
                              const std::vector<std::vector<int>>& freq) {
  std::string out = "t,label,count\n";
  for (std::size_t t = 0; t < freq.size(); ++t) {
    Require(freq[t].size() == label_set.size(), "label frequency row has the wrong width");
    for (std::size_t l = 0; l < label_set.size(); ++l) {
      out += std::to_string(t + 1) + "," + CsvField(label_set[l]) + "," + std::to_string(freq[t][l]) + "\n";
    }
  }
  return out;
}

std::string PsiCsv(const std::vector<std::string>& label_set, const PsiPosterior& psi) {
  std::string out = "t,label,mean,ci_low,ci_high\n";
  for (std::size_t t = 0; t < psi.mean.size(); ++t) {
    for (std::size_t l = 0; l < label_set.size(); ++l) {
      out += std::to_string(t + 1) + "," + CsvField(label_set[l]) + "," +
             FormatCsvNumber(psi.mean[t][l]) + "," + FormatCsvNumber(psi.ci_low[t][l]) + "," +
             FormatCsvNumber(psi.ci_high[t][l]) + "\n";
    }
  }
  return out;
}

std::string TopicScoresCsv(const std::vector<std::string>& label_set, const TopicScoreTable& table) {
  Require(table.scores.size() == label_set.size(), "score table does not match the label set");
  std::string out = "label,t,topic,score\n";
  for (std::size_t l = 0; l < table.scores.size(); ++l)
    for (std::size_t t = 0; t < table.scores[l].size(); ++t)
      for (std::size_t z = 0; z < table.scores[l][t].size(); ++z)
        out += CsvField(label_set[l]) + "," + std::to_string(t + 1) + "," + std::to_string(z + 1) +
               "," + FormatCsvNumber(table.scores[l][t][z]) + "\n";
  return out;
}

std::map<int, std::string> LoadTopicNames(const std::string& path, int topics) {
  std::istringstream in(ReadFile(path));
  std::map<int, std::string> names;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) Fail(ErrorKind::kData, where + ": expected topic=name");
    int id = 0;
    try {
      std::size_t used = 0;
      const std::string key = line.substr(first, eq - first);
      id = std::stoi(key, &used);
      if (key.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      Fail(ErrorKind::kData, where + ": topic id is not an integer");
    }
    if (id < 1 || id > topics) Fail(ErrorKind::kData, where + ": topic id out of range");
    std::string name = line.substr(eq + 1);
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t\r") + 1);
    names[id] = name;
  }
  return names;
}

void ExportReport(const FittedModel& model, const std::string& out_dir, const ReportOptions& options) {
  const std::size_t Z = model.topics.topics();
  const std::size_t T = model.topics.slots();
  Require(options.top_k >= 1, "top-k must be at least 1");
  const std::size_t k = std::min(options.top_k, model.vocabulary.size());
  const std::size_t kz = std::min(options.top_k, Z);

  const TopicScoreTable scores = TopicScores(model);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("label_freq.csv", LabelFrequencyCsv(model.label_set, model.label_frequency));
  files.emplace_back("psi.csv", PsiCsv(model.label_set, model.psi));
  files.emplace_back("topic_scores.csv", TopicScoresCsv(model.label_set, scores));

  std::string words = "topic,t,rank,term,prob\n";
  std::string pooled = "topic,rank,term,prob\n";
  for (std::size_t z = 0; z < Z; ++z) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto ranked = TopWords(model.topics, model.vocabulary, z, t, k);
      for (std::size_t r = 0; r < ranked.size(); ++r)
        words += std::to_string(z + 1) + "," + std::to_string(t + 1) + "," + std::to_string(r + 1) +
                 "," + CsvField(ranked[r].term) + "," + FormatCsvNumber(ranked[r].prob) + "\n";
    }
    const auto ranked = TopWordsPooled(model.topics, model.vocabulary, z, k);
    for (std::size_t r = 0; r < ranked.size(); ++r)
      pooled += std::to_string(z + 1) + "," + std::to_string(r + 1) + "," + CsvField(ranked[r].term) +
                "," + FormatCsvNumber(ranked[r].prob) + "\n";
  }
  files.emplace_back("top_words.csv", std::move(words));
  files.emplace_back("top_words_pooled.csv", std::move(pooled));

  std::string top = "label,rank,topic,name,average_score\n";
  for (std::size_t l = 0; l < model.label_set.size(); ++l) {
    const auto ranked = TopTopics(scores, l, kz);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      const auto it = options.topic_names.find(ranked[r].topic + 1);
      const std::string name = it == options.topic_names.end() ? "" : it->second;
      top += CsvField(model.label_set[l]) + "," + std::to_string(r + 1) + "," +
             std::to_string(ranked[r].topic + 1) + "," + CsvField(name) + "," +
             FormatCsvNumber(ranked[r].score) + "\n";
    }
  }
  files.emplace_back("top_topics.csv", std::move(top));

  json manifest;
  manifest["format"] = "dltm-manifest";
  manifest["stage"] = "report";
  manifest["seed"] = model.hyper.seed;
  manifest["hyper"] = {{"topics", model.hyper.topics}, {"sigma2", model.hyper.sigma2},
                       {"delta2", model.hyper.delta2}, {"a2", model.hyper.a2},
                       {"kappa", model.hyper.kappa},   {"beta0_var", model.hyper.beta0_var}};
  json inputs = {{"corpus", model.corpus_hash}};
  for (const auto& [name, hash] : options.input_hashes) inputs[name] = hash;
  manifest["inputs"] = std::move(inputs);
  json names = json::object();
  for (const auto& [id, name] : options.topic_names) names[std::to_string(id)] = name;
  manifest["config"] = {{"top_k", options.top_k}, {"topic_names", std::move(names)}};
  json outputs = json::object();
  for (const auto& [name, body] : files) outputs[name] = Sha256Hex(body);
  manifest["outputs"] = std::move(outputs);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create directory " + out_dir + ": " + ec.message());
  const std::filesystem::path dir(out_dir);
  WriteFileAtomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  for (const auto& [name, body] : files) WriteFileAtomic((dir / name).string(), body);
}

std::vector<SlotStats> CorpusStats(const Corpus& corpus, const std::vector<std::string>& fields) {
  std::vector<SlotStats> out;
  for (std::size_t t = 0; t < corpus.slots.size(); ++t) {
    SlotStats s;
    s.t = static_cast<int>(t + 1);
    for (const auto& field : fields) {
      std::vector<double> values;
      for (const auto& doc : corpus.slots[t]) {
        const auto it = doc.meta.find(field);
        if (it != doc.meta.end()) values.push_back(it->second);
      }
      FieldSummary f;
      f.count = static_cast<int>(values.size());
      if (!values.empty()) {
        std::sort(values.begin(), values.end());
        double sum = 0.0;
        for (double x : values) sum += x;
        f.mean = sum / static_cast<double>(values.size());
        f.q25 = EmpiricalQuantile(values, 0.25);
        f.q50 = EmpiricalQuantile(values, 0.5);
        f.q75 = EmpiricalQuantile(values, 0.75);
      }
      s.fields[field] = f;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string CorpusStatsCsv(const std::vector<SlotStats>& stats) {
  std::string out = "t,field,count,mean,q25,q50,q75\n";
  for (const auto& s : stats) {
    for (const auto& [field, f] : s.fields) {
      out += std::to_string(s.t) + "," + CsvField(field) + "," + std::to_string(f.count);
      if (f.count == 0) {
        out += ",,,,\n";
      } else {
        out += "," + FormatCsvNumber(f.mean) + "," + FormatCsvNumber(f.q25) + "," +
               FormatCsvNumber(f.q50) + "," + FormatCsvNumber(f.q75) + "\n";
      }
    }
  }
  return out;
}

}  // namespace dltm
