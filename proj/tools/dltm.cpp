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

// dltm command-line tool. Links only the C interface.
//
// Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 numerical
// failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dltm/dltm.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// Thrown to leave a subcommand with a C status.
struct StatusError {
  dltm_status status;
  std::string context;
};

void Check(dltm_status s, const std::string& context) {
  if (s != DLTM_OK) throw StatusError{s, context};
}

int ExitCode(dltm_status s) {
  switch (s) {
    case DLTM_OK:
      return kExitOk;
    case DLTM_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    case DLTM_ERR_NUMERICAL:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

struct CorpusDeleter {
  void operator()(dltm_corpus* p) const { dltm_corpus_free(p); }
};
struct TruthDeleter {
  void operator()(dltm_truth* p) const { dltm_truth_free(p); }
};
struct ModelDeleter {
  void operator()(dltm_model* p) const { dltm_model_free(p); }
};
using CorpusPtr = std::unique_ptr<dltm_corpus, CorpusDeleter>;
using TruthPtr = std::unique_ptr<dltm_truth, TruthDeleter>;
using ModelPtr = std::unique_ptr<dltm_model, ModelDeleter>;

// Takes ownership of a string returned by the library.
std::string Take(char* s) {
  std::string out = s != nullptr ? s : "";
  dltm_string_free(s);
  return out;
}

std::string Hash(const std::string& data) {
  char hex[65];
  Check(dltm_sha256(data.data(), data.size(), hex), "hashing");
  return hex;
}

std::string HashFile(const std::string& path) {
  char hex[65];
  Check(dltm_sha256_file(path.c_str(), hex), path);
  return hex;
}

void Write(const std::string& path, const std::string& data) {
  Check(dltm_write_file(path.c_str(), data.data(), data.size()), path);
}

void MakeDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw StatusError{DLTM_ERR_IO, "cannot create directory " + dir + ": " + ec.message()};
}

std::string Join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Output files are hashed in memory, the manifest is written, then the files.
void WriteOutputs(const std::string& manifest_path, json manifest,
                  const std::vector<std::pair<std::string, std::string>>& files) {
  json outputs = json::object();
  for (const auto& [path, body] : files) {
    outputs[std::filesystem::path(path).filename().string()] = Hash(body);
  }
  manifest["format"] = "dltm-manifest";
  manifest["outputs"] = std::move(outputs);
  const std::filesystem::path parent = std::filesystem::path(manifest_path).parent_path();
  if (!parent.empty()) MakeDir(parent.string());
  Write(manifest_path, manifest.dump(2) + "\n");
  for (const auto& [path, body] : files) Write(path, body);
}

json HyperJson(const dltm_hyper& h) {
  return {{"topics", h.topics}, {"sigma2", h.sigma2}, {"delta2", h.delta2}, {"a2", h.a2},
          {"kappa", h.kappa},   {"beta0_var", h.beta0_var}};
}

void AddHyperOptions(CLI::App* cmd, dltm_hyper& h) {
  cmd->add_option("--sigma2", h.sigma2, "Topic drift variance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--delta2", h.delta2, "Mean-chain drift variance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--a2", h.a2, "Label-topic variance around the mean chain")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--kappa", h.kappa, "Dirichlet concentration scale")->capture_default_str()
      ->check(CLI::PositiveNumber);
}

CLI::Option* AddSeed(CLI::App* cmd, std::uint64_t& seed) {
  return cmd->add_option("--seed", seed, "RNG seed (falls back to DLTM_SEED)")
      ->envname("DLTM_SEED")
      ->capture_default_str();
}

dltm_log_level ParseLevel(const std::string& s) {
  static const std::map<std::string, dltm_log_level> levels = {
      {"debug", DLTM_LOG_DEBUG}, {"info", DLTM_LOG_INFO}, {"warn", DLTM_LOG_WARN},
      {"error", DLTM_LOG_ERROR}, {"off", DLTM_LOG_OFF}};
  return levels.at(s);
}

// Splices "--key=value" items from a subcommand's --config file in front of
// the explicit flags, so that later flags win.
std::vector<std::string> ExpandConfig(int argc, char** argv, const std::set<std::string>& commands) {
  std::vector<std::string> args(argv, argv + argc);
  std::size_t sub = 1;
  while (sub < args.size() && commands.count(args[sub]) == 0) ++sub;
  if (sub == args.size()) return args;
  std::string path;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::string> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string x) {
      x.erase(0, x.find_first_not_of(" \t\r"));
      x.erase(x.find_last_not_of(" \t\r") + 1);
      return x;
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key == "config") continue;
    items.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, items.begin(), items.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic Labeled Topic Model toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug, info, warn, error or off")
      ->capture_default_str()
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));
  app.set_version_flag("--version", dltm_version());

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Build a canonical corpus from raw JSONL");
  pre->add_option("--config", "Flat key=value file; flags override it")->check(CLI::ExistingFile);
  std::string pre_input, pre_output, pre_stoplist;
  dltm_preprocess_options pre_opts;
  dltm_preprocess_options_default(&pre_opts);
  bool pre_no_stem = false;
  pre->add_option("--input", pre_input, "Raw corpus (JSONL)")->required()->check(CLI::ExistingFile);
  pre->add_option("--output", pre_output, "Canonical corpus to write")->required();
  pre->add_option("--stoplist", pre_stoplist, "Extra stoplist, removed after stemming")
      ->check(CLI::ExistingFile);
  pre->add_option("--min-df", pre_opts.min_doc_freq, "Minimum document frequency")
      ->capture_default_str()->check(CLI::PositiveNumber);
  pre->add_option("--min-token-length", pre_opts.min_token_length, "Minimum token length")
      ->capture_default_str()->check(CLI::PositiveNumber);
  pre->add_flag("--no-stem", pre_no_stem, "Disable Porter stemming");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a synthetic corpus from the generative model");
  sim->add_option("--config", "Flat key=value file; flags override it")->check(CLI::ExistingFile);
  dltm_hyper sim_hyper;
  dltm_hyper_default(&sim_hyper);
  dltm_sim_dims dims;
  dltm_sim_dims_default(&dims);
  std::string sim_out;
  sim->add_option("--T", dims.T, "Time slots")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--L", dims.labels, "Labels")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--Z", sim_hyper.topics, "Topics")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--V", dims.vocabulary, "Vocabulary size")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--docs", dims.docs_per_slot, "Documents per slot")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--words", dims.words_per_doc, "Words per document")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--labels-per-doc", dims.labels_per_doc, "Distinct labels per document")
      ->capture_default_str()->check(CLI::PositiveNumber);
  AddHyperOptions(sim, sim_hyper);
  AddSeed(sim, sim_hyper.seed);
  sim->add_option("--out", sim_out, "Output directory")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit topic chains and label probabilities");
  fit->add_option("--config", "Flat key=value file; flags override it")->check(CLI::ExistingFile);
  dltm_hyper fit_hyper;
  dltm_hyper_default(&fit_hyper);
  dltm_fit_options fit_opts;
  dltm_fit_options_default(&fit_opts);
  std::string fit_corpus, fit_out;
  fit->add_option("--corpus", fit_corpus, "Canonical corpus")->required()->check(CLI::ExistingFile);
  fit->add_option("--topics,--Z", fit_hyper.topics, "Number of topics")->capture_default_str()
      ->check(CLI::PositiveNumber);
  AddHyperOptions(fit, fit_hyper);
  fit->add_option("--beta0-var", fit_hyper.beta0_var, "Prior variance of the first topic slot")
      ->capture_default_str()->check(CLI::PositiveNumber);
  fit->add_option("--max-iter", fit_opts.max_iter, "Maximum EM iterations")->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit->add_option("--tol", fit_opts.rel_tol, "Relative objective tolerance")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--chains", fit_opts.psi_chains, "Label-probability chains")
      ->capture_default_str()->check(CLI::PositiveNumber);
  fit->add_option("--level", fit_opts.psi_level, "Credible level")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  fit->add_option("--threads", fit_opts.threads, "Worker threads")->capture_default_str()
      ->check(CLI::PositiveNumber);
  AddSeed(fit, fit_hyper.seed);
  fit->add_option("--out", fit_out, "Output directory")->required();

  // fit-psi
  auto* fpsi = app.add_subcommand("fit-psi", "Fit label probabilities only");
  fpsi->add_option("--config", "Flat key=value file; flags override it")->check(CLI::ExistingFile);
  dltm_psi_options psi_opts;
  dltm_psi_options_default(&psi_opts);
  std::string psi_corpus, psi_out;
  bool psi_stdout = false;
  fpsi->add_option("--corpus", psi_corpus, "Canonical corpus")->required()->check(CLI::ExistingFile);
  fpsi->add_option("--kappa", psi_opts.kappa, "Dirichlet concentration scale")
      ->capture_default_str()->check(CLI::PositiveNumber);
  fpsi->add_option("--chains", psi_opts.chains, "Independent chains")->capture_default_str()
      ->check(CLI::PositiveNumber);
  fpsi->add_option("--level", psi_opts.level, "Credible level")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  fpsi->add_option("--threads", psi_opts.threads, "Worker threads")->capture_default_str()
      ->check(CLI::PositiveNumber);
  AddSeed(fpsi, psi_opts.seed);
  auto* psi_out_opt = fpsi->add_option("--out", psi_out, "Output directory");
  auto* psi_stdout_opt = fpsi->add_flag("--stdout", psi_stdout, "Print psi.csv to standard output");
  psi_out_opt->excludes(psi_stdout_opt);

  // report
  auto* rep = app.add_subcommand("report", "Export tables from a fitted model");
  rep->add_option("--config", "Flat key=value file; flags override it")->check(CLI::ExistingFile);
  std::string rep_model, rep_out, rep_names;
  int top_k = 10;
  rep->add_option("--model", rep_model, "Model bundle")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", rep_out, "Output directory")->required();
  rep->add_option("--top-k", top_k, "Entries per ranked list")->capture_default_str()
      ->check(CLI::PositiveNumber);
  rep->add_option("--names", rep_names, "Topic names (topic=name lines)")->check(CLI::ExistingFile);

  // stats
  auto* st = app.add_subcommand("stats", "Label frequencies and metadata summaries");
  st->add_option("--config", "Flat key=value file; flags override it")->check(CLI::ExistingFile);
  std::string st_corpus, st_out, st_table = "label-freq";
  bool st_stdout = false;
  st->add_option("--corpus", st_corpus, "Canonical corpus")->required()->check(CLI::ExistingFile);
  auto* st_out_opt = st->add_option("--out", st_out, "Output directory");
  auto* st_stdout_opt = st->add_flag("--stdout", st_stdout, "Print one table to standard output");
  st->add_option("--table", st_table, "Table for --stdout: label-freq or meta")
      ->capture_default_str()->check(CLI::IsMember({"label-freq", "meta"}));
  st_out_opt->excludes(st_stdout_opt);

  try {
    std::set<std::string> commands;
    for (const CLI::App* sub : app.get_subcommands({})) commands.insert(sub->get_name());
    std::vector<std::string> args = ExpandConfig(argc, argv, commands);
    std::reverse(args.begin(), args.end());
    args.pop_back();
    app.parse(std::move(args));
  } catch (const CLI::Success& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  dltm_set_log_level(ParseLevel(log_level));

  try {
    if (pre->parsed()) {
      pre_opts.porter = pre_no_stem ? 0 : 1;
      if (!pre_stoplist.empty()) pre_opts.stoplist_path = pre_stoplist.c_str();
      dltm_corpus* raw = nullptr;
      size_t dropped = 0;
      Check(dltm_corpus_load_raw(pre_input.c_str(), &pre_opts, &raw, &dropped), pre_input);
      CorpusPtr corpus(raw);
      char* text = nullptr;
      Check(dltm_corpus_to_string(corpus.get(), &text), "corpus");
      json manifest = {{"stage", "preprocess"},
                       {"config",
                        {{"min_df", pre_opts.min_doc_freq},
                         {"min_token_length", pre_opts.min_token_length},
                         {"stemmer", pre_no_stem ? "none" : "porter"}}},
                       {"inputs", {{"input", HashFile(pre_input)}}},
                       {"dropped_documents", dropped}};
      if (!pre_stoplist.empty()) manifest["inputs"]["stoplist"] = HashFile(pre_stoplist);
      WriteOutputs(pre_output + ".manifest.json", std::move(manifest), {{pre_output, Take(text)}});
    } else if (sim->parsed()) {
      MakeDir(sim_out);
      dltm_corpus* c = nullptr;
      dltm_truth* t = nullptr;
      Check(dltm_simulate(&sim_hyper, &dims, &c, &t), "simulate");
      CorpusPtr corpus(c);
      TruthPtr truth(t);
      char* corpus_text = nullptr;
      char* truth_text = nullptr;
      Check(dltm_corpus_to_string(corpus.get(), &corpus_text), "corpus");
      std::string corpus_body = Take(corpus_text);
      Check(dltm_truth_to_string(truth.get(), &truth_text), "truth");
      json manifest = {{"stage", "simulate"},
                       {"seed", sim_hyper.seed},
                       {"hyper", HyperJson(sim_hyper)},
                       {"config",
                        {{"T", dims.T},
                         {"L", dims.labels},
                         {"V", dims.vocabulary},
                         {"docs", dims.docs_per_slot},
                         {"words", dims.words_per_doc},
                         {"labels_per_doc", dims.labels_per_doc}}}};
      WriteOutputs(Join(sim_out, "manifest.json"), std::move(manifest),
                   {{Join(sim_out, "corpus.jsonl"), std::move(corpus_body)},
                    {Join(sim_out, "truth.json"), Take(truth_text)}});
    } else if (fit->parsed()) {
      MakeDir(fit_out);
      const std::string corpus_hash = HashFile(fit_corpus);
      dltm_corpus* c = nullptr;
      Check(dltm_corpus_load(fit_corpus.c_str(), &c), fit_corpus);
      CorpusPtr corpus(c);
      dltm_model* m = nullptr;
      Check(dltm_fit(corpus.get(), &fit_hyper, &fit_opts, &m), "fit");
      ModelPtr model(m);
      char* text = nullptr;
      Check(dltm_model_to_string(model.get(), &text), "model");
      dltm_fit_diagnostics diag;
      Check(dltm_model_get_diagnostics(model.get(), &diag), "model");
      // The thread count is not recorded: it never changes the outputs.
      json manifest = {{"stage", "fit"},
                       {"seed", fit_hyper.seed},
                       {"hyper", HyperJson(fit_hyper)},
                       {"config",
                        {{"max_iter", fit_opts.max_iter},
                         {"tol", fit_opts.rel_tol},
                         {"chains", fit_opts.psi_chains},
                         {"level", fit_opts.psi_level}}},
                       {"inputs", {{"corpus", corpus_hash}}},
                       {"diagnostics",
                        {{"iterations", diag.iterations},
                         {"converged", diag.converged != 0},
                         {"final_elbo", diag.final_elbo}}}};
      WriteOutputs(Join(fit_out, "manifest.json"), std::move(manifest),
                   {{Join(fit_out, "model.json"), Take(text)}});
    } else if (fpsi->parsed()) {
      if (!psi_stdout && psi_out.empty()) {
        std::cerr << "fit-psi: one of --out or --stdout is required\n";
        return kExitUsage;
      }
      if (!psi_stdout) MakeDir(psi_out);
      const std::string corpus_hash = HashFile(psi_corpus);
      dltm_corpus* c = nullptr;
      Check(dltm_corpus_load(psi_corpus.c_str(), &c), psi_corpus);
      CorpusPtr corpus(c);
      char* csv = nullptr;
      char* js = nullptr;
      Check(dltm_fit_psi(corpus.get(), &psi_opts, &csv, &js), "fit-psi");
      std::string csv_body = Take(csv);
      std::string json_body = Take(js);
      if (psi_stdout) {
        std::cout << csv_body;
      } else {
        json manifest = {{"stage", "fit-psi"},
                         {"seed", psi_opts.seed},
                         {"config",
                          {{"kappa", psi_opts.kappa},
                           {"chains", psi_opts.chains},
                           {"level", psi_opts.level}}},
                         {"inputs", {{"corpus", corpus_hash}}}};
        WriteOutputs(Join(psi_out, "manifest.json"), std::move(manifest),
                     {{Join(psi_out, "psi.csv"), std::move(csv_body)},
                      {Join(psi_out, "psi.json"), std::move(json_body)}});
      }
    } else if (rep->parsed()) {
      const std::string model_hash = HashFile(rep_model);
      dltm_model* m = nullptr;
      Check(dltm_model_load(rep_model.c_str(), &m), rep_model);
      ModelPtr model(m);
      dltm_report_options opts;
      dltm_report_options_default(&opts);
      opts.top_k = top_k;
      opts.model_hash = model_hash.c_str();
      if (!rep_names.empty()) opts.names_path = rep_names.c_str();
      Check(dltm_report(model.get(), rep_out.c_str(), &opts), rep_out);
    } else if (st->parsed()) {
      if (!st_stdout && st_out.empty()) {
        std::cerr << "stats: one of --out or --stdout is required\n";
        return kExitUsage;
      }
      if (!st_stdout) MakeDir(st_out);
      const std::string corpus_hash = HashFile(st_corpus);
      dltm_corpus* c = nullptr;
      Check(dltm_corpus_load(st_corpus.c_str(), &c), st_corpus);
      CorpusPtr corpus(c);
      char* freq = nullptr;
      char* meta = nullptr;
      Check(dltm_label_frequency_csv(corpus.get(), &freq), "stats");
      std::string freq_body = Take(freq);
      Check(dltm_corpus_stats_csv(corpus.get(), &meta), "stats");
      std::string meta_body = Take(meta);
      if (st_stdout) {
        std::cout << (st_table == "meta" ? meta_body : freq_body);
      } else {
        json manifest = {{"stage", "stats"}, {"inputs", {{"corpus", corpus_hash}}}};
        WriteOutputs(Join(st_out, "manifest.json"), std::move(manifest),
                     {{Join(st_out, "label_freq.csv"), std::move(freq_body)},
                      {Join(st_out, "corpus_stats.csv"), std::move(meta_body)}});
      }
    }
  } catch (const StatusError& e) {
    const std::string detail = dltm_last_error();
    std::cerr << "level=error event=failed context=\"" << e.context << "\" message=\""
              << (detail.empty() ? e.context : detail) << "\"\n";
    return ExitCode(e.status);
  } catch (const std::exception& e) {
    std::cerr << "level=error event=failed message=\"" << e.what() << "\"\n";
    return kExitData;
  }
  return kExitOk;
}
