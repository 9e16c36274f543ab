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

// Small shared helpers: seeded engines, a deterministic parallel_for,
// key=value logging, hashing and atomic file output.

#ifndef DLTM_UTIL_HPP_
#define DLTM_UTIL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>
#include <utility>

namespace dltm {

using Engine = std::mt19937_64;

// Streams used by different parts of the library. Mixing a stream tag into
// the seed keeps e.g. the fit jitter independent of the Stage-1 chains.
enum class Stream : std::uint32_t {
  kSimulate = 1,
  kInitJitter = 2,
  kLabelChains = 3,
};

// Engine for (seed, stream, index). Deterministic and independent of the
// number of worker threads.
Engine MakeEngine(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

// Runs fn(i) for i in [0, n) split into contiguous chunks over `threads`
// workers. fn must only write state owned by index i; with that discipline
// results do not depend on the thread count.
void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t)>& fn);

// ---- logging ---------------------------------------------------------------

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

using LogField = std::pair<std::string_view, std::string>;

// Writes one line `level=.. event=.. k=v ...` to stderr.
void Log(LogLevel level, std::string_view event,
         std::initializer_list<LogField> fields = {});

// ---- hashing and files -------------------------------------------------------

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::string& path);

std::string ReadFile(const std::string& path);

// Writes `content` to a sibling temp file and renames it over `path`, so a
// crash never leaves a half-written result.
void WriteFileAtomic(const std::string& path, std::string_view content);

// %.9g formatting used by all CSV outputs.
std::string FormatCsvNumber(double value);

}  // namespace dltm

#endif  // DLTM_UTIL_HPP_
