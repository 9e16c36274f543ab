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

#ifndef DLTM_ERROR_HPP_
#define DLTM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dltm {

enum class ErrorKind {
  kInvalidArgument,  // caller violated a precondition
  kIo,               // file could not be read or written
  kData,             // input file parsed but content is invalid
  kNumerical,        // non-finite objective, divergence
};

// All library failures are reported by throwing Error. The C API maps the
// kind onto a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void Require(bool cond, const std::string& what) {
  if (!cond) Fail(ErrorKind::kInvalidArgument, what);
}

}  // namespace dltm

#endif  // DLTM_ERROR_HPP_
