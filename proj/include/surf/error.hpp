/*
 * Copyright 2026 The SURF Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace surf {

// Every failure raised by the library carries one of these kinds. The CLI maps
// them onto stable exit codes (see exit_code()).
enum class ErrorKind {
  kArgument,     // bad parameter value (k < 2, df = 0, unknown group, ...)
  kConfig,       // missing/invalid schema config key
  kSchema,       // missing column, feature-count mismatch
  kParse,        // malformed cell, bad event flag, time <= 0
  kIo,           // cannot open/read/write a file
  kVersion,      // model file from an incompatible major version
  kDomain,       // math domain violation (log of zero survival)
  kUndefined,    // metric undefined on this input (no permissible pairs, ...)
  kSize,         // group too small for the requested computation
  kUnsupported,  // input shape outside what the operation defines
  kTraining,     // data cannot be trained on (no events)
  kDegenerate,   // numerically degenerate weighting or statistic
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kVersion: return "version";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kUndefined: return "undefined";
    case ErrorKind::kSize: return "size";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kTraining: return "training";
    case ErrorKind::kDegenerate: return "degenerate";
  }
  return "unknown";
}

// 2 usage/config, 3 data/parse, 4 numerical-degenerate.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument:
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kSchema:
    case ErrorKind::kParse:
    case ErrorKind::kIo:
    case ErrorKind::kVersion:
      return 3;
    case ErrorKind::kDomain:
    case ErrorKind::kUndefined:
    case ErrorKind::kSize:
    case ErrorKind::kUnsupported:
    case ErrorKind::kTraining:
    case ErrorKind::kDegenerate:
      return 4;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace surf
