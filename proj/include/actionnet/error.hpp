// Copyright 2026 The ActionNet Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace actionnet {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kBadMagic,
  kVersionMismatch,
  kUnexpectedEof,
  kTrailingBytes,
  kNonFinite,
  kEmptyInstanceSet,
  kBadDimension,
  kMissingColumn,
  kParseError,
  kDuplicateId,
  kUnknownVideo,
  kUndefinedCorrelation,
  kDiverged,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (tests, the CLI's exit-code mapping) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kUnexpectedEof: return "unexpected EOF";
    case ErrorCode::kTrailingBytes: return "trailing bytes";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kEmptyInstanceSet: return "empty instance set";
    case ErrorCode::kBadDimension: return "bad feature dimension";
    case ErrorCode::kMissingColumn: return "missing column";
    case ErrorCode::kParseError: return "parse error";
    case ErrorCode::kDuplicateId: return "duplicate id";
    case ErrorCode::kUnknownVideo: return "unknown video";
    case ErrorCode::kUndefinedCorrelation: return "undefined correlation";
    case ErrorCode::kDiverged: return "training diverged";
    case ErrorCode::kIo: return "I/O error";
  }
  return "unknown error";
}

}  // namespace actionnet
