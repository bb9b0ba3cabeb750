/*
 * Copyright 2026 The cxrprep Authors.
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

namespace cxrprep {

// Error classes shared by every module. The CLI maps each class to a
// distinct process exit code (see exit_code()).
enum class ErrorCode {
  kInvalidArgument,
  kFileNotFound,
  kUnsupportedFormat,
  kCorruptData,
  kIoError,
  kImageTooSmall,
  kDimensionMismatch,
  kEmptyMask,
  kOutOfBounds,
  kSchemaMismatch,
  kDuplicateRecordId,
  kOverlapViolation,
  kDegenerateLabels,
  kMissingRaceScores,
  kNoValidCells,
  kEmptyRunSet,
  kDuplicateRun,
  kSingleGroup,
  kOutputExists,
  kFailureRateExceeded,
};

std::string_view to_string(ErrorCode code);

// Process exit code for an error class. 0 is reserved for success, 1 for
// unexpected failures and 2 for command-line usage errors.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cxrprep
