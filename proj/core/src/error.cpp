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

#include "cxrprep/error.hpp"

namespace cxrprep {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptData: return "CorruptData";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kDuplicateRecordId: return "DuplicateRecordId";
    case ErrorCode::kOverlapViolation: return "OverlapViolation";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kMissingRaceScores: return "MissingRaceScores";
    case ErrorCode::kNoValidCells: return "NoValidCells";
    case ErrorCode::kEmptyRunSet: return "EmptyRunSet";
    case ErrorCode::kDuplicateRun: return "DuplicateRun";
    case ErrorCode::kSingleGroup: return "SingleGroup";
    case ErrorCode::kOutputExists: return "OutputExists";
    case ErrorCode::kFailureRateExceeded: return "FailureRateExceeded";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 2;
    case ErrorCode::kFileNotFound: return 3;
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kCorruptData: return 4;
    case ErrorCode::kIoError: return 5;
    case ErrorCode::kSchemaMismatch: return 6;
    case ErrorCode::kDuplicateRecordId:
    case ErrorCode::kDuplicateRun: return 7;
    case ErrorCode::kOutputExists: return 8;
    case ErrorCode::kFailureRateExceeded: return 9;
    case ErrorCode::kDegenerateLabels:
    case ErrorCode::kMissingRaceScores:
    case ErrorCode::kNoValidCells:
    case ErrorCode::kEmptyRunSet:
    case ErrorCode::kSingleGroup: return 10;
    case ErrorCode::kImageTooSmall:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kEmptyMask:
    case ErrorCode::kOutOfBounds: return 11;
    case ErrorCode::kOverlapViolation: return 12;
  }
  return 1;
}

}  // namespace cxrprep
