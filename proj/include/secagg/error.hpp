/*
 * Copyright 2026 The secagg-dp Authors
 *
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

#ifndef SECAGG_ERROR_HPP_
#define SECAGG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace secagg {

enum class ErrorCode {
  kInvalidParams,
  kNotPrime,
  kModulusMismatch,
  kZeroInverse,
  kDuplicateAbscissa,
  kDuplicatePoints,
  kDimensionMismatch,
  kSingularSubmatrix,
  kInsufficientShares,
  kRankDeficient,
  kZeroColumn,
  kZeroEntryForSingleScheme,
  kZeroCoefficient,
  kIncompleteTranscript,
  kUserNotInSurvivors,
  kInsufficientAnswers,
  kInconsistentAnswers,
  kPointCollision,
  kStaleMask,
  kQueryStateConsumed,
  kMissingBlock,
  kRetryExhausted,
  kInvalidSchedule,
  kConverseViolation,
  kNonlinearityDetected,
  kEnumerationTooLarge,
  kInsufficientSamples,
  kDecodeMismatch,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNotPrime: return "NotPrime";
    case ErrorCode::kModulusMismatch: return "ModulusMismatch";
    case ErrorCode::kZeroInverse: return "ZeroInverse";
    case ErrorCode::kDuplicateAbscissa: return "DuplicateAbscissa";
    case ErrorCode::kDuplicatePoints: return "DuplicatePoints";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingularSubmatrix: return "SingularSubmatrix";
    case ErrorCode::kInsufficientShares: return "InsufficientShares";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kZeroColumn: return "ZeroColumn";
    case ErrorCode::kZeroEntryForSingleScheme: return "ZeroEntryForSingleScheme";
    case ErrorCode::kZeroCoefficient: return "ZeroCoefficient";
    case ErrorCode::kIncompleteTranscript: return "IncompleteTranscript";
    case ErrorCode::kUserNotInSurvivors: return "UserNotInSurvivors";
    case ErrorCode::kInsufficientAnswers: return "InsufficientAnswers";
    case ErrorCode::kInconsistentAnswers: return "InconsistentAnswers";
    case ErrorCode::kPointCollision: return "PointCollision";
    case ErrorCode::kStaleMask: return "StaleMask";
    case ErrorCode::kQueryStateConsumed: return "QueryStateConsumed";
    case ErrorCode::kMissingBlock: return "MissingBlock";
    case ErrorCode::kRetryExhausted: return "RetryExhausted";
    case ErrorCode::kInvalidSchedule: return "InvalidSchedule";
    case ErrorCode::kConverseViolation: return "ConverseViolation";
    case ErrorCode::kNonlinearityDetected: return "NonlinearityDetected";
    case ErrorCode::kEnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kDecodeMismatch: return "DecodeMismatch";
  }
  return "Unknown";
}

// All library failures are reported as Error; `code()` is the
// machine-readable reason surfaced by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string_view message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           std::string(message)),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string_view message) {
  throw Error(code, message);
}

// Takes a view so literal messages cost nothing on the passing path; build
// composite messages only after the check fails.
inline void require(bool condition, ErrorCode code, std::string_view message) {
  if (!condition) fail(code, message);
}

}  // namespace secagg

#endif  // SECAGG_ERROR_HPP_
