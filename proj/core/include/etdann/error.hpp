#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace etdann {

enum class ErrorCode {
  MalformedCsv,
  EmptyDataset,
  DuplicateSite,
  InvalidSchema,
  ZeroVariance,
  NotFitted,
  DimensionMismatch,
  LengthMismatch,
  InvalidConfig,
  DegenerateObservations,
  DegenerateSimulation,
  TooFewSamples,
  NonFiniteInput,
  NonFiniteActivation,
  TapeMismatch,
  ShapeMismatch,
  InvalidShape,
  OutOfRange,
  DivergedTraining,
  UnknownSite,
  NoSameTypeDonors,
  FoldHygieneViolation,
  Io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace etdann
