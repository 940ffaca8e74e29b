#include "etdann/error.hpp"

namespace etdann {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DuplicateSite: return "DuplicateSite";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::NotFitted: return "NotFitted";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateObservations: return "DegenerateObservations";
    case ErrorCode::DegenerateSimulation: return "DegenerateSimulation";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::TapeMismatch: return "TapeMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DivergedTraining: return "DivergedTraining";
    case ErrorCode::UnknownSite: return "UnknownSite";
    case ErrorCode::NoSameTypeDonors: return "NoSameTypeDonors";
    case ErrorCode::FoldHygieneViolation: return "FoldHygieneViolation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace etdann
