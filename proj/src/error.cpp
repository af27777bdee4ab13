#include "cec/error.hpp"

namespace cec {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InsufficientInstances: return "InsufficientInstances";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::BothExplanationsEmpty: return "BothExplanationsEmpty";
    case ErrorCode::NoEligibleInstances: return "NoEligibleInstances";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace cec
