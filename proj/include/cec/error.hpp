#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cec {

enum class ErrorCode {
  MalformedLine,
  SchemaViolation,
  DuplicateId,
  InsufficientInstances,
  ProviderUnavailable,
  DimensionMismatch,
  CacheCorrupt,
  MissingEmbedding,
  BothExplanationsEmpty,
  NoEligibleInstances,
  ZeroVariance,
  AllZeroDifferences,
  EmptySample,
  InsufficientData,
  MissingPlaceholder,
  AuthFailure,
  RateLimited,
  EndpointError,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the toolkit. The code is
/// stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Corpus ingestion failure, carrying the offending line (1-based, 0 when
/// not line-specific), field, and record id where known.
class CorpusError : public Error {
 public:
  CorpusError(ErrorCode code, const std::string& message, std::size_t line,
              std::string field = {}, std::string id = {})
      : Error(code, message),
        line_(line),
        field_(std::move(field)),
        id_(std::move(id)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }
  const std::string& id() const noexcept { return id_; }

 private:
  std::size_t line_;
  std::string field_;
  std::string id_;
};

}  // namespace cec
